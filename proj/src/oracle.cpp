#include "qlb/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace qlb::oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

Eigen::Matrix4cd to_eigen(const Complex4x4 &m) {
    Eigen::Matrix4cd out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = m(r, c);
    return out;
}

Complex4x4 from_eigen(const Eigen::Matrix4cd &m) {
    Complex4x4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = m(r, c);
    return out;
}

void require_small(const Grid &grid) {
    if (grid.sites() > kMaxDenseSites)
        throw std::invalid_argument("dense oracle limited to " + std::to_string(kMaxDenseSites) +
                                    " sites, got " + std::to_string(grid.sites()));
}

Eigen::Index flat(std::size_t site, int comp) { return static_cast<Eigen::Index>(4 * site) + comp; }

DenseOperator block_diagonal(const Grid &grid, const Eigen::Matrix4cd &block) {
    const auto dim = static_cast<Eigen::Index>(4 * grid.sites());
    DenseOperator out = DenseOperator::Zero(dim, dim);
    for (std::size_t s = 0; s < grid.sites(); ++s) out.block<4, 4>(flat(s, 0), flat(s, 0)) = block;
    return out;
}

/// Site that lies `offset` steps along `axis` from `site`, with the grid's boundary rule.
std::size_t neighbour(const Grid &grid, std::size_t site, Axis axis, long offset) {
    auto c = grid.coords(site);
    const auto a = static_cast<std::size_t>(axis);
    const long n = static_cast<long>(grid.extent(axis));
    long target = static_cast<long>(c[a]) + offset;
    if (target < 0 || target >= n) {
        if (grid.boundary() == Boundary::periodic)
            target = ((target % n) + n) % n;
        else
            target = static_cast<long>(c[a]);
    }
    c[a] = static_cast<std::size_t>(target);
    return grid.index(c[0], c[1], c[2]);
}

/// P_a: components 1,2 at x come from x - 1, components 3,4 from x + 1.
DenseOperator translation(const Grid &grid, Axis axis) {
    const auto dim = static_cast<Eigen::Index>(4 * grid.sites());
    DenseOperator p = DenseOperator::Zero(dim, dim);
    for (std::size_t s = 0; s < grid.sites(); ++s) {
        const std::size_t from_minus = neighbour(grid, s, axis, -1);
        const std::size_t from_plus = neighbour(grid, s, axis, +1);
        for (int comp = 0; comp < 4; ++comp) {
            const std::size_t src = comp < 2 ? from_minus : from_plus;
            p(flat(s, comp), flat(src, comp)) += 1.0;
        }
    }
    return p;
}

Eigen::Matrix4cd site_generator(const DiracSet &set, const CollisionModel &model, double t, double dt,
                                std::size_t site, const std::array<double, 3> &position,
                                const SpinorField *density_source) {
    const Eigen::Matrix4cd beta = to_eigen(set.beta);
    if (const auto *free = std::get_if<FreeModel>(&model)) return -kI * (free->mass * dt) * beta;
    if (const auto *njl = std::get_if<NjlModel>(&model)) {
        if (!density_source) throw std::invalid_argument("NJL dense collision needs a density source");
        Eigen::Vector4cd psi;
        for (int i = 0; i < 4; ++i) psi(i) = density_source->at(site)[static_cast<std::size_t>(i)];
        const Eigen::Matrix4cd sig = to_eigen(set.sigma);
        const double rho_s = (psi.adjoint() * beta * psi)(0).real();
        const double rho_a = (kI * (psi.adjoint() * sig * psi)(0)).real();
        return (-kI * (njl->mass - njl->coupling * rho_s) * beta - njl->coupling * rho_a * sig) * dt;
    }
    const auto &em = std::get<EmModel>(model);
    const EmPotentialSample p = em.potential(site, position, t);
    Eigen::Matrix4cd scattering = kI * em.mass * beta +
                                  kI * em.charge * p.scalar_potential * Eigen::Matrix4cd::Identity();
    for (std::size_t a = 0; a < 3; ++a)
        scattering -= kI * em.charge * p.vector_potential[a] * to_eigen(set.alpha[a]);
    return -dt * scattering;
}

} // namespace

Complex4x4 series_expm(const Complex4x4 &m) {
    const Eigen::Matrix4cd a = to_eigen(m);
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    double scaled = norm;
    while (scaled > 0.5) {
        scaled *= 0.5;
        ++squarings;
    }
    const Eigen::Matrix4cd x = a / std::ldexp(1.0, squarings);
    Eigen::Matrix4cd sum = Eigen::Matrix4cd::Identity();
    Eigen::Matrix4cd term = Eigen::Matrix4cd::Identity();
    for (int n = 1; n < 200; ++n) {
        term = (term * x / static_cast<double>(n)).eval();
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
    return from_eigen(sum);
}

DenseVector flatten(const SpinorField &field) {
    DenseVector v(static_cast<Eigen::Index>(4 * field.grid().sites()));
    for (std::size_t s = 0; s < field.grid().sites(); ++s)
        for (int c = 0; c < 4; ++c) v(flat(s, c)) = field.at(s)[static_cast<std::size_t>(c)];
    return v;
}

SpinorField unflatten(const DenseVector &v, const Grid &grid, double dt) {
    if (v.size() != static_cast<Eigen::Index>(4 * grid.sites()))
        throw std::invalid_argument("unflatten: vector size does not match grid");
    SpinorField field(grid, dt);
    for (std::size_t s = 0; s < grid.sites(); ++s)
        for (int c = 0; c < 4; ++c) field.at(s)[static_cast<std::size_t>(c)] = v(flat(s, c));
    return field;
}

DenseOperator dense_streaming(const Grid &grid, const DiracSet &set, const std::vector<Axis> &axes) {
    require_small(grid);
    const auto dim = static_cast<Eigen::Index>(4 * grid.sites());
    DenseOperator total = DenseOperator::Identity(dim, dim);
    for (Axis axis : axes) {
        const Eigen::Matrix4cd s = to_eigen(set.rotation_of(axis));
        const DenseOperator rot = block_diagonal(grid, s);
        const DenseOperator rot_inv = block_diagonal(grid, s.inverse());
        total = (rot * translation(grid, axis) * rot_inv * total).eval();
    }
    return total;
}

DenseOperator dense_collision(const Grid &grid, const DiracSet &set, const CollisionModel &model,
                              double t, double dt, const SpinorField *density_source) {
    require_small(grid);
    const auto dim = static_cast<Eigen::Index>(4 * grid.sites());
    DenseOperator c = DenseOperator::Zero(dim, dim);
    for (std::size_t s = 0; s < grid.sites(); ++s) {
        const auto coords = grid.coords(s);
        const std::array<double, 3> position{static_cast<double>(coords[0]) * dt,
                                             static_cast<double>(coords[1]) * dt,
                                             static_cast<double>(coords[2]) * dt};
        const Eigen::Matrix4cd gen = site_generator(set, model, t, dt, s, position, density_source);
        c.block<4, 4>(flat(s, 0), flat(s, 0)) = to_eigen(series_expm(from_eigen(gen)));
    }
    return c;
}

DenseOperator dense_split_step(const Grid &grid, const DiracSet &set, const CollisionModel &model,
                               const std::vector<Axis> &axes, double t, double dt,
                               const SpinorField *density_source) {
    return dense_collision(grid, set, model, t, dt, density_source) * dense_streaming(grid, set, axes);
}

cplx analytic_free_evolution(double k, double mass, Branch branch, double time) {
    const double energy = std::sqrt(k * k + mass * mass);
    const double sign = branch == Branch::particle ? -1.0 : 1.0;
    return std::exp(kI * (sign * energy * time));
}

} // namespace qlb::oracle
