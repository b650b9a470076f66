#include "qlb/physics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qlb {

namespace {

constexpr cplx kI{0.0, 1.0};

void weighted_mean_or_nothing(double weight, double moment, std::optional<double> &out) {
    if (weight >= 1e-8) out = moment / weight;
}

} // namespace

std::optional<double> WavepacketSpec::asymmetry() const {
    if (c_d == 0.0) return std::nullopt;
    return c_u / c_d;
}

double packet_center(const Grid &grid, const WavepacketSpec &spec) {
    if (spec.center >= 0.0) return spec.center;
    return static_cast<double>(grid.extent(spec.axis) / 2);
}

SpinorField init_gaussian(const Grid &grid, const DiracSet &set, const WavepacketSpec &spec,
                          bool normalize, double dt) {
    if (!(spec.sigma > 0.0)) throw std::invalid_argument("wavepacket sigma must be positive");
    if (!grid.active(spec.axis))
        throw std::invalid_argument(std::string("wavepacket axis ") + axis_name(spec.axis) +
                                    " is not active in the grid");
    const std::size_t n = grid.extent(spec.axis);
    const double center = packet_center(grid, spec);
    const double reach = 5.0 * spec.sigma / dt;
    if (center - reach < 0.0 || center + reach > static_cast<double>(n - 1)) {
        std::ostringstream msg;
        msg << "wavepacket centre " << center << " +/- 5 sigma (" << reach
            << " sites) does not fit in " << n << " sites";
        throw std::invalid_argument(msg.str());
    }

    const double norm_g = std::pow(2.0 * std::numbers::pi * spec.sigma * spec.sigma, -0.25);
    const Complex4x4 &sy = set.rotation_of(Axis::y);
    SpinorField field(grid, dt);
    const auto axis = static_cast<std::size_t>(spec.axis);
    for (std::size_t s = 0; s < grid.sites(); ++s) {
        const double z = (static_cast<double>(grid.coords(s)[axis]) - center) * dt;
        const cplx up = spec.c_u * std::exp(kI * (spec.k * z));
        const cplx down = spec.c_d * std::exp(-kI * (spec.k * z));
        const double envelope = norm_g * std::exp(-z * z / (4.0 * spec.sigma * spec.sigma));
        const Spinor column{(-up + down) * envelope, (up - down) * envelope, (up + down) * envelope,
                            (up + down) * envelope};
        field.at(s) = matvec(sy, column);
    }
    if (normalize) {
        const double n2 = field.norm2();
        if (!(n2 > 0.0)) throw std::invalid_argument("wavepacket has zero norm");
        const double scale = 1.0 / std::sqrt(n2);
        for (Spinor &psi : field.data())
            for (cplx &c : psi) c *= scale;
    }
    return field;
}

Branch parse_branch(std::string_view name) {
    if (name == "particle") return Branch::particle;
    if (name == "antiparticle") return Branch::antiparticle;
    throw std::invalid_argument("invalid branch '" + std::string(name) +
                                "' (expected particle or antiparticle)");
}

Spinor free_spinor(const DiracSet &set, double k, double mass, Branch branch, Axis axis) {
    const double energy = std::hypot(k, mass);
    if (energy == 0.0) throw std::invalid_argument("free spinor undefined for k = m = 0");
    // (H - E)(H + E) = 0, so (H ± E) w lies in the ±E eigenspace for any w.
    const double sign = branch == Branch::particle ? 1.0 : -1.0;
    const Complex4x4 projector =
        k * set.alpha_of(axis) + mass * set.beta + Complex4x4::identity() * (sign * energy);
    const std::array<std::size_t, 2> seeds = branch == Branch::particle
                                                 ? std::array<std::size_t, 2>{0, 2}
                                                 : std::array<std::size_t, 2>{2, 0};
    for (std::size_t seed : seeds) {
        Spinor w{};
        w[seed] = 1.0;
        Spinor u = matvec(projector, w);
        double n2 = 0.0;
        for (const cplx &c : u) n2 += std::norm(c);
        if (n2 > 1e-20) {
            const double scale = 1.0 / std::sqrt(n2);
            for (cplx &c : u) c *= scale;
            return u;
        }
    }
    throw std::logic_error("free spinor: no eigenvector found");
}

SpinorField plane_wave(const Grid &grid, const DiracSet &set, double k, double mass, Branch branch,
                       Axis axis, double dt) {
    if (!grid.active(axis))
        throw std::invalid_argument(std::string("plane wave axis ") + axis_name(axis) +
                                    " is not active in the grid");
    if (grid.boundary() != Boundary::periodic)
        throw std::invalid_argument("plane waves need a periodic grid");
    const double length = static_cast<double>(grid.extent(axis)) * dt;
    const double wavelengths = k * length / (2.0 * std::numbers::pi);
    if (std::abs(wavelengths - std::round(wavelengths)) > 1e-9 * std::max(1.0, std::abs(wavelengths))) {
        std::ostringstream msg;
        msg << "plane wave k = " << k << " is not commensurate with box length " << length
            << " (" << wavelengths << " wavelengths)";
        throw std::invalid_argument(msg.str());
    }
    const Spinor u = free_spinor(set, k, mass, branch, axis);
    SpinorField field(grid, dt);
    const double amplitude = 1.0 / std::sqrt(static_cast<double>(grid.sites()) * field.cell_volume());
    const auto a = static_cast<std::size_t>(axis);
    for (std::size_t s = 0; s < grid.sites(); ++s) {
        const double x = static_cast<double>(grid.coords(s)[a]) * dt;
        const cplx phase = amplitude * std::exp(kI * (k * x));
        for (std::size_t i = 0; i < 4; ++i) field.at(s)[i] = u[i] * phase;
    }
    return field;
}

std::vector<double> density(const SpinorField &field) {
    std::vector<double> out(field.grid().sites());
    for (std::size_t s = 0; s < out.size(); ++s) {
        double acc = 0.0;
        for (const cplx &c : field.at(s)) acc += std::norm(c);
        out[s] = acc;
    }
    return out;
}

namespace {

// psi^dagger M psi per site, with M's sparsity exploited.
template <class F>
std::vector<double> site_expectation(const SpinorField &field, const Complex4x4 &m, F project) {
    const detail::SiteKernel k(m);
    std::vector<double> out(field.grid().sites());
    for (std::size_t s = 0; s < out.size(); ++s) {
        const Spinor &psi = field.at(s);
        cplx acc = 0.0;
        for (int r = 0; r < 4; ++r) acc += std::conj(psi[static_cast<std::size_t>(r)]) * k.row(r, psi);
        out[s] = project(acc);
    }
    return out;
}

} // namespace

std::vector<double> rho_s(const SpinorField &field, const DiracSet &set) {
    return site_expectation(field, set.beta, [](cplx v) { return v.real(); });
}

std::vector<double> rho_a(const SpinorField &field, const DiracSet &set) {
    return site_expectation(field, set.sigma, [](cplx v) { return (kI * v).real(); });
}

BranchDensities branch_densities(const SpinorField &field, const DiracSet &set, Axis axis) {
    const Complex4x4 &s_a = set.rotation_of(axis);
    BranchDensities out{std::vector<double>(field.grid().sites()),
                        std::vector<double>(field.grid().sites())};
    for (std::size_t s = 0; s < field.grid().sites(); ++s) {
        const Spinor r = matvec(s_a, field.at(s));
        out.right[s] = std::norm(r[0]) + std::norm(r[1]);
        out.left[s] = std::norm(r[2]) + std::norm(r[3]);
    }
    return out;
}

std::vector<double> axis_coordinates(const Grid &grid, Axis axis, double center, double dx) {
    std::vector<double> out(grid.sites());
    const auto a = static_cast<std::size_t>(axis);
    for (std::size_t s = 0; s < grid.sites(); ++s)
        out[s] = (static_cast<double>(grid.coords(s)[a]) - center) * dx;
    return out;
}

CentroidPair centroids(std::span<const double> profile, std::span<const double> coordinates,
                       double split) {
    if (profile.size() != coordinates.size())
        throw std::invalid_argument("centroids: profile and coordinates differ in length");
    double w_left = 0.0, m_left = 0.0, w_right = 0.0, m_right = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double x = coordinates[i];
        const double rho = profile[i];
        if (x > split) {
            w_right += rho;
            m_right += rho * x;
        } else if (x < split) {
            w_left += rho;
            m_left += rho * x;
        } else {
            w_left += 0.5 * rho;
            m_left += 0.5 * rho * x;
            w_right += 0.5 * rho;
            m_right += 0.5 * rho * x;
        }
    }
    CentroidPair out;
    weighted_mean_or_nothing(w_left, m_left, out.left);
    weighted_mean_or_nothing(w_right, m_right, out.right);
    return out;
}

CentroidPair mover_centroids(const SpinorField &field, const DiracSet &set, Axis axis,
                             double center) {
    const BranchDensities b = branch_densities(field, set, axis);
    const std::vector<double> x = axis_coordinates(field.grid(), axis, center, field.dx());
    double w_left = 0.0, m_left = 0.0, w_right = 0.0, m_right = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) {
        w_right += b.right[s];
        m_right += b.right[s] * x[s];
        w_left += b.left[s];
        m_left += b.left[s] * x[s];
    }
    CentroidPair out;
    weighted_mean_or_nothing(w_left, m_left, out.left);
    weighted_mean_or_nothing(w_right, m_right, out.right);
    return out;
}

double theory_group_velocity(double k, double dynamic_mass) {
    if (k == 0.0 && dynamic_mass == 0.0)
        throw std::invalid_argument("group velocity undefined for k = m' = 0");
    return k / std::hypot(k, dynamic_mass);
}

ObservableRecord observe(const SpinorField &field, const DiracSet &set, std::size_t step,
                         Axis axis, double center) {
    ObservableRecord rec;
    rec.step = step;
    rec.time = static_cast<double>(step) * field.dt();
    rec.norm2 = field.norm2();
    rec.density = density(field);
    rec.rho_s = rho_s(field, set);
    rec.rho_a = rho_a(field, set);
    const std::vector<double> x = axis_coordinates(field.grid(), axis, center, field.dx());
    rec.half_line = centroids(rec.density, x, 0.0);
    rec.movers = mover_centroids(field, set, axis, center);
    return rec;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least squares slope needs at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("least squares slope: all abscissae coincide");
    return sxy / sxx;
}

double measured_mean_velocity(std::span<const ObservableRecord> series, std::size_t first_step,
                              std::size_t last_step) {
    std::vector<double> t, c;
    for (const ObservableRecord &rec : series) {
        if (rec.step < first_step || rec.step > last_step) continue;
        if (!rec.movers.right)
            throw std::invalid_argument("mean velocity: right-mover centroid undefined at step " +
                                        std::to_string(rec.step));
        t.push_back(rec.time);
        c.push_back(*rec.movers.right);
    }
    if (t.size() < 3)
        throw std::invalid_argument("mean velocity window needs at least three snapshots");
    return least_squares_slope(t, c);
}

} // namespace qlb
