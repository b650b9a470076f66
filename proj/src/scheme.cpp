#include "qlb/scheme.hpp"

#include "qlb/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace qlb {

namespace {

constexpr cplx kI{0.0, 1.0};

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::array<double, 3> site_position(const Grid &grid, std::size_t site, double dx) {
    const auto c = grid.coords(site);
    return {static_cast<double>(c[0]) * dx, static_cast<double>(c[1]) * dx,
            static_cast<double>(c[2]) * dx};
}

// cos(theta) and sin(theta)/theta from theta^2. Below theta = 0.1 the
// truncated series is exact to rounding (first omitted term < 3e-17).
struct CosSinc {
    double c, sinc;
};

CosSinc cos_sinc(double theta2) {
    if (theta2 < 0.01) {
        const double t = theta2;
        return {1.0 + t * (-1.0 / 2 + t * (1.0 / 24 + t * (-1.0 / 720 + t * (1.0 / 40320)))),
                1.0 + t * (-1.0 / 6 + t * (1.0 / 120 + t * (-1.0 / 5040 + t * (1.0 / 362880))))};
    }
    const double theta = std::sqrt(theta2);
    return {std::cos(theta), std::sin(theta) / theta};
}

// A signed permutation, (M v)_r = sign_r v_{col_r}. The Dirac-Pauli beta and
// Sigma have this form, which lets the NJL sweep skip the general sparse rows.
struct SignedPermutation {
    std::array<std::size_t, 4> col{};
    std::array<double, 4> sign{};

    cplx row(int r, const Spinor &v) const {
        const auto i = static_cast<std::size_t>(r);
        const cplx &x = v[col[i]];
        return {sign[i] * x.real(), sign[i] * x.imag()};
    }
};

std::optional<SignedPermutation> signed_permutation_of(const Complex4x4 &m) {
    SignedPermutation out;
    for (int r = 0; r < 4; ++r) {
        int count = 0;
        for (int c = 0; c < 4; ++c) {
            const cplx e = m(r, c);
            if (e == cplx{0.0, 0.0}) continue;
            if (++count > 1 || (e != cplx{1.0, 0.0} && e != cplx{-1.0, 0.0})) return std::nullopt;
            out.col[static_cast<std::size_t>(r)] = static_cast<std::size_t>(c);
            out.sign[static_cast<std::size_t>(r)] = e.real();
        }
        if (count == 0) return std::nullopt;
    }
    return out;
}

// exp(M) psi with M = -i a beta - b Sigma, applied without forming the matrix:
// M^2 = -theta^2 I gives cos(theta) psi + sinc(theta) M psi. Densities come from
// the same beta psi and Sigma psi products, frozen at the value before the update.
// Returns false if any density is non-finite.
template <class Rows>
bool njl_sweep(const Rows &beta_rows, const Rows &sigma_rows, double mass, double coupling,
               double dt, std::span<Spinor> data, int workers) {
    // Private copies keep the kernels in registers rather than reloading them
    // after every store through the shared data pointer.
    const Rows beta = beta_rows;
    const Rows sigma = sigma_rows;
    const long sites = static_cast<long>(data.size());
    bool finite = true;
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1) reduction(&& : finite) \
    firstprivate(beta, sigma, mass, coupling, dt)
    for (long s = 0; s < sites; ++s) {
        Spinor &psi = data[static_cast<std::size_t>(s)];
        Spinor bpsi, spsi;
        double rho_s = 0.0, rho_a = 0.0;
        for (int r = 0; r < 4; ++r) {
            const auto i = static_cast<std::size_t>(r);
            bpsi[i] = beta.row(r, psi);
            spsi[i] = sigma.row(r, psi);
            rho_s += psi[i].real() * bpsi[i].real() + psi[i].imag() * bpsi[i].imag();
            // Re(i conj(psi) . Sigma psi) = -Im(conj(psi) . Sigma psi)
            rho_a -= psi[i].real() * spsi[i].imag() - psi[i].imag() * spsi[i].real();
        }
        if (!std::isfinite(rho_s) || !std::isfinite(rho_a)) {
            finite = false;
            continue;
        }
        const double a = (mass - coupling * rho_s) * dt;
        const double b = coupling * rho_a * dt;
        const auto [c, sinc] = cos_sinc(a * a + b * b);
        const double sa = sinc * a, sb = sinc * b;
        for (std::size_t i = 0; i < 4; ++i) {
            // c psi - i sa (beta psi) - sb (Sigma psi)
            const double re = c * psi[i].real() + sa * bpsi[i].imag() - sb * spsi[i].real();
            const double im = c * psi[i].imag() - sa * bpsi[i].real() - sb * spsi[i].imag();
            psi[i] = {re, im};
        }
    }
    return finite;
}

void njl_collide(const DiracSet &set, const NjlModel &model, double dt, std::span<Spinor> data,
                 int workers) {
    const auto beta = signed_permutation_of(set.beta);
    const auto sigma = signed_permutation_of(set.sigma);
    const bool finite =
        beta && sigma
            ? njl_sweep(*beta, *sigma, model.mass, model.coupling, dt, data, workers)
            : njl_sweep(detail::SiteKernel(set.beta), detail::SiteKernel(set.sigma), model.mass,
                        model.coupling, dt, data, workers);
    if (!finite) throw NumericalError("NJL collision: non-finite scalar or axial density");
}

bool clifford_generators(const DiracSet &set) {
    std::array<const Complex4x4 *, 4> gens{&set.beta, &set.alpha[0], &set.alpha[1], &set.alpha[2]};
    const Complex4x4 two_id = Complex4x4::identity() * 2.0;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i; j < gens.size(); ++j) {
            const Complex4x4 expected = i == j ? two_id : Complex4x4{};
            if (max_abs_diff(anticommutator(*gens[i], *gens[j]), expected) > kRotationTol) return false;
        }
    return true;
}

// With beta and alpha_a anticommuting, K = -i dt (m beta - e alpha.A) squares to
// -theta^2 I, so exp(-dt M) psi = exp(-i e V dt) (cos(theta) psi + sinc(theta) K psi).
void em_collide(const DiracSet &set, const EmModel &model, double dt, double t,
                const std::vector<std::array<double, 3>> &positions, std::span<Spinor> data) {
    if (!model.potential) throw std::invalid_argument("EM model has no potential");
    if (!clifford_generators(set)) {
        for (std::size_t s = 0; s < data.size(); ++s) {
            const EmPotentialSample p = model.potential(s, positions[s], t);
            data[s] = matvec(collision_matrix_em(set, model.mass, model.charge, p.vector_potential,
                                                p.scalar_potential, dt),
                            data[s]);
        }
        return;
    }
    const detail::SiteKernel beta(set.beta);
    const std::array<detail::SiteKernel, 3> alpha{detail::SiteKernel(set.alpha[0]),
                                                  detail::SiteKernel(set.alpha[1]),
                                                  detail::SiteKernel(set.alpha[2])};
    for (std::size_t s = 0; s < data.size(); ++s) {
        const EmPotentialSample p = model.potential(s, positions[s], t);
        const std::array<double, 3> ea{model.charge * p.vector_potential[0],
                                       model.charge * p.vector_potential[1],
                                       model.charge * p.vector_potential[2]};
        Spinor &psi = data[s];
        Spinor h;  // (m beta - e alpha.A) psi
        for (int r = 0; r < 4; ++r) {
            cplx acc = model.mass * beta.row(r, psi);
            for (std::size_t a = 0; a < 3; ++a)
                if (ea[a] != 0.0) acc -= ea[a] * alpha[a].row(r, psi);
            h[static_cast<std::size_t>(r)] = acc;
        }
        const double theta2 = dt * dt * (model.mass * model.mass + ea[0] * ea[0] + ea[1] * ea[1] + ea[2] * ea[2]);
        const auto [c, sinc] = cos_sinc(theta2);
        const double sd = sinc * dt;
        for (std::size_t i = 0; i < 4; ++i)  // c psi - i sd h
            psi[i] = {c * psi[i].real() + sd * h[i].imag(), c * psi[i].imag() - sd * h[i].real()};
        if (p.scalar_potential != 0.0) {
            const cplx phase = std::polar(1.0, -model.charge * p.scalar_potential * dt);
            for (cplx &v : psi) v *= phase;
        }
    }
}

std::vector<std::array<double, 3>> all_positions(const Grid &grid, double dx) {
    std::vector<std::array<double, 3>> out(grid.sites());
    for (std::size_t s = 0; s < grid.sites(); ++s) out[s] = site_position(grid, s, dx);
    return out;
}

} // namespace

PotentialFn uniform_scalar_potential(double v) {
    return [v](std::size_t, const std::array<double, 3> &, double) {
        return EmPotentialSample{{0.0, 0.0, 0.0}, v};
    };
}

PotentialFn constant_vector_potential(std::array<double, 3> a) {
    return [a](std::size_t, const std::array<double, 3> &, double) { return EmPotentialSample{a, 0.0}; };
}

PotentialFn plane_wave_vector_potential(double amplitude, Axis polarization, Axis direction,
                                        double k, double omega) {
    return [=](std::size_t, const std::array<double, 3> &x, double t) {
        EmPotentialSample p;
        p.vector_potential[static_cast<std::size_t>(polarization)] =
            amplitude * std::cos(k * x[static_cast<std::size_t>(direction)] - omega * t);
        return p;
    };
}

PotentialFn sampled_potential(std::vector<EmPotentialSample> samples) {
    return [samples = std::move(samples)](std::size_t site, const std::array<double, 3> &, double) {
        if (site >= samples.size()) throw std::out_of_range("sampled potential: site out of range");
        return samples[site];
    };
}

StepPlan StepPlan::for_grid(const Grid &grid, int workers) {
    return StepPlan{grid.active_axes(), workers};
}

void StepPlan::validate(const Grid &grid) const {
    std::vector<Axis> sorted = axis_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != grid.active_axes())
        throw std::invalid_argument("step plan must list every active axis exactly once");
    if (workers < 1) throw std::invalid_argument("step plan needs at least one worker");
}

SpinorField stream_axis(const SpinorField &field, const DiracSet &set, Axis axis,
                        ShiftPattern pattern) {
    if (!field.grid().active(axis)) {
        std::ostringstream msg;
        msg << "stream_axis: axis " << axis_name(axis) << " is not active in this grid";
        throw std::invalid_argument(msg.str());
    }
    // S_a is its own inverse.
    const detail::SiteKernel s(rotation(set, axis));
    SpinorField out(field.grid(), field.dt());
    detail::shift_and_apply(field.grid(), axis, pattern, &s, &s, field.data(), out.data(), 1);
    return out;
}

SpinorField collide(const SpinorField &field, const DiracSet &set, const CollisionModel &model,
                    double t) {
    SpinorField out = field;
    const double dt = field.dt();
    std::visit(overloaded{
                   [&](const FreeModel &m) {
                       detail::apply_uniform(collision_matrix_free(set, m.mass, dt), out.data(),
                                             out.data(), 1);
                   },
                   [&](const EmModel &m) {
                       em_collide(set, m, dt, t, all_positions(field.grid(), field.dx()), out.data());
                   },
                   [&](const NjlModel &m) { njl_collide(set, m, dt, out.data(), 1); },
               },
               model);
    return out;
}

SpinorField qlb_step(const SpinorField &field, const DiracSet &set, const CollisionModel &model,
                     const StepPlan &plan, double t) {
    Propagator prop(set, model, plan, field.grid(), field.dt());
    SpinorField out = field;
    prop.step(out, t);
    return out;
}

SpinorField evolve(SpinorField field, const DiracSet &set, const CollisionModel &model,
                   const StepPlan &plan, std::size_t n_steps, const Observer &observer,
                   std::size_t cadence) {
    if (cadence == 0) throw std::invalid_argument("observer cadence must be at least 1");
    if (observer) observer(0, field);
    if (n_steps == 0) return field;
    Propagator prop(set, model, plan, field.grid(), field.dt());
    for (std::size_t n = 0; n < n_steps; ++n) {
        prop.step(field, static_cast<double>(n) * field.dt());
        const std::size_t done = n + 1;
        if (observer && (done % cadence == 0 || done == n_steps)) observer(done, field);
    }
    return field;
}

Propagator::Propagator(const DiracSet &set, CollisionModel model, StepPlan plan, const Grid &grid,
                       double dt)
    : set_(set), model_(std::move(model)), plan_(std::move(plan)), grid_(grid), dt_(dt),
      scratch_(grid.sites()) {
    plan_.validate(grid_);
    if (!(dt_ > 0.0)) throw std::invalid_argument("time step must be positive");

    const auto &axes = plan_.axis_order;
    kernels_.emplace_back(rotation(set_, axes.front()));
    for (std::size_t i = 0; i + 1 < axes.size(); ++i)
        kernels_.emplace_back(rotation(set_, axes[i + 1]) * rotation(set_, axes[i]));

    const Complex4x4 &last = rotation(set_, axes.back());
    if (const auto *free = std::get_if<FreeModel>(&model_)) {
        kernels_.emplace_back(collision_matrix_free(set_, free->mass, dt_) * last);
        uniform_collision_fused_ = true;
    } else {
        kernels_.emplace_back(last);
    }
    if (const auto *em = std::get_if<EmModel>(&model_)) {
        if (!em->potential) throw std::invalid_argument("EM model has no potential");
        positions_ = all_positions(grid_, dt_);
    }
}

void Propagator::step(SpinorField &field, double t) {
    if (!(field.grid() == grid_) || field.dt() != dt_)
        throw std::invalid_argument("propagator was built for a different grid or time step");
    const int workers = plan_.workers;
    bool in_scratch = false;
    for (std::size_t i = 0; i < plan_.axis_order.size(); ++i) {
        const Axis axis = plan_.axis_order[i];
        const detail::SiteKernel *pre = i == 0 ? &kernels_[0] : nullptr;
        const detail::SiteKernel *post = &kernels_[i + 1];
        if (in_scratch)
            detail::shift_and_apply(grid_, axis, ShiftPattern::forward, pre, post, scratch_,
                                    field.data(), workers);
        else
            detail::shift_and_apply(grid_, axis, ShiftPattern::forward, pre, post, field.data(),
                                    scratch_, workers);
        in_scratch = !in_scratch;
    }
    if (in_scratch) field.swap_storage(scratch_);
    if (!uniform_collision_fused_) collide_in_place(field, t);
}

void Propagator::collide_in_place(SpinorField &field, double t) const {
    if (const auto *njl = std::get_if<NjlModel>(&model_))
        njl_collide(set_, *njl, dt_, field.data(), plan_.workers);
    else if (const auto *em = std::get_if<EmModel>(&model_))
        em_collide(set_, *em, dt_, t, positions_, field.data());
}

} // namespace qlb
