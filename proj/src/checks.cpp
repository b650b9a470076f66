#include "qlb/app.hpp"

#include "qlb/error.hpp"
#include "qlb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace qlb {

namespace {

constexpr cplx kI{0.0, 1.0};

Complex4x4 random_antihermitian(std::mt19937_64 &rng, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Complex4x4 x;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) x(r, c) = {u(rng), u(rng)};
    return (x - x.adjoint()) * (0.5 * scale);
}

} // namespace

std::vector<CheckEntry> run_checks(const DiracSet &set, std::uint64_t seed, int draws) {
    std::vector<CheckEntry> out;
    auto add = [&](std::string name, double tol, double residual) {
        out.push_back({std::move(name), tol, residual, residual <= tol});
    };
    const Complex4x4 id = Complex4x4::identity();
    const char names[3] = {'x', 'y', 'z'};

    add("beta^2 = I", 0.0, max_abs_diff(set.beta * set.beta, id));
    double alpha_sq = 0.0, alpha_anti = 0.0, alpha_beta = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        alpha_sq = std::max(alpha_sq, max_abs_diff(set.alpha[a] * set.alpha[a], id));
        alpha_beta = std::max(alpha_beta, max_abs(anticommutator(set.alpha[a], set.beta)));
        for (std::size_t b = 0; b < 3; ++b) {
            const Complex4x4 expected = a == b ? id * 2.0 : Complex4x4{};
            alpha_anti = std::max(alpha_anti, max_abs_diff(anticommutator(set.alpha[a], set.alpha[b]), expected));
        }
    }
    add("alpha_a^2 = I", 0.0, alpha_sq);
    add("{alpha_a, alpha_b} = 2 delta_ab I", 0.0, alpha_anti);
    add("{alpha_a, beta} = 0", 0.0, alpha_beta);

    const Complex4x4 g5 = kI * set.beta * (set.beta * set.alpha[0]) * (set.beta * set.alpha[1]) *
                          (set.beta * set.alpha[2]);
    add("gamma5 = i g0 g1 g2 g3", kRotationTol, max_abs_diff(set.gamma5, g5));
    add("sigma = beta gamma5", 0.0, max_abs_diff(set.sigma, set.beta * set.gamma5));
    add("sigma anti-Hermitian", 0.0, antihermiticity_residual(set.sigma));
    add("{beta, sigma} = 0", 0.0, max_abs(anticommutator(set.beta, set.sigma)));
    add("sigma^2 = -I", 0.0, max_abs_diff(set.sigma * set.sigma, -id));

    for (std::size_t a = 0; a < 3; ++a) {
        const Complex4x4 &s = set.rot[a];
        const std::string ax(1, names[a]);
        add("S_" + ax + "^dagger alpha_" + ax + " S_" + ax + " = beta", kRotationTol,
            max_abs_diff(s.adjoint() * set.alpha[a] * s, set.beta));
        add("S_" + ax + " S_" + ax + " = I", kRotationTol, max_abs_diff(s * s, id));
        add("S_" + ax + " Hermitian", kRotationTol, max_abs_diff(s, s.adjoint()));
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double unitary_free = 0.0, unitary_njl = 0.0, unitary_em = 0.0, unitary_expm = 0.0;
    double det_circle = 0.0, free_vs_series = 0.0, njl_vs_series = 0.0, em_vs_series = 0.0;
    double expm_vs_series = 0.0;
    bool em_ok = true;
    for (int i = 0; i < draws; ++i) {
        const double dt = 0.05 + 1.95 * 0.5 * (u(rng) + 1.0);
        const double mass = u(rng);
        const double g = 2.0 * u(rng);
        const double rs = u(rng);
        const double ra = u(rng);
        const double e = u(rng);
        const std::array<double, 3> a{u(rng), u(rng), u(rng)};
        const double v = u(rng);

        const Complex4x4 cf = collision_matrix_free(set, mass, dt);
        const Complex4x4 cn = collision_matrix_njl(set, mass, g, rs, ra, dt);
        Complex4x4 em_gen = kI * mass * set.beta + Complex4x4::identity() * (kI * e * v);
        for (std::size_t k = 0; k < 3; ++k) em_gen -= kI * (e * a[k]) * set.alpha[k];
        em_gen *= -dt;
        // A broken matrix set makes the EM generator non-anti-Hermitian; report, don't abort.
        Complex4x4 ce;
        try {
            ce = collision_matrix_em(set, mass, e, a, v, dt);
        } catch (const NumericalError &) {
            em_ok = false;
            continue;
        }
        const Complex4x4 gen = random_antihermitian(rng, 2.0);
        const Complex4x4 ue = expm_antihermitian(gen);

        unitary_free = std::max(unitary_free, unitarity_residual(cf));
        unitary_njl = std::max(unitary_njl, unitarity_residual(cn));
        unitary_em = std::max(unitary_em, unitarity_residual(ce));
        unitary_expm = std::max(unitary_expm, unitarity_residual(ue));
        for (const Complex4x4 *c : std::array<const Complex4x4 *, 4>{&cf, &cn, &ce, &ue})
            det_circle = std::max(det_circle, std::abs(std::abs(c->determinant()) - 1.0));

        free_vs_series = std::max(free_vs_series,
                                  max_abs_diff(cf, oracle::series_expm(-kI * (mass * dt) * set.beta)));
        const Complex4x4 njl_gen = (-kI * (mass - g * rs) * set.beta - g * ra * set.sigma) * dt;
        njl_vs_series = std::max(njl_vs_series, max_abs_diff(cn, oracle::series_expm(njl_gen)));
        expm_vs_series = std::max(expm_vs_series, max_abs_diff(ue, oracle::series_expm(gen)));
        em_vs_series = std::max(em_vs_series, max_abs_diff(ce, oracle::series_expm(em_gen)));
    }
    add("free collision unitary (seeded draws)", kUnitarityTol, unitary_free);
    add("NJL collision unitary (seeded draws)", kUnitarityTol, unitary_njl);
    const double inf = std::numeric_limits<double>::infinity();
    add("EM collision unitary (seeded draws)", kUnitarityTol, em_ok ? unitary_em : inf);
    add("expm of random anti-Hermitian unitary", kUnitarityTol, unitary_expm);
    add("|det C| = 1", kUnitarityTol, det_circle);
    add("free closed form vs series", kUnitarityTol, free_vs_series);
    add("NJL closed form vs series", kUnitarityTol, njl_vs_series);
    add("EM collision vs series", kUnitarityTol, em_ok ? em_vs_series : inf);
    add("expm vs series", kUnitarityTol, expm_vs_series);

    // Lattice: shift is an exact, invertible permutation; unitary site matrices keep the norm.
    const Grid grid({6, 5, 4});
    SpinorField f(grid, 1.0);
    std::normal_distribution<double> normal;
    for (Spinor &psi : f.data())
        for (cplx &c : psi) c = {normal(rng), normal(rng)};
    double shift_norm = 0.0, shift_inverse = 0.0;
    for (Axis axis : grid.active_axes()) {
        const SpinorField shifted = shift_components(f, axis);
        shift_norm = std::max(shift_norm, std::abs(shifted.norm2() - f.norm2()));
        const SpinorField back = shift_components(shifted, axis, ShiftPattern::reverse);
        shift_inverse = std::max(shift_inverse, back == f ? 0.0 : 1.0);
    }
    add("shift preserves norm (bitwise)", 0.0, shift_norm);
    add("shift then reverse shift is the identity (bitwise)", 0.0, shift_inverse);
    const Complex4x4 u_site = expm_antihermitian(random_antihermitian(rng, 3.0));
    const SpinorField rotated = apply_site_matrix(f, u_site);
    add("site matrix preserves norm (relative)", kUnitarityTol,
        std::abs(rotated.norm2() - f.norm2()) / f.norm2());
    return out;
}

bool cmd_check(std::ostream &out, const DiracSet &set, std::uint64_t seed, int draws) {
    bool ok = true;
    for (const CheckEntry &c : run_checks(set, seed, draws)) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4s %-52s tol %-9.1e residual %.3e\n",
                      c.passed ? "PASS" : "FAIL", c.name.c_str(), c.tolerance, c.residual);
        out << line;
        ok = ok && c.passed;
    }
    out << (ok ? "all checks passed\n" : "some checks FAILED\n");
    return ok;
}

} // namespace qlb
