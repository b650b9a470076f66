#include "qlb/algebra.hpp"
#include "qlb/error.hpp"
#include "qlb/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qlb;

namespace {

const cplx I{0.0, 1.0};

Complex4x4 random_antihermitian(std::mt19937_64 &rng, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Complex4x4 h;
    for (int r = 0; r < 4; ++r)
        for (int c = r; c < 4; ++c) {
            const cplx v = r == c ? cplx(normal(rng), 0.0) : cplx(normal(rng), normal(rng));
            h(r, c) = v;
            h(c, r) = std::conj(v);
        }
    return I * h;
}

} // namespace

TEST_CASE("Dirac-Pauli matrices") {
    const DiracSet set = build_dirac_set();
    CHECK(set.beta == Complex4x4::diagonal(1.0, 1.0, -1.0, -1.0));
    CHECK(max_abs(anticommutator(set.alpha[0], set.beta)) == 0.0);

    for (std::size_t a = 0; a < 3; ++a) {
        CHECK(set.alpha[a] * set.alpha[a] == Complex4x4::identity());
        CHECK(max_abs(anticommutator(set.alpha[a], set.beta)) == 0.0);
        for (std::size_t b = 0; b < 3; ++b) {
            const Complex4x4 expect = a == b ? Complex4x4::identity() * 2.0 : Complex4x4{};
            CHECK(anticommutator(set.alpha[a], set.alpha[b]) == expect);
        }
    }
    CHECK(set.beta * set.beta == Complex4x4::identity());
}

TEST_CASE("gamma5 has unit off-diagonal blocks") {
    const DiracSet set = build_dirac_set();
    Complex4x4 expect;
    expect(0, 2) = expect(1, 3) = expect(2, 0) = expect(3, 1) = 1.0;
    CHECK(max_abs_diff(set.gamma5, expect) <= 1e-15);

    // Independent chain: i g0 g1 g2 g3 multiplied entry by entry.
    Complex4x4 chain = Complex4x4::identity() * I;
    const Complex4x4 g[4] = {set.beta, set.beta * set.alpha[0], set.beta * set.alpha[1],
                             set.beta * set.alpha[2]};
    for (const auto &gm : g) {
        Complex4x4 next;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                for (int k = 0; k < 4; ++k) next(r, c) += chain(r, k) * gm(k, c);
        chain = next;
    }
    CHECK(max_abs_diff(set.gamma5, chain) <= 1e-15);
}

TEST_CASE("sigma = beta gamma5") {
    const DiracSet set = build_dirac_set();
    CHECK(set.sigma == set.beta * set.gamma5);
    CHECK(antihermiticity_residual(set.sigma) == 0.0);
    CHECK(max_abs(anticommutator(set.beta, set.sigma)) == 0.0);
    CHECK(set.sigma * set.sigma == -Complex4x4::identity());
}

TEST_CASE("streaming rotations") {
    const DiracSet set = build_dirac_set();
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        const Complex4x4 &s = rotation(set, a);
        CAPTURE(axis_name(a));
        CHECK(max_abs_diff(s * s, Complex4x4::identity()) <= kRotationTol);
        CHECK(s == s.adjoint());
        CHECK(max_abs_diff(s.adjoint() * set.alpha_of(a) * s, set.beta) <= kRotationTol);
    }
    CHECK_THROWS_AS(rotation(set, static_cast<Axis>(7)), std::invalid_argument);
    CHECK_THROWS_AS(parse_axis("w"), std::invalid_argument);
    CHECK(parse_axis("y") == Axis::y);
}

TEST_CASE("expm_antihermitian") {
    const DiracSet set = build_dirac_set();
    CHECK(max_abs_diff(expm_antihermitian(Complex4x4{}), Complex4x4::identity()) <= 1e-15);

    const Complex4x4 mass = expm_antihermitian(-I * 0.3 * set.beta);
    CHECK(max_abs_diff(mass, collision_matrix_free(set, 0.3, 1.0)) <= 1e-13);

    std::mt19937_64 rng(42);
    for (int draw = 0; draw < 200; ++draw) {
        const Complex4x4 m = random_antihermitian(rng, 1.0);
        const Complex4x4 u = expm_antihermitian(m);
        CHECK(unitarity_residual(u) <= kUnitarityTol);
        CHECK(max_abs_diff(u, oracle::series_expm(m)) <= 1e-12);
    }

    Complex4x4 bad = set.beta;  // Hermitian, not anti-Hermitian
    CHECK_THROWS_AS(expm_antihermitian(bad), NumericalError);
}

TEST_CASE("free collision") {
    const DiracSet set = build_dirac_set();
    CHECK(collision_matrix_free(set, 0.0, 1.0) == Complex4x4::identity());
    const Complex4x4 quarter = collision_matrix_free(set, std::numbers::pi / 2, 1.0);
    CHECK(max_abs_diff(quarter, -I * set.beta) <= 1e-16);
    const Complex4x4 c = collision_matrix_free(set, 0.3, 1.0);
    CHECK(max_abs_diff(c, expm_antihermitian(-I * 0.3 * set.beta)) <= 1e-13);
    CHECK(unitarity_residual(c) <= 1e-14);
    CHECK_THROWS_AS(collision_matrix_free(set, 0.3, 0.0), std::invalid_argument);
}

TEST_CASE("NJL collision") {
    const DiracSet set = build_dirac_set();
    CHECK(collision_matrix_njl(set, 0.0, 0.0, 0.7, -0.2, 1.0) == Complex4x4::identity());

    // Pure scalar density: a mass collision with dynamic mass -g rho.
    const double rho = 0.37, dt = 0.8;
    const Complex4x4 scalar = collision_matrix_njl(set, 0.0, 1.0, rho, 0.0, dt);
    const Complex4x4 expect =
        Complex4x4::identity() * std::cos(rho * dt) + I * std::sin(rho * dt) * set.beta;
    CHECK(max_abs_diff(scalar, expect) <= 1e-15);

    const Complex4x4 gen = -I * (0.0 - 2.0 * 0.1) * set.beta - 2.0 * 0.05 * set.sigma;
    const Complex4x4 both = collision_matrix_njl(set, 0.0, 2.0, 0.1, 0.05, 1.0);
    CHECK(max_abs_diff(both, expm_antihermitian(gen)) <= 1e-12);
    CHECK(max_abs_diff(both, oracle::series_expm(gen)) <= 1e-12);
    CHECK(unitarity_residual(both) <= 1e-13);

    SUBCASE("small theta uses the series branch without loss") {
        for (double theta : {0.0, 1e-12, 1e-8, 9.9e-5, 1.01e-4}) {
            const Complex4x4 c = collision_matrix_njl(set, theta, 0.0, 0.0, 0.0, 1.0);
            CHECK(max_abs_diff(c, collision_matrix_free(set, theta, 1.0)) <= 1e-16);
        }
    }
}

TEST_CASE("EM collision") {
    const DiracSet set = build_dirac_set();
    const std::array<double, 3> a{0.2, -0.1, 0.3};
    CHECK(max_abs_diff(collision_matrix_em(set, 0.4, 0.0, a, 0.5, 1.0),
                       collision_matrix_free(set, 0.4, 1.0)) <= 1e-13);

    const double v0 = 0.25, dt = 0.5;
    const Complex4x4 phase = collision_matrix_em(set, 0.0, 1.0, {0.0, 0.0, 0.0}, v0, dt);
    CHECK(max_abs_diff(phase, Complex4x4::identity() * std::exp(-I * v0 * dt)) <= 1e-14);

    Complex4x4 m = I * 0.1 * set.beta - I * 0.2 * set.alpha[0] + Complex4x4::identity() * (I * 0.05);
    const Complex4x4 c = collision_matrix_em(set, 0.1, 1.0, {0.2, 0.0, 0.0}, 0.05, 1.0);
    CHECK(max_abs_diff(c, oracle::series_expm(-m)) <= 1e-12);
    CHECK(unitarity_residual(c) <= kUnitarityTol);
}

TEST_CASE("collision unitarity over seeded draws") {
    const DiracSet set = build_dirac_set();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int draw = 0; draw < 1000; ++draw) {
        const double dt = 0.05 + std::abs(u(rng));
        const Complex4x4 f = collision_matrix_free(set, u(rng), dt);
        const Complex4x4 n = collision_matrix_njl(set, u(rng), u(rng), u(rng), u(rng), dt);
        const Complex4x4 e = collision_matrix_em(set, u(rng), u(rng), {u(rng), u(rng), u(rng)}, u(rng), dt);
        REQUIRE(unitarity_residual(f) <= kUnitarityTol);
        REQUIRE(unitarity_residual(n) <= kUnitarityTol);
        REQUIRE(unitarity_residual(e) <= kUnitarityTol);
        REQUIRE(std::abs(std::abs(e.determinant()) - 1.0) <= 1e-12);
    }
}

TEST_CASE("Complex4x4 basics") {
    Complex4x4 m = Complex4x4::diagonal(1.0, 2.0, 3.0, 4.0);
    CHECK(m.trace() == cplx(10.0));
    CHECK(m.determinant() == cplx(24.0));
    m(0, 3) = I;
    CHECK(m.adjoint()(3, 0) == -I);
    CHECK(approx_equal(m, m + Complex4x4{} , 0.0));
    CHECK(commutator(m, Complex4x4::identity()) == Complex4x4{});
    const Spinor v{1.0, I, 0.0, 2.0};
    const Spinor w = matvec(m, v);
    CHECK(w[0] == cplx(1.0) + 2.0 * I);
    CHECK(w[3] == cplx(8.0));
    CHECK(bilinear(v, Complex4x4::identity(), v) == cplx(6.0));
}
