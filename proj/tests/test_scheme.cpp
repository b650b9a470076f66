#include "helpers.hpp"

#include "qlb/error.hpp"
#include "qlb/oracle.hpp"
#include "qlb/physics.hpp"
#include "qlb/scheme.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace qlb;
using qlb::test::max_abs_diff;
using qlb::test::random_field;

namespace {

const cplx I{0.0, 1.0};

/// ψ(z) = u e^{ikz} with α_z u = +u.
SpinorField right_moving_wave(const Grid &g, double k) {
    const Spinor u{1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0), 0.0};
    SpinorField f(g, 1.0);
    for (std::size_t z = 0; z < g.sites(); ++z) {
        const cplx phase = std::exp(I * k * static_cast<double>(z));
        for (std::size_t i = 0; i < 4; ++i) f.at(z)[i] = u[i] * phase / std::sqrt(double(g.sites()));
    }
    return f;
}

} // namespace

TEST_CASE("stream_axis advances a massless right-mover by one site") {
    const DiracSet set = build_dirac_set();
    const Grid g = Grid::line(16);
    const double k = 2 * std::numbers::pi * 3 / 16;
    const SpinorField f = right_moving_wave(g, k);
    const SpinorField s = stream_axis(f, set, Axis::z);
    for (std::size_t z = 0; z < 16; ++z)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(s.at(z)[i] - std::exp(-I * k) * f.at(z)[i]) <= 1e-15);
}

TEST_CASE("rotated left-movers shift rigidly") {
    const DiracSet set = build_dirac_set();
    const Grid g = Grid::line(10);
    SpinorField rotated(g, 1.0);
    rotated.at(4) = {0.0, 0.0, 0.6, 0.8 * I};
    const SpinorField f = apply_site_matrix(rotated, set.rot[2]);
    const SpinorField out = apply_site_matrix(stream_axis(f, set, Axis::z), set.rot[2]);
    for (std::size_t z = 0; z < 10; ++z) {
        const Spinor expect = z == 3 ? rotated.at(4) : Spinor{};
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.at(z)[i] - expect[i]) <= 1e-15);
    }
}

TEST_CASE("reverse streaming undoes forward streaming") {
    const DiracSet set = build_dirac_set();
    const SpinorField f = random_field(Grid({5, 1, 1}), 1);
    const SpinorField back = stream_axis(stream_axis(f, set, Axis::x, ShiftPattern::forward), set,
                                         Axis::x, ShiftPattern::reverse);
    CHECK(max_abs_diff(back, f) <= 1e-15);
    CHECK_THROWS_AS(stream_axis(f, set, Axis::z), std::invalid_argument);
}

TEST_CASE("collide") {
    const DiracSet set = build_dirac_set();
    const SpinorField f = random_field(Grid::line(8), 2);
    CHECK(collide(f, set, FreeModel{0.0}, 0.0) == f);

    SUBCASE("NJL single site") {
        SpinorField one(Grid::line(2), 1.0);
        one.at(0) = {0.8, 0.0, 0.0, 0.6};
        const double rho = std::norm(0.8) - std::norm(0.6);
        const SpinorField out = collide(one, set, NjlModel{0.0, 1.0}, 0.0);
        const Spinor expect = matvec(collision_matrix_njl(set, 0.0, 1.0, rho, 0.0, 1.0), one.at(0));
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.at(0)[i] - expect[i]) <= 1e-16);
    }

    SUBCASE("NJL keeps the symmetric initial condition axial-free") {
        WavepacketSpec spec;
        const Grid g = Grid::line(1024);
        const SpinorField ic = init_gaussian(g, set, spec);
        const SpinorField out = collide(ic, set, NjlModel{0.0, 2.0}, 0.0);
        for (double r : rho_a(ic, set)) REQUIRE(std::abs(r) <= 1e-10);
        for (double r : rho_a(out, set)) REQUIRE(std::abs(r) <= 1e-10);
    }

    SUBCASE("non-finite densities are an error") {
        SpinorField bad = f;
        bad.at(3)[0] = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(collide(bad, set, NjlModel{0.0, 1.0}, 0.0), NumericalError);
    }

    SUBCASE("EM with a site-dependent potential") {
        const PotentialFn pot = plane_wave_vector_potential(0.3, Axis::x, Axis::z, 0.5, 0.1);
        const EmModel em{0.2, 1.0, pot};
        const SpinorField out = collide(f, set, em, 2.0);
        for (std::size_t s = 0; s < 8; ++s) {
            const double ax = 0.3 * std::cos(0.5 * double(s) - 0.1 * 2.0);
            const Spinor expect =
                matvec(collision_matrix_em(set, 0.2, 1.0, {ax, 0.0, 0.0}, 0.0, 1.0), f.at(s));
            for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.at(s)[i] - expect[i]) <= 1e-15);
        }
        CHECK(std::abs(out.norm2() - f.norm2()) <= 1e-12 * f.norm2());
    }

    SUBCASE("EM with every potential component, small and large phases") {
        for (double scale : {1e-3, 0.05, 1.0, 3.0}) {
            const std::array<double, 3> a{0.3 * scale, -0.2 * scale, 0.5 * scale};
            const double v = 0.7 * scale;
            const SpinorField out = collide(
                f, set, EmModel{0.4 * scale, 1.3, [&](std::size_t, const auto &, double) {
                                    return EmPotentialSample{a, v};
                                }},
                0.0);
            const Complex4x4 u = expm_antihermitian(
                -(I * 0.4 * scale * set.beta + Complex4x4::identity() * (I * 1.3 * v) -
                  I * 1.3 * a[0] * set.alpha[0] - I * 1.3 * a[1] * set.alpha[1] -
                  I * 1.3 * a[2] * set.alpha[2]));
            for (std::size_t s = 0; s < 8; ++s) {
                const Spinor expect = matvec(u, f.at(s));
                for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.at(s)[i] - expect[i]) <= 1e-14);
            }
        }
    }

    SUBCASE("NJL across the series cutoff") {
        for (double g : {1e-3, 0.5, 3.0, 40.0}) {
            const SpinorField out = collide(f, set, NjlModel{0.05, g}, 0.0);
            const auto rs = rho_s(f, set);
            const auto ra = rho_a(f, set);
            for (std::size_t s = 0; s < 8; ++s) {
                const Spinor expect =
                    matvec(collision_matrix_njl(set, 0.05, g, rs[s], ra[s], 1.0), f.at(s));
                for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out.at(s)[i] - expect[i]) <= 1e-15);
            }
        }
    }

    SUBCASE("rotated and non-Clifford sets take the general route") {
        // W beta W^dagger etc. still anticommute but are no longer signed permutations.
        Complex4x4 h;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) h(r, c) = cplx(0.1 * (r + 1) * (c - 2), 0.07 * (r - c));
        const Complex4x4 w = expm_antihermitian(h - h.adjoint());
        DiracSet rotated = set;
        rotated.beta = w * set.beta * w.adjoint();
        rotated.sigma = w * set.sigma * w.adjoint();
        for (auto &al : rotated.alpha) al = w * al * w.adjoint();
        const auto rs = rho_s(f, rotated);
        const auto ra = rho_a(f, rotated);
        const SpinorField njl = collide(f, rotated, NjlModel{0.05, 2.0}, 0.0);
        const SpinorField em = collide(f, rotated, EmModel{0.2, 1.0, constant_vector_potential({0.1, 0.2, 0.3})}, 0.0);
        DiracSet skewed = set;
        skewed.beta(0, 0) = 1.01;
        const SpinorField em_skewed =
            collide(f, skewed, EmModel{0.2, 1.0, constant_vector_potential({0.1, 0.2, 0.3})}, 0.0);
        for (std::size_t s = 0; s < 8; ++s) {
            const Spinor e_njl = matvec(collision_matrix_njl(rotated, 0.05, 2.0, rs[s], ra[s], 1.0), f.at(s));
            const Spinor e_em = matvec(collision_matrix_em(rotated, 0.2, 1.0, {0.1, 0.2, 0.3}, 0.0, 1.0), f.at(s));
            const Spinor e_skew = matvec(collision_matrix_em(skewed, 0.2, 1.0, {0.1, 0.2, 0.3}, 0.0, 1.0), f.at(s));
            for (std::size_t i = 0; i < 4; ++i) {
                CHECK(std::abs(njl.at(s)[i] - e_njl[i]) <= 1e-14);
                CHECK(std::abs(em.at(s)[i] - e_em[i]) <= 1e-14);
                CHECK(em_skewed.at(s)[i] == e_skew[i]);
            }
        }
    }
}

TEST_CASE("built-in potentials") {
    const std::array<double, 3> x{1.0, 2.0, 3.0};
    CHECK(uniform_scalar_potential(0.4)(0, x, 0.0).scalar_potential == 0.4);
    CHECK(constant_vector_potential({0.1, 0.2, 0.3})(5, x, 9.0).vector_potential[1] == 0.2);
    const auto pw = plane_wave_vector_potential(2.0, Axis::y, Axis::z, 0.5, 1.0)(0, x, 1.5);
    CHECK(pw.vector_potential[1] == doctest::Approx(2.0 * std::cos(1.5 - 1.5)));
    CHECK(pw.vector_potential[0] == 0.0);
    const auto sampled = sampled_potential({{{0.0, 0.0, 0.1}, 0.2}, {{0.0, 0.0, 0.3}, 0.4}});
    CHECK(sampled(1, x, 0.0).scalar_potential == 0.4);
    CHECK_THROWS_AS(sampled(2, x, 0.0), std::out_of_range);
}

TEST_CASE("qlb_step equals stream then collide") {
    const DiracSet set = build_dirac_set();
    const Grid g({4, 3, 5});
    const SpinorField f = random_field(g, 3);
    const StepPlan plan = StepPlan::for_grid(g);
    for (const CollisionModel &model :
         {CollisionModel{FreeModel{0.3}}, CollisionModel{NjlModel{0.1, 1.5}},
          CollisionModel{EmModel{0.2, 1.0, constant_vector_potential({0.1, 0.0, -0.2})}}}) {
        SpinorField ref = f;
        for (Axis a : plan.axis_order) ref = stream_axis(ref, set, a);
        ref = collide(ref, set, model, 0.0);
        CHECK(max_abs_diff(qlb_step(f, set, model, plan, 0.0), ref) <= 1e-14);
    }
}

TEST_CASE("qlb_step translates massless right-movers rigidly") {
    const DiracSet set = build_dirac_set();
    const Grid g = Grid::line(32);
    SpinorField rotated(g, 1.0);
    for (std::size_t z = 5; z < 12; ++z) rotated.at(z) = {0.1 * double(z), I * 0.05, 0.0, 0.0};
    SpinorField f = apply_site_matrix(rotated, set.rot[2]);
    const StepPlan plan = StepPlan::for_grid(g);
    for (int n = 0; n < 7; ++n) f = qlb_step(f, set, FreeModel{0.0}, plan, n);
    const SpinorField back = apply_site_matrix(f, set.rot[2]);
    for (std::size_t z = 0; z < 32; ++z)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(back.at(z)[i] - rotated.at((z + 32 - 7) % 32)[i]) <= 1e-14);
}

TEST_CASE("qlb_step matches the dense oracle over five steps") {
    const DiracSet set = build_dirac_set();
    const Grid g = Grid::line(8);
    const FreeModel model{0.3};
    const auto op = oracle::dense_split_step(g, set, model, {Axis::z}, 0.0, 1.0);
    SpinorField f = random_field(g, 4);
    oracle::DenseVector v = oracle::flatten(f);
    for (int n = 0; n < 5; ++n) {
        f = qlb_step(f, set, model, StepPlan::for_grid(g), n);
        v = op * v;
    }
    CHECK(max_abs_diff(f, oracle::unflatten(v, g, 1.0)) <= 1e-12);
}

TEST_CASE("norm is conserved for any time step") {
    const DiracSet set = build_dirac_set();
    for (double dt : {0.1, 0.7, 1.0, 2.5}) {
        const Grid g = Grid::line(64);
        const SpinorField f = random_field(g, 5, dt);
        const double n0 = f.norm2();
        const SpinorField out = evolve(f, set, NjlModel{0.3, 2.0}, StepPlan::for_grid(g), 100);
        CHECK(std::abs(out.norm2() - n0) <= 1e-12 * n0);
    }
}

TEST_CASE("evolve") {
    const DiracSet set = build_dirac_set();
    const Grid g = Grid::line(24);
    const SpinorField f = random_field(g, 6);
    const StepPlan plan = StepPlan::for_grid(g);
    CHECK(evolve(f, set, FreeModel{0.4}, plan, 0) == f);

    SUBCASE("periodic massless field returns after one lap") {
        const SpinorField lap = evolve(f, set, FreeModel{0.0}, plan, 24);
        CHECK(max_abs_diff(lap, f) <= 1e-13);
    }

    SUBCASE("observer cadence") {
        std::vector<std::size_t> seen;
        evolve(f, set, FreeModel{0.4}, plan, 25,
               [&](std::size_t step, const SpinorField &) { seen.push_back(step); }, 10);
        CHECK(seen == std::vector<std::size_t>{0, 10, 20, 25});
        CHECK_THROWS_AS(evolve(f, set, FreeModel{0.4}, plan, 5, {}, 0), std::invalid_argument);
    }
}

TEST_CASE("step plans") {
    const Grid g({4, 1, 4});
    CHECK(StepPlan::for_grid(g).axis_order == std::vector<Axis>{Axis::x, Axis::z});
    const StepPlan reordered{{Axis::z, Axis::x}, 1};
    const StepPlan missing{{Axis::x}, 1};
    const StepPlan inactive{{Axis::x, Axis::y}, 1};
    const StepPlan idle{{Axis::x, Axis::z}, 0};
    CHECK_NOTHROW(reordered.validate(g));
    CHECK_THROWS_AS(missing.validate(g), std::invalid_argument);
    CHECK_THROWS_AS(inactive.validate(g), std::invalid_argument);
    CHECK_THROWS_AS(idle.validate(g), std::invalid_argument);

    const DiracSet set = build_dirac_set();
    const SpinorField f = random_field(g, 7);
    const SpinorField xz = qlb_step(f, set, FreeModel{0.5}, StepPlan::for_grid(g), 0.0);
    const SpinorField zx = qlb_step(f, set, FreeModel{0.5}, reordered, 0.0);
    CHECK(max_abs_diff(xz, zx) > 1e-6);
}

TEST_CASE("propagator output does not depend on the worker count") {
    const DiracSet set = build_dirac_set();
    const Grid g({8, 6, 5});
    const SpinorField f = random_field(g, 8);
    for (const CollisionModel &model : {CollisionModel{FreeModel{0.2}}, CollisionModel{NjlModel{0.0, 1.0}}}) {
        StepPlan one = StepPlan::for_grid(g, 1);
        StepPlan three = StepPlan::for_grid(g, 3);
        CHECK(evolve(f, set, model, one, 10) == evolve(f, set, model, three, 10));
    }
}

TEST_CASE("propagator rejects a mismatched field") {
    const DiracSet set = build_dirac_set();
    Propagator prop(set, FreeModel{0.1}, StepPlan::for_grid(Grid::line(8)), Grid::line(8), 1.0);
    SpinorField other(Grid::line(9), 1.0);
    CHECK_THROWS_AS(prop.step(other, 0.0), std::invalid_argument);
    SpinorField wrong_dt(Grid::line(8), 0.5);
    CHECK_THROWS_AS(prop.step(wrong_dt, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Propagator(set, EmModel{0.1, 1.0, {}}, StepPlan::for_grid(Grid::line(8)),
                               Grid::line(8), 1.0),
                    std::invalid_argument);
}
