// Compares site-major (array of spinors) against component-major (one array per
// spinor component) storage for the 1D free step: rotate, shift, rotate with
// the collision folded in. Prints MLUPS for both.

#include "qlb/algebra.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace {

using qlb::cplx;
using qlb::Complex4x4;
using qlb::Spinor;

double site_major(const Complex4x4 &s, const Complex4x4 &cs, std::size_t n, std::size_t steps) {
    std::vector<Spinor> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = {cplx(1.0 / (1.0 + i)), 0.0, 0.5, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) b[i] = qlb::matvec(s, a[i]);
        for (std::size_t i = 0; i < n; ++i) {
            const Spinor &lo = b[i == 0 ? n - 1 : i - 1];
            const Spinor &hi = b[i + 1 == n ? 0 : i + 1];
            a[i] = qlb::matvec(cs, Spinor{lo[0], lo[1], hi[2], hi[3]});
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  (checksum %.6f)\n", std::abs(a[n / 2][0]));
    return static_cast<double>(n * steps) / secs / 1e6;
}

void matvec_soa(const Complex4x4 &m, const std::array<std::vector<cplx>, 4> &in,
                std::array<std::vector<cplx>, 4> &out, const std::array<std::size_t, 4> &src,
                std::size_t i) {
    for (int r = 0; r < 4; ++r) {
        double re = 0.0, im = 0.0;
        for (int c = 0; c < 4; ++c) {
            const cplx e = m(r, c);
            const cplx x = in[static_cast<std::size_t>(c)][src[static_cast<std::size_t>(c)]];
            re += e.real() * x.real() - e.imag() * x.imag();
            im += e.real() * x.imag() + e.imag() * x.real();
        }
        out[static_cast<std::size_t>(r)][i] = {re, im};
    }
}

double component_major(const Complex4x4 &s, const Complex4x4 &cs, std::size_t n, std::size_t steps) {
    std::array<std::vector<cplx>, 4> a, b;
    for (auto &v : a) v.assign(n, 0.0);
    for (auto &v : b) v.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[0][i] = 1.0 / (1.0 + i);
        a[2][i] = 0.5;
    }
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) matvec_soa(s, a, b, {i, i, i, i}, i);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i == 0 ? n - 1 : i - 1;
            const std::size_t hi = i + 1 == n ? 0 : i + 1;
            matvec_soa(cs, b, a, {lo, lo, hi, hi}, i);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  (checksum %.6f)\n", std::abs(a[0][n / 2]));
    return static_cast<double>(n * steps) / secs / 1e6;
}

} // namespace

int main(int argc, char **argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1024;
    const std::size_t steps = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 10000;
    const qlb::DiracSet set = qlb::build_dirac_set();
    const Complex4x4 &s = set.rotation_of(qlb::Axis::z);
    const Complex4x4 cs = qlb::collision_matrix_free(set, 0.1, 1.0) * s;

    const double aos = site_major(s, cs, n, steps);
    std::printf("site-major      %zu sites x %zu steps: %.1f MLUPS\n", n, steps, aos);
    const double soa = component_major(s, cs, n, steps);
    std::printf("component-major %zu sites x %zu steps: %.1f MLUPS\n", n, steps, soa);
    return 0;
}
