#pragma once

#include "qlb/lattice.hpp"

#include <cstdint>
#include <random>

namespace qlb::test {

/// Gaussian random amplitudes, rescaled to unit norm.
inline SpinorField random_field(const Grid &grid, std::uint64_t seed, double dt = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SpinorField f(grid, dt);
    for (auto &s : f.data())
        for (auto &c : s) c = {normal(rng), normal(rng)};
    const double scale = 1.0 / std::sqrt(f.norm2());
    for (auto &s : f.data())
        for (auto &c : s) c *= scale;
    return f;
}

inline double max_abs_diff(const SpinorField &a, const SpinorField &b) {
    double worst = 0.0;
    for (std::size_t s = 0; s < a.grid().sites(); ++s)
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.at(s)[i] - b.at(s)[i]));
    return worst;
}

} // namespace qlb::test
