#pragma once

#include "qlb/algebra.hpp"
#include "qlb/lattice.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace qlb {

/// Gaussian minimum-uncertainty packet. Lengths are in lattice units.
struct WavepacketSpec {
    double k = 0.006;
    double sigma = 48.0;
    double c_u = 1.177;
    double c_d = 0.784;
    /// Packet centre as a site coordinate along `axis`; negative means the middle of the line.
    double center = -1.0;
    Axis axis = Axis::z;

    /// c_u / c_d, or nullopt when c_d = 0.
    std::optional<double> asymmetry() const;
};

/// Resolved centre site coordinate (the middle of the line when spec.center < 0).
double packet_center(const Grid &grid, const WavepacketSpec &spec);

/// Builds S_y [-C_u e + C_d ē, C_u e - C_d ē, C_u e + C_d ē, C_u e + C_d ē] G(z)
/// with e = exp(ikz), G the normalized Gaussian envelope, z measured from the
/// centre along spec.axis. With `normalize` the discrete norm is rescaled to 1.
/// Throws std::invalid_argument if centre ± 5σ leaves the line.
SpinorField init_gaussian(const Grid &grid, const DiracSet &set, const WavepacketSpec &spec,
                          bool normalize = true, double dt = 1.0);

enum class Branch { particle, antiparticle };
Branch parse_branch(std::string_view name);

/// Positive (particle) or negative (antiparticle) energy eigenstate of the continuum
/// free Hamiltonian k α_axis + m β, times exp(i k x), normalized to 1.
/// k is a physical wavenumber; it must fit an integer number of wavelengths in the box.
SpinorField plane_wave(const Grid &grid, const DiracSet &set, double k, double mass, Branch branch,
                       Axis axis, double dt = 1.0);

/// Unit eigen-spinor of k α_axis + m β with eigenvalue +E (particle) or -E (antiparticle).
Spinor free_spinor(const DiracSet &set, double k, double mass, Branch branch, Axis axis);

std::vector<double> density(const SpinorField &field);
std::vector<double> rho_s(const SpinorField &field, const DiracSet &set);
std::vector<double> rho_a(const SpinorField &field, const DiracSet &set);

/// Right- and left-mover densities along `axis`: |(S_a ψ)_{1,2}|² and |(S_a ψ)_{3,4}|².
struct BranchDensities {
    std::vector<double> right;
    std::vector<double> left;
};
BranchDensities branch_densities(const SpinorField &field, const DiracSet &set, Axis axis);

/// Coordinate of every site along `axis` relative to `center`, in physical units.
std::vector<double> axis_coordinates(const Grid &grid, Axis axis, double center, double dx);

struct CentroidPair {
    std::optional<double> left;
    std::optional<double> right;
};

/// Centroids of a density profile on the two half-lines either side of `split`.
/// A site exactly at the split contributes half its weight to each side. A side
/// holding less than 1e-8 total density has no centroid.
CentroidPair centroids(std::span<const double> profile, std::span<const double> coordinates,
                       double split = 0.0);

/// Centroids of the right- and left-mover branch densities over the whole line.
CentroidPair mover_centroids(const SpinorField &field, const DiracSet &set, Axis axis,
                             double center);

/// k / sqrt(k² + m²). Throws std::invalid_argument when both are zero.
double theory_group_velocity(double k, double dynamic_mass);

struct ObservableRecord {
    std::size_t step = 0;
    double time = 0.0;
    double norm2 = 0.0;
    std::vector<double> density;
    std::vector<double> rho_s;
    std::vector<double> rho_a;
    /// Half-line density centroids relative to the initial centre.
    CentroidPair half_line;
    /// Branch-resolved (light-cone) centroids relative to the initial centre.
    CentroidPair movers;
    /// Running transport velocity; unset until three records exist.
    std::optional<double> v_mean;
};

ObservableRecord observe(const SpinorField &field, const DiracSet &set, std::size_t step,
                         Axis axis, double center);

/// Least-squares slope of the right-mover centroid against time over the records
/// whose step lies in [first_step, last_step]. Needs at least three distinct times.
double measured_mean_velocity(std::span<const ObservableRecord> series, std::size_t first_step,
                              std::size_t last_step);

/// Ordinary least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

} // namespace qlb
