#pragma once

#include "qlb/algebra.hpp"
#include "qlb/lattice.hpp"
#include "qlb/physics.hpp"
#include "qlb/scheme.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qlb {

enum class ModelKind { free, em, njl };
enum class PotentialKind { none, uniform_v, constant_a, plane_wave_a, file };
enum class PacketKind { gaussian, plane_wave };

/// Everything a `run`, `bench` or `converge` invocation needs. Keys in the
/// config file are the field names below.
struct RunConfig {
    int dims = 1;
    std::size_t nx = 1;
    std::size_t ny = 1;
    std::size_t nz = 1024;
    Boundary boundary = Boundary::periodic;
    std::vector<Axis> axis_order;  // empty: x, y, z restricted to active axes
    double dt = 1.0;
    std::size_t steps = 200;
    std::size_t snapshot_cadence = 10;
    std::vector<std::size_t> profile_steps;  // empty: a profile at every snapshot

    ModelKind model = ModelKind::free;
    double m = 0.0;
    double g = 0.0;
    double e = 0.0;
    PotentialKind potential = PotentialKind::none;
    double potential_v = 0.0;
    double potential_ax = 0.0;
    double potential_ay = 0.0;
    double potential_az = 0.0;
    double potential_amplitude = 0.0;
    double potential_k = 0.0;
    double potential_omega = 0.0;
    Axis potential_polarization = Axis::x;
    Axis potential_direction = Axis::z;
    std::string potential_file;

    PacketKind packet = PacketKind::gaussian;
    double k = 0.006;
    double sigma = 48.0;
    double c_u = 1.177;
    double c_d = 0.784;
    double center = -1.0;
    Axis axis = Axis::z;
    Branch branch = Branch::particle;
    bool normalize_ic = true;

    std::size_t velocity_window_begin = 10;
    std::size_t velocity_window_end = 50;
    std::size_t levels = 4;
    double converge_time = 0.0;  // 0: one box crossing at the coarsest level

    std::string output_dir = "out";
    std::uint64_t seed = 42;
    int workers = 1;

    Grid grid() const;
    WavepacketSpec packet_spec() const;
    /// True when the extents form a valid grid in which `axis` is active.
    bool axis_extent_valid() const;
    /// Throws ConfigError on any inconsistent or non-finite setting.
    void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are rejected.
RunConfig parse_config(std::istream &in, const std::string &origin = "<config>");
RunConfig load_config(const std::filesystem::path &path);
/// Applies a single `key=value` override on top of a parsed config.
void apply_override(RunConfig &cfg, const std::string &assignment);

/// Canonical `key = value` rendering of every field, in a fixed order.
std::string render_config(const RunConfig &cfg);

/// Shortest-round-trip-safe text for a double (17 significant digits, "nan" for NaN).
std::string format_double(double v);

CollisionModel make_model(const RunConfig &cfg);
StepPlan make_plan(const RunConfig &cfg);
SpinorField make_initial_field(const RunConfig &cfg, const DiracSet &set);

/// Writes summary.csv, profile_<step>.csv and run_meta into cfg.output_dir.
/// Returns the observable series (without profiles) for callers that want it.
std::vector<ObservableRecord> cmd_run(const RunConfig &cfg, std::ostream &log);

struct BenchResult {
    std::size_t sites = 0;
    std::size_t steps = 0;
    std::size_t site_updates = 0;
    double seconds_single = 0.0;
    double mlups_single = 0.0;
    int workers = 1;
    double seconds_multi = 0.0;
    double mlups_multi = 0.0;
};
BenchResult cmd_bench(const RunConfig &cfg, std::ostream &out);

struct ConvergenceLevel {
    int level = 0;
    double dt = 0.0;
    std::size_t sites = 0;
    std::size_t steps = 0;
    double phase_error = 0.0;
    double error_per_time = 0.0;
};
struct ConvergenceResult {
    std::vector<ConvergenceLevel> levels;
    double fitted_order = 0.0;
    bool exact = false;
};
/// Free plane-wave phase-error study; cfg.k is the wavenumber and cfg.nz the
/// coarsest extent along cfg.axis, both at dt = cfg.dt.
ConvergenceResult cmd_converge(const RunConfig &cfg, std::ostream &out);

struct CheckEntry {
    std::string name;
    double tolerance = 0.0;
    double residual = 0.0;
    bool passed = false;
};
/// Algebra and lattice invariants, run against `set` (normally build_dirac_set()).
std::vector<CheckEntry> run_checks(const DiracSet &set, std::uint64_t seed = 42, int draws = 1000);
/// Prints one line per check; returns true when all pass.
bool cmd_check(std::ostream &out, const DiracSet &set, std::uint64_t seed = 42, int draws = 1000);

} // namespace qlb
