#pragma once

#include "qlb/algebra.hpp"
#include "qlb/lattice.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

namespace qlb {

struct FreeModel {
    double mass = 0.0;
};

struct EmPotentialSample {
    std::array<double, 3> vector_potential{0.0, 0.0, 0.0};
    double scalar_potential = 0.0;
};

/// (A, V) at a site. Receives the site index, its physical position and the physical time.
using PotentialFn =
    std::function<EmPotentialSample(std::size_t site, const std::array<double, 3> &position, double t)>;

struct EmModel {
    double mass = 0.0;
    double charge = 0.0;
    PotentialFn potential;
};

struct NjlModel {
    double mass = 0.0;
    double coupling = 0.0;
};

using CollisionModel = std::variant<FreeModel, EmModel, NjlModel>;

PotentialFn uniform_scalar_potential(double v);
PotentialFn constant_vector_potential(std::array<double, 3> a);
/// A_pol(x, t) = amplitude cos(k x_dir - ω t), all other components zero, V = 0.
PotentialFn plane_wave_vector_potential(double amplitude, Axis polarization, Axis direction,
                                        double k, double omega);
/// Time-independent (A, V) tabulated per site.
PotentialFn sampled_potential(std::vector<EmPotentialSample> samples);

struct StepPlan {
    /// Streaming order; every active axis exactly once.
    std::vector<Axis> axis_order;
    int workers = 1;

    /// x, y, z restricted to the grid's active axes.
    static StepPlan for_grid(const Grid &grid, int workers = 1);
    /// Throws std::invalid_argument unless axis_order is a permutation of the active axes.
    void validate(const Grid &grid) const;
};

/// Rotate with S_a, apply the light-cone shift, rotate back.
SpinorField stream_axis(const SpinorField &field, const DiracSet &set, Axis axis,
                        ShiftPattern pattern = ShiftPattern::forward);

/// Per-site collision at physical time t. NJL densities are taken from the
/// field as passed in and frozen over the step.
SpinorField collide(const SpinorField &field, const DiracSet &set, const CollisionModel &model,
                    double t);

/// Stream along every axis of the plan in order, then collide.
SpinorField qlb_step(const SpinorField &field, const DiracSet &set, const CollisionModel &model,
                     const StepPlan &plan, double t);

using Observer = std::function<void(std::size_t step, const SpinorField &field)>;

/// Runs n_steps steps starting at step 0 (t = 0). The observer, when set,
/// is called with step 0, every `cadence` steps, and the final step.
SpinorField evolve(SpinorField field, const DiracSet &set, const CollisionModel &model,
                   const StepPlan &plan, std::size_t n_steps, const Observer &observer = {},
                   std::size_t cadence = 1);

/// Reusable stepper holding scratch buffers and the fused per-pass matrices.
///
/// A step runs one gather pass per axis. The first pass rotates each
/// neighbour by S_first as it is read; the pass for axis i then applies
/// S_{i+1} S_i (or, after the last axis, C S_last when the collision is
/// uniform). A free 1D step is therefore a single sweep. Per-site collisions
/// (EM, NJL) add one in-place pass.
class Propagator {
  public:
    Propagator(const DiracSet &set, CollisionModel model, StepPlan plan, const Grid &grid, double dt);

    /// Advances `field` by one step taken at physical time t.
    void step(SpinorField &field, double t);

    const StepPlan &plan() const { return plan_; }

  private:
    void collide_in_place(SpinorField &field, double t) const;

    DiracSet set_;
    CollisionModel model_;
    StepPlan plan_;
    Grid grid_;
    double dt_;

    // kernels_[0] is S_first; kernels_[i + 1] is applied after the gather along axis i.
    std::vector<detail::SiteKernel> kernels_;
    bool uniform_collision_fused_ = false;
    std::vector<Spinor> scratch_;
    std::vector<std::array<double, 3>> positions_;
};

} // namespace qlb
