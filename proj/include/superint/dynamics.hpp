#pragma once

#include <string>
#include <vector>

#include "superint/core.hpp"
#include "superint/integrals.hpp"
#include "superint/potentials.hpp"

namespace superint {

struct Trajectory {
  std::vector<PhaseState> states;  // sampled every `stride` steps, t=0 first
  double dt = 0.0;
  int stride = 1;
  std::vector<double> energy;                  // H at the sampled states
  std::vector<std::string> watch_names;
  std::vector<std::vector<double>> watched;    // one series per watched fn

  enum class Status { Complete, PoleEncounter, Overflow } status =
      Status::Complete;
};

struct IntegrateOptions {
  int sample_stride = 1;
  double overflow_limit = 1e8;
};

// Fixed-step time-reversible integration of Hamilton's equations. Smooth
// axes use velocity Verlet; |x|- and sqrt|x|-type axes of separable
// potentials are advanced by their exact local flows (event handling at the
// kink), which keeps the per-axis energy exact across crossings.
Trajectory integrate(const Potential& pot, const PhaseState& s0, double dt,
                     long nsteps, const std::vector<PhaseFunction>& watch = {},
                     const IntegrateOptions& opts = {});

std::vector<Trajectory> integrate_batch(
    const Potential& pot, const std::vector<PhaseState>& starts, double dt,
    long nsteps, const std::vector<PhaseFunction>& watch = {},
    const IntegrateOptions& opts = {}, par::Exec exec = par::default_exec());

struct ClosureResult {
  bool closed = false;
  double period = 0.0;
  double min_distance = 0.0;  // refined, scale-normalized phase distance
};

// Finds t > 0 minimizing the per-coordinate scale-normalized phase-space
// distance to the initial state; NotBounded if the trajectory escapes.
ClosureResult detect_closure(const Trajectory& traj, double tol);

// Boundedness criterion from the separated energies; Kepler is handled via
// the radial effective potential (E2 acting as angular momentum).
bool check_bounded(const Potential& pot, double E1, double E2);

}  // namespace superint
