#pragma once

#include <utility>
#include <vector>

#include "superint/core.hpp"
#include "superint/integrals.hpp"
#include "superint/potentials.hpp"

namespace superint {

// p_i = s_i sqrt(2 (E_i - V_i)); ClassicallyForbidden on negative radicand.
std::pair<double, double> momenta_from_energies(const Potential& pot, double x,
                                                double y, double E1, double E2,
                                                int s1, int s2);

// Value of X(x, y, p1(s1), p2(s2)) - K.
double implicit_residual(const Potential& pot, const ThirdOrderIntegral& X,
                         double x, double y, double E1, double E2, double K,
                         int s1, int s2);

struct AlgebraicOrbit {
  double E1 = 0, E2 = 0, K = 0;
  struct Point {
    double x, y;
    int s1, s2;
    double residual;
  };
  std::vector<Point> curve;
  enum class Status { Closed, OpenEnd, DeadEnd } status = Status::OpenEnd;
};

struct TraceOptions {
  double step = 2e-3;        // arclength step (scaled by curve extent)
  double seed_tol = 1e-7;    // |F| tolerance at the seed (relative)
  int max_points = 300000;
  int max_folds = 256;
};

// Continuation along the zero set of the implicit trajectory equation with
// explicit momentum-sign bookkeeping; sign branches flip at turning points.
AlgebraicOrbit trace_orbit(const Potential& pot, const ThirdOrderIntegral& X,
                           double E1, double E2, double K, Vec2 seed,
                           const TraceOptions& opts = {});

// Symmetric polyline Hausdorff distance with coordinates normalized by the
// joint bounding box.
double hausdorff_distance(const std::vector<Vec2>& a,
                          const std::vector<Vec2>& b);

}  // namespace superint
