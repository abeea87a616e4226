#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "superint/core.hpp"

namespace superint {

struct JacobiTriple {
  double sn, cn, dn;
};

// Jacobi elliptic functions by the descending Landen (AGM) transformation.
// Modulus convention: k in [0, 1] (m = k^2).
JacobiTriple jacobi_sn_cn_dn(double u, double k);

// epsilon(u, k) = int_0^u dn^2 dt  (Jacobi epsilon function). Needed for
// antiderivatives of sn^2-type potentials.
double jacobi_epsilon(double u, double k);

// Complete elliptic integrals K(k), E(k) via AGM.
double elliptic_K(double k);
double elliptic_E(double k);

// One explicit descending Landen step; used as a self-consistency oracle.
JacobiTriple jacobi_via_landen_step(double u, double k);

struct WeierstrassValue {
  double p, dp;
};

// Weierstrass P and P' for real invariants on the real axis, by reduction to
// Jacobi functions through the roots of 4 t^3 - g2 t - g3. Throws
// PoleProximity near lattice points.
WeierstrassValue weierstrass_p(double x, double g2, double g3);

double weierstrass_discriminant(double g2, double g3);

// ----------------------------------------------------------------------
// Painleve transcendents P_I, P_II, P_IV (Ince parameter conventions):
//   P_I  : w'' = 6 w^2 + x
//   P_II : w'' = 2 w^3 + x w + a
//   P_IV : w'' = w'^2/(2w) + (3/2) w^3 + 4 x w^2 + 2 (x^2 - a) w + b / w
enum class PainleveKind { P_I, P_II, P_IV };

struct PainleveParams {
  double a = 0.0;
  double b = 0.0;
};

// Dense solution of a Painleve equation on an interval around x0, stored as
// embedded RK(5)4 steps with 4th-order dense-output segments. Movable poles
// (|w| or |w'| beyond the blowup threshold) truncate the interval and are
// recorded.
class PainleveSolution {
 public:
  PainleveSolution(PainleveKind kind, PainleveParams params, double x0,
                   double w0, double w0p, double xa, double xb,
                   double rtol = 1e-10);

  // (w, w') at x; PoleCrossed if a recorded pole lies between x0 and x,
  // NotCached outside the covered interval.
  std::array<double, 2> eval(double x) const;

  // |w'' - rhs(x, w, w')| with w'' from a 5-point stencil on the dense w'.
  double ode_residual(double x) const;

  double covered_min() const { return cov_min_; }
  double covered_max() const { return cov_max_; }
  double x0() const { return x0_; }
  PainleveKind kind() const { return kind_; }
  PainleveParams params() const { return params_; }
  const std::vector<double>& poles() const { return poles_; }

  std::array<double, 2> rhs(double x, double w, double wp) const;

 private:
  struct Segment {
    double x0, h;
    std::array<double, 5> c0, c1;  // dense coefficients for w and w'
  };
  void integrate_direction(double x0, double w0, double w0p, double xend,
                           double rtol);
  const Segment* find_segment(double x) const;

  PainleveKind kind_;
  PainleveParams params_;
  double x0_, cov_min_, cov_max_;
  std::vector<Segment> fwd_, bwd_;
  std::vector<double> poles_;
};

}  // namespace superint
