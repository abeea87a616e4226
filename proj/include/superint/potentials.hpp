#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "superint/core.hpp"

namespace superint {

enum class Family {
  Kepler,
  Oscillator,
  LinearX,
  InverseSquareX,
  V_I,
  V_II,
  V_III,
  V_IV,
  EllipticSn,
  EllipticCnWell,
  EllipticSnInverse,
  DegenerateCosh,
  DegenerateSinh,
  DegenerateSin,
  Aniso9to1,
  SqrtSqrt,
  AbsSqrt,
  OscPlusQuarticRoot,
  AbsPlusCubicRoot,
  Rational1,
  Rational2,
  Rational3,
  Aniso9to1InvY,
  Rational6,
  WeierstrassSum,
  PainleveI_I,
  PainleveI_linear,
  PainleveII_a,
  PainleveII_b,
  PainleveIV,
};

using ParamMap = std::map<std::string, double>;

struct FamilyInfo {
  Family family;
  std::string id;          // stable string id, e.g. "aniso-9-1"
  bool quantum_only;       // vanishes in the classical limit
  bool separable;
  bool overall_hbar2;      // V(hbar) = hbar^2 V(1) pointwise
  std::vector<std::pair<std::string, double>> params;  // name, default
  std::string form;        // short formula for `list`
};

const std::vector<FamilyInfo>& catalog();
const FamilyInfo& family_info(Family f);
const FamilyInfo* find_family(const std::string& id);

// One separated degree of freedom with derivatives and an antiderivative.
struct Axis1D {
  std::function<double(double)> v;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;
  std::function<double(double)> antiderivative;  // from a fixed base point

  enum class KinkKind { None, AbsLinear, SqrtAbs };
  struct Kink {
    double pos;
    KinkKind kind;
    double coeff;  // V ~ coeff*|x-pos| or coeff*sqrt|x-pos| near pos
  };
  std::vector<Kink> kinks;
  struct Pole {
    double pos;
    double guard;
  };
  std::vector<Pole> poles;

  void check_eval(double x) const;   // DomainViolation/PoleProximity
  void check_deriv(double x) const;  // also guards kinks
};

class Potential {
 public:
  Family family() const { return info_->family; }
  const FamilyInfo& info() const { return *info_; }
  const ParamMap& params() const { return params_; }
  const Region& domain() const { return domain_; }
  double hbar() const;

  // Value with domain and pole guards.
  double eval(Vec2 q) const;
  Vec2 grad(Vec2 q) const;
  // Partial derivative d^{i+j} V / dx^i dy^j, i + j <= 3. Analytic for the
  // separable catalog; non-separable families fall back to finite
  // differences of the gradient beyond second order.
  double d(int i, int j, Vec2 q) const;

  bool separable() const { return info_->separable; }
  const Axis1D& x_axis() const;
  const Axis1D& y_axis() const;

  void check_point(Vec2 q) const;

 private:
  friend Potential make_potential(const std::string& id, const ParamMap&);
  const FamilyInfo* info_ = nullptr;
  ParamMap params_;
  Region domain_;
  std::shared_ptr<const Axis1D> ax_, ay_;  // separable case
  // non-separable case
  std::function<double(Vec2)> v2d_;
  std::function<Vec2(Vec2)> grad2d_;
  std::function<double(int, int, Vec2)> d2d_;  // may be empty
  std::function<void(Vec2)> guard2d_;
};

// Build a potential; unknown parameter keys are rejected. Imaginary length
// a = i a0 is requested with params["a_imag"] = 1 and params["a0"].
Potential make_potential(const std::string& id, const ParamMap& params = {});
Potential make_potential(Family f, const ParamMap& params = {});

// ----------------------------------------------------------------------
// Branch functions.

struct QuarticParams {
  double omega = 1.0, b = 0.0, c = 0.0, d = 0.0;
};

// Real roots of the quartic relation for V at position x, ascending.
std::vector<double> quartic_V_roots(double x, const QuarticParams& p);
double quartic_residual(double V, double x, const QuarticParams& p);

// Double-root parameter values: c = 8 om^8 b^3 / 729, d = om^4 b^2 / 27.
QuarticParams quartic_double_root_params(double omega, double b);
// Closed forms at the double-root parameters.
double quartic_V1(double x, double omega, double b);
double quartic_V2(double x, double omega, double b);
double quartic_V3(double x, double omega, double b);

// Continuously tracked branch, anchored at (x_anchor, v_anchor).
class QuarticBranch {
 public:
  QuarticBranch(QuarticParams p, double x_anchor, double v_anchor,
                double xmin, double xmax, int grid_n = 2048);
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;
  const QuarticParams& params() const { return p_; }

 private:
  double polish(double x, double guess) const;
  QuarticParams p_;
  double xmin_, xmax_;
  std::vector<double> xs_, vs_;
};

double quartic_branch_V(double x, const QuarticParams& p, double x_anchor,
                        double v_anchor);

struct CubicParams {
  double b = 0.0, d = 0.0;
};
std::vector<double> cubic_f_roots(double x, const CubicParams& p);
double cubic_residual(double f, double x, const CubicParams& p);

class CubicBranch {
 public:
  CubicBranch(CubicParams p, double x_anchor, double f_anchor, double xmin,
              double xmax, int grid_n = 2048);
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

 private:
  double polish(double x, double guess) const;
  CubicParams p_;
  double xmin_, xmax_;
  std::vector<double> xs_, vs_;
};

double cubic_branch_f(double x, const CubicParams& p, double x_anchor,
                      double f_anchor);

// ----------------------------------------------------------------------
// Least-squares fit of the cubic relation hbar^2 (V')^2 = 4V^3 + aV^2 + bV + c
// along the x-axis part of a quantum family. (The relation holds with the
// first derivative; see tests.)
struct EllipticOdeFit {
  double alpha = 0, beta = 0, gamma = 0;
  double max_residual = 0;
  bool degenerate = false;  // rank-deficient design (e.g. V identically 0)
};

EllipticOdeFit check_elliptic_ode(const Potential& pot,
                                  const std::vector<double>& xs);

}  // namespace superint
