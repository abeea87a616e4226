#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "superint/core.hpp"
#include "superint/potentials.hpp"

namespace superint {

// Constants of the third-order ansatz, indexed
//   A300 A210 A201 A120 A111 A102 A030 A021 A012 A003.
using A10 = std::array<double, 10>;
enum AIdx : int {
  kA300 = 0, kA210, kA201, kA120, kA111, kA102, kA030, kA021, kA012, kA003
};
extern const std::array<const char*, 10> kAIdxNames;

struct FPolys {
  double f1, f2, f3, f4;
};

// The four cubic polynomials attached to the A constants. f1 depends on y
// only, f4 on x only.
FPolys f_polys(const A10& A, Vec2 q);
FPolys f_polys_dx(const A10& A, Vec2 q);
FPolys f_polys_dy(const A10& A, Vec2 q);

struct GFunction {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> grad;  // optional; finite differences otherwise

  double v(Vec2 q) const;
  Vec2 g(Vec2 q) const;
  explicit operator bool() const { return static_cast<bool>(value); }
};

GFunction zero_g();

struct ThirdOrderIntegral {
  A10 A{};
  GFunction g1, g2;
  double hbar = 0.0;
  bool verified = false;
  double residual = 0.0;
  double tol = 0.0;
};

// Classical value 2[f1 p1^3 + f2 p1^2 p2 + f3 p1 p2^2 + f4 p2^3] +
// 2 g1 p1 + 2 g2 p2 (the hbar->0 symbol of the symmetrized ansatz).
double eval_X_classical(const ThirdOrderIntegral& X, const PhaseState& s);

// ----------------------------------------------------------------------
// Phase-space functions and Poisson brackets.

struct PhaseFunction {
  std::string name;
  std::function<double(const PhaseState&)> value;
  // gradient (d/dx1, d/dx2, d/dp1, d/dp2); optional
  std::function<std::array<double, 4>(const PhaseState&)> grad;

  double v(const PhaseState& s) const { return value(s); }
  std::array<double, 4> g(const PhaseState& s) const;
};

double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G,
                       const PhaseState& s);

PhaseFunction hamiltonian_function(const Potential& pot);
PhaseFunction angular_momentum();     // L3 = x1 p2 - x2 p1
PhaseFunction momentum(int axis);     // p1 or p2
PhaseFunction phase_function(const ThirdOrderIntegral& X);

// X = a L3^2 + 2b L3 p1 + 2c L3 p2 + d(p1^2 - p2^2) + 2f p1 p2 + phi(x,y)
struct SecondOrderIntegral {
  double a = 0, b = 0, c = 0, d = 0, f = 0;
  std::function<double(Vec2)> phi;
  std::function<Vec2(Vec2)> phi_grad;
};
double eval_second_order(const SecondOrderIntegral& Y, const PhaseState& s);
PhaseFunction phase_function(const SecondOrderIntegral& Y);

// Y = (p1^2 - p2^2)/2 + V1(x) - V2(y) for a separable potential.
SecondOrderIntegral make_cartesian_Y(const Potential& pot);
// Laplace-Runge-Lenz x-component for V = alpha/r.
PhaseFunction make_runge_lenz_x(double alpha);
// Fradkin tensor component p1 p2 + 2 alpha x y for V = alpha r^2.
PhaseFunction make_fradkin_xy(double alpha);

// {Y2, Y1^2} (or {Y2, Y1} with square_first = false).
PhaseFunction build_reducible_X(const PhaseFunction& Y1,
                                const PhaseFunction& Y2,
                                bool square_first = true);

// ----------------------------------------------------------------------
// Determining equations. E1..E3 are first order in g; E4 carries the
// quantum right-hand side with the A-terms inside the hbar^2/4 bracket.

struct ResidualReport {
  std::array<double, 4> max_abs{};   // per equation
  std::array<double, 4> scale{};     // max sum of |terms| per equation
  double max_rel = 0.0;
  std::size_t n_points = 0;
};

ResidualReport determining_residuals(const Potential& pot,
                                     const ThirdOrderIntegral& X,
                                     const std::vector<Vec2>& pts);

// ----------------------------------------------------------------------
// Reconstruction of g1, g2 by line quadrature plus least-squares line
// functions, and the certification search over A.

struct CertifyOptions {
  int grid_m = 13;
  int grid_n = 13;
  int cheb_degree = 10;
  int quad_panels = 2;       // GL panels per grid gap
  bool with_compat = true;   // include the V-only compatibility rows
  std::vector<A10> exclude;  // A-directions to remove from the search
  double tol = 1e-6;         // IncompatibleAnsatz threshold for reconstruct_g
  par::Exec exec = par::default_exec();
};

struct Reconstruction {
  GFunction g1, g2;
  std::vector<double> c1_coeffs, c2_coeffs;  // Chebyshev line functions
  Vec2 base;
  Region region;
  double max_rel_residual = 0.0;  // over E3 and E4 on the grid
};

// Integrates (2.4)-type line equations for a FIXED A and fits the free line
// functions; IncompatibleAnsatz if the residual exceeds opts.tol.
Reconstruction reconstruct_g(const Potential& pot, const A10& A, Vec2 base,
                             const Region& region, double hbar,
                             const CertifyOptions& opts = {});

struct CertifiedIntegral {
  A10 A{};
  Reconstruction rec;
  double rel_residual = 0.0;  // solution residual, relative
  double sigma_rel = 0.0;     // smallest/largest singular value of A block
  double hbar = 0.0;

  ThirdOrderIntegral integral() const;
};

// Least-squares search over the 10 A constants (unit norm) and the line
// functions; a small residual certifies a third-order integral on `region`.
CertifiedIntegral certify_integrability(const Potential& pot, double hbar,
                                        const Region& region,
                                        const CertifyOptions& opts = {});

// Residual of a FIXED A direction after the optimal line functions (used to
// verify that a given integral lies in the certified null space).
double certified_direction_residual(const Potential& pot, double hbar,
                                    const Region& region, const A10& A,
                                    const CertifyOptions& opts = {});

// ----------------------------------------------------------------------
// Certified-integral cache records (JSON).

struct CertificateRecord {
  std::string potential_id;
  ParamMap params;
  double hbar = 0.0;
  A10 A{};
  Region region;
  Vec2 base;
  int cheb_degree = 0;
  std::vector<double> c1_coeffs, c2_coeffs;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string date;
};

CertificateRecord make_certificate(const std::string& potential_id,
                                   const ParamMap& params,
                                   const CertifiedIntegral& cert);
void save_certificate(const std::string& path, const CertificateRecord& rec);
CertificateRecord load_certificate(const std::string& path);
// Rebuild the evaluable integral from a record (re-derives the potential).
ThirdOrderIntegral certificate_integral(const CertificateRecord& rec);

}  // namespace superint
