#pragma once

#include <functional>
#include <string>
#include <vector>

#include "superint/core.hpp"

namespace superint {

// Polynomial in the energy, lowest degree first.
struct EPoly {
  std::vector<double> c;
  double operator()(double E) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * E + c[i];
    return v;
  }
};

// b^t b = Phi(N); zeros and positivity of Phi select the finite
// representations and hence the spectrum.
struct StructureFunction {
  std::function<double(double x, double u, double E)> phi;
  struct LinearRoot {
    double slope, offset;  // root(E) = slope * E + offset, in xi = x + u
  };
  std::vector<LinearRoot> factored_roots;
  double overall_coefficient = 1.0;

  bool has_factored() const { return !factored_roots.empty(); }
  double eval(double x, double u, double E) const;
};

// [A,B] = C, [A,C] = alpha B, [B,C] = beta A^3 + gamma A^2 + delta A + eps,
// with gamma, delta, eps polynomials in the energy. Ladder normalization:
// A = sqrt(alpha) (N + u), B = b^t + b, b(N) = 0, rho = 1.
struct CubicAlgebraModel {
  double alpha = 1.0;
  double beta = 0.0;
  EPoly gamma, delta, eps;
  EPoly casimir;  // Casimir polynomial evaluated at the energy
  std::string id;
};

// The built-in model: Casimir quartic and factored quartic structure
// function with coefficient -hbar^8/a^4 and four roots linear in a^2 E /
// hbar^2. `a_imag` selects a = i a0 (a2 = -a0^2).
std::pair<CubicAlgebraModel, StructureFunction> build_rational1_model(
    double a_or_a0, bool a_imag, double hbar);

struct SpectrumLevel {
  int p = 0;
  double u = 0.0, E = 0.0;
  std::string branch;
  bool positivity = false;
};

struct SpectrumResult {
  std::vector<SpectrumLevel> levels;  // positivity-certified only
  std::vector<int> no_solution_p;     // p values with no certified level
  std::string model_id;
};

struct SolveOptions {
  double boundary_tol = 1e-10;      // relative, |Phi(0)|, |Phi(p+1)|
  double positivity_margin = 1e-12; // relative, Phi(x) > margin for x=1..p
  // Newton path for non-factored Phi:
  int starts_per_axis = 12;
  double u_min = -12, u_max = 12, E_min = -12, E_max = 12;
  int max_newton = 60;
};

// Solves Phi(0,u,E) = 0, Phi(p+1,u,E) = 0 for every p <= p_max; analytic
// pairing of the factored roots when available, multi-start damped Newton
// otherwise. All root-assignment branches are reported; E-independent pair
// differences give no isolated solution and are skipped.
SpectrumResult solve_spectrum(const StructureFunction& sf, int p_max,
                              const SolveOptions& opts = {});

// Max-norm residual of the (p+1)-dimensional ladder representation against
// the commutation relations, relative to the right-hand-side scale.
double check_commutation(const CubicAlgebraModel& model,
                         const StructureFunction& sf,
                         const SpectrumLevel& level);

}  // namespace superint
