#include "superint/core.hpp"

#include <omp.h>

#include <cstdlib>

namespace superint {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::BranchJump: return "BranchJump";
    case ErrorCode::FitDegenerate: return "FitDegenerate";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::UndefinedG: return "UndefinedG";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::IncompatibleAnsatz: return "IncompatibleAnsatz";
    case ErrorCode::PoleEncounter: return "PoleEncounter";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotBounded: return "NotBounded";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::ClassicallyForbidden: return "ClassicallyForbidden";
    case ErrorCode::SeedNotOnOrbit: return "SeedNotOnOrbit";
    case ErrorCode::BranchDeadEnd: return "BranchDeadEnd";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::RepresentationInconsistent: return "RepresentationInconsistent";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::StencilBoundary: return "StencilBoundary";
    case ErrorCode::PoleCrossed: return "PoleCrossed";
    case ErrorCode::NotCached: return "NotCached";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace par {

int max_threads() {
  static int cached = [] {
    const char* env = std::getenv("SUPERINT_THREADS");
    int hw = omp_get_max_threads();
    if (!env) return hw;
    int v = std::atoi(env);
    if (v <= 0) return hw;
    return v < hw ? v : hw;
  }();
  return cached;
}

Exec default_exec() {
  static Exec cached = [] {
    const char* env = std::getenv("SUPERINT_SERIAL");
    if (env && env[0] == '1') return Exec::serial;
    return Exec::openmp;
  }();
  return cached;
}

void for_each_index(std::size_t n, Exec mode,
                    const std::function<void(std::size_t)>& body) {
  if (mode == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace par

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int panels) {
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + p * w;
    const double h = 0.5 * w;
    const double m = pa + h;
    double acc = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      acc += kGlWeights[i] * f(m + h * kGlNodes[i]);
    }
    total += h * acc;
  }
  return total;
}

std::vector<double> gl_cumulative(const std::function<double(double)>& f,
                                  double x0, const std::vector<double>& pts,
                                  int panels_per_gap) {
  std::vector<double> out(pts.size());
  double acc = 0.0;
  double prev = x0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    acc += gl_integrate(f, prev, pts[i], panels_per_gap);
    out[i] = acc;
    prev = pts[i];
  }
  return out;
}

void cheb_eval(double x, double a, double b, int degree, double* T,
               double* dT) {
  const double u = 2.0 * (x - a) / (b - a) - 1.0;
  const double du = 2.0 / (b - a);
  T[0] = 1.0;
  if (degree >= 1) T[1] = u;
  for (int j = 2; j <= degree; ++j) T[j] = 2.0 * u * T[j - 1] - T[j - 2];
  if (!dT) return;
  // dT_j/du = j U_{j-1}
  double Um2 = 1.0;          // U_0
  double Um1 = 2.0 * u;      // U_1
  dT[0] = 0.0;
  if (degree >= 1) dT[1] = du;
  if (degree >= 2) dT[2] = 2.0 * Um1 * du;
  for (int j = 3; j <= degree; ++j) {
    const double Uj = 2.0 * u * Um1 - Um2;  // U_{j-1}
    dT[j] = j * Uj * du;
    Um2 = Um1;
    Um1 = Uj;
  }
}

double finite_diff_step(double scale) {
  const double eps = 2.220446049250313e-16;
  return std::cbrt(eps) * std::max(1.0, std::abs(scale));
}

double fd_derivative(const std::function<double(double)>& f, double x,
                     double h) {
  // 5-point, 4th order
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) /
         (12.0 * h);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = 0.5 * (a + b);
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace superint
