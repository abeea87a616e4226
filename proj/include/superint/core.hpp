#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace superint {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// A point (x1, x2, p1, p2) in phase space, with the time it was reached.
struct PhaseState {
  double x1 = 0.0, x2 = 0.0;
  double p1 = 0.0, p2 = 0.0;
  double t = 0.0;
};

struct Region {
  double xmin = -1.0, xmax = 1.0;
  double ymin = -1.0, ymax = 1.0;
  bool contains(Vec2 q) const {
    return q.x >= xmin && q.x <= xmax && q.y >= ymin && q.y <= ymax;
  }
};

enum class ErrorCode {
  PoleProximity,
  DomainViolation,
  NoRealRoot,
  BranchJump,
  FitDegenerate,
  DerivativeUnavailable,
  UndefinedG,
  QuadratureFailure,
  IncompatibleAnsatz,
  PoleEncounter,
  Overflow,
  NotBounded,
  NotSeparable,
  ClassicallyForbidden,
  SeedNotOnOrbit,
  BranchDeadEnd,
  NoSolution,
  NewtonDivergence,
  RepresentationInconsistent,
  NotConverged,
  StencilBoundary,
  PoleCrossed,
  NotCached,
  InvalidArgument,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

// ----------------------------------------------------------------------
// Execution policy for the batch kernels. Every kernel has a serial
// reference path and an OpenMP path producing bitwise-identical output;
// tests compare them and tools/bench_kernels times them.
namespace par {

enum class Exec { serial, openmp };

// Thread cap from SUPERINT_THREADS (<=0 or unset: OpenMP default).
int max_threads();
Exec default_exec();

void for_each_index(std::size_t n, Exec mode,
                    const std::function<void(std::size_t)>& body);

}  // namespace par

// ----------------------------------------------------------------------
// Quadrature and basis helpers.

// 12-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 12> kGlNodes = {
    -9.81560634246719244e-01, -9.04117256370474798e-01,
    -7.69902674194304693e-01, -5.87317954286617483e-01,
    -3.67831498998180184e-01, -1.25233408511468913e-01,
    +1.25233408511468913e-01, +3.67831498998180184e-01,
    +5.87317954286617483e-01, +7.69902674194304693e-01,
    +9.04117256370474798e-01, +9.81560634246719244e-01};
inline constexpr std::array<double, 12> kGlWeights = {
    4.71753363865120220e-02, 1.06939325995318885e-01,
    1.60078328543346110e-01, 2.03167426723065647e-01,
    2.33492536538354639e-01, 2.49147045813402690e-01,
    2.49147045813402690e-01, 2.33492536538354639e-01,
    2.03167426723065647e-01, 1.60078328543346110e-01,
    1.06939325995318885e-01, 4.71753363865120220e-02};

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int panels = 1);

// Integral of f from x0 to each of pts (pts need not be sorted relative to
// x0; each prefix is accumulated panel by panel).
std::vector<double> gl_cumulative(const std::function<double(double)>& f,
                                  double x0, const std::vector<double>& pts,
                                  int panels_per_gap = 1);

// Chebyshev T_j basis on [a, b]; values and d/dx.
void cheb_eval(double x, double a, double b, int degree, double* T,
               double* dT);

double finite_diff_step(double scale);

// 5-point central first derivative of a callable.
double fd_derivative(const std::function<double(double)>& f, double x,
                     double h);

std::vector<double> linspace(double a, double b, int n);

}  // namespace superint
