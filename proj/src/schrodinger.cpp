#include "superint/schrodinger.hpp"

#include <algorithm>
#include <cmath>

namespace superint {

namespace {

// Sturm count: number of eigenvalues of the symmetric tridiagonal matrix
// strictly below lambda.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e,
                double lambda) {
  int count = 0;
  double q = d[0] - lambda;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    double den = q;
    if (std::abs(den) < 1e-300) den = den < 0 ? -1e-300 : 1e-300;
    q = d[i] - lambda - e[i - 1] * e[i - 1] / den;
    if (q < 0) ++count;
  }
  return count;
}

// Thomas solve of (T - lambda I) x = rhs with diagonal perturbation safety.
void shifted_solve(const std::vector<double>& d, const std::vector<double>& e,
                   double lambda, std::vector<double>& x) {
  const std::size_t n = d.size();
  std::vector<double> c(n), dd(n);
  double piv = d[0] - lambda;
  if (std::abs(piv) < 1e-12) piv = 1e-12;
  c[0] = e.empty() ? 0.0 : e[0] / piv;
  dd[0] = x[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = d[i] - lambda - e[i - 1] * c[i - 1];
    if (std::abs(piv) < 1e-12) piv = 1e-12;
    c[i] = (i + 1 < n) ? e[i] / piv : 0.0;
    dd[i] = (x[i] - e[i - 1] * dd[i - 1]) / piv;
  }
  x[n - 1] = dd[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dd[i] - c[i] * x[i + 1];
}

}  // namespace

std::vector<double> tridiag_lowest_eigenvalues(const std::vector<double>& d,
                                               const std::vector<double>& e,
                                               int n_levels, par::Exec exec) {
  // Gershgorin bounds
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i < e.size()) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  std::vector<double> out(n_levels);
  par::for_each_index(static_cast<std::size_t>(n_levels), exec,
                      [&](std::size_t k) {
    double a = lo, b = hi;
    const double scale = std::max(std::abs(lo), std::abs(hi));
    while (b - a > 1e-14 * scale + 1e-300) {
      const double m = 0.5 * (a + b);
      if (sturm_count(d, e, m) > static_cast<int>(k))
        b = m;
      else
        a = m;
      if (b - a < 1e-15 * scale) break;
    }
    out[k] = 0.5 * (a + b);
  });
  return out;
}

namespace {

std::vector<std::vector<double>> tridiag_vectors(
    const std::vector<double>& d, const std::vector<double>& e,
    const std::vector<double>& lambdas, par::Exec exec) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> vecs(lambdas.size());
  par::for_each_index(lambdas.size(), exec, [&](std::size_t k) {
    std::vector<double> v(n);
    // deterministic pseudo-random start
    unsigned s = 12345u + 977u * static_cast<unsigned>(k);
    for (std::size_t i = 0; i < n; ++i) {
      s = 1664525u * s + 1013904223u;
      v[i] = (s >> 8) * (1.0 / (1u << 24)) - 0.5;
    }
    for (int it = 0; it < 4; ++it) {
      shifted_solve(d, e, lambdas[k], v);
      double nrm = 0.0;
      for (double t : v) nrm += t * t;
      nrm = std::sqrt(nrm);
      for (double& t : v) t /= nrm;
    }
    vecs[k] = std::move(v);
  });
  // re-orthogonalize clustered levels (deterministic serial pass)
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (std::abs(lambdas[k] - lambdas[j]) >
          1e-6 * std::max(1.0, std::abs(lambdas[k])))
        continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += vecs[k][i] * vecs[j][i];
      for (std::size_t i = 0; i < n; ++i) vecs[k][i] -= dot * vecs[j][i];
    }
    double nrm = 0.0;
    for (double t : vecs[k]) nrm += t * t;
    nrm = std::sqrt(nrm);
    for (double& t : vecs[k]) t /= nrm;
  }
  return vecs;
}

std::vector<double> grid_eigenvalues(const std::function<double(double)>& V,
                                     const Grid1D& g, int n_levels,
                                     double hbar, par::Exec exec) {
  const double h = g.h();
  std::vector<double> d(g.N), e(g.N - 1, -hbar * hbar / (2.0 * h * h));
  for (int i = 0; i < g.N; ++i) d[i] = hbar * hbar / (h * h) + V(g.x(i));
  return tridiag_lowest_eigenvalues(d, e, n_levels, exec);
}

}  // namespace

EigenResult solve_1d(const std::function<double(double)>& V, Grid1D grid,
                     int n_levels, double hbar, double converge_tol,
                     par::Exec exec) {
  EigenResult res;
  const std::vector<double> e1 = grid_eigenvalues(V, grid, n_levels, hbar, exec);
  Grid1D fine = grid;
  fine.N = 2 * grid.N;
  const std::vector<double> e2 = grid_eigenvalues(V, fine, n_levels, hbar, exec);
  res.grid = fine;
  res.eigenvalues = e2;
  res.richardson.resize(n_levels);
  res.grid_error.resize(n_levels);
  for (int k = 0; k < n_levels; ++k) {
    res.richardson[k] = (4.0 * e2[k] - e1[k]) / 3.0;
    res.grid_error[k] = std::abs(e2[k] - e1[k]);
    if (res.grid_error[k] >
        converge_tol * std::max(1.0, std::abs(res.richardson[k])))
      fail(ErrorCode::NotConverged,
           "grid-converged eigenvalue " + std::to_string(k) + " error " +
               std::to_string(res.grid_error[k]));
  }
  // vectors on the fine grid
  {
    const double h = fine.h();
    std::vector<double> d(fine.N), e(fine.N - 1, -hbar * hbar / (2.0 * h * h));
    for (int i = 0; i < fine.N; ++i) d[i] = hbar * hbar / (h * h) + V(fine.x(i));
    res.vectors = tridiag_vectors(d, e, e2, exec);
    const double sh = 1.0 / std::sqrt(h);
    for (auto& v : res.vectors)
      for (double& t : v) t *= sh;  // l2 -> L2 normalization
  }
  return res;
}

// ----------------------------------------------------------------------

namespace {
// pole-free interval of an axis around x_center, clipped to [-L, L]
std::pair<double, double> axis_interval(const Axis1D& ax, double L,
                                        double center) {
  double lo = center - L, hi = center + L;
  for (const auto& p : ax.poles) {
    if (p.pos + p.guard <= center) lo = std::max(lo, p.pos + p.guard);
    if (p.pos - p.guard >= center) hi = std::min(hi, p.pos - p.guard);
  }
  return {lo, hi};
}
}  // namespace

std::vector<Level2D> spectrum_2d_separable(const Potential& pot, double cutoff,
                                           const Spectrum2DOptions& opts) {
  if (!pot.separable())
    fail(ErrorCode::NotSeparable, "2D spectrum assembly needs V1+V2");
  const auto [xa, xb] = axis_interval(pot.x_axis(), opts.L, opts.x_center);
  const auto [ya, yb] = axis_interval(pot.y_axis(), opts.L, opts.y_center);
  Grid1D gx{xa, xb, opts.N}, gy{ya, yb, opts.N};
  const auto ex = solve_1d([&](double x) { return pot.x_axis().v(x); }, gx,
                           opts.levels_per_axis, opts.hbar);
  const auto ey = solve_1d([&](double y) { return pot.y_axis().v(y); }, gy,
                           opts.levels_per_axis, opts.hbar);
  std::vector<Level2D> out;
  for (int i = 0; i < opts.levels_per_axis; ++i) {
    for (int j = 0; j < opts.levels_per_axis; ++j) {
      const double E = ex.richardson[i] + ey.richardson[j];
      if (E <= cutoff) {
        out.push_back({E, i, j, ex.grid_error[i] / 3.0 + ey.grid_error[j] / 3.0});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Level2D& a, const Level2D& b) { return a.E < b.E; });
  return out;
}

// ----------------------------------------------------------------------
// grid commutator

namespace {

struct Grid2 {
  Region reg;
  int N;  // points per axis
  double hx, hy;
  std::vector<double> v;  // row-major, v[i*N+j] at (x_i, y_j)

  Grid2(const Region& r, int n) : reg(r), N(n) {
    hx = (r.xmax - r.xmin) / (N - 1);
    hy = (r.ymax - r.ymin) / (N - 1);
    v.assign(static_cast<std::size_t>(N) * N, 0.0);
  }
  double x(int i) const { return reg.xmin + i * hx; }
  double y(int j) const { return reg.ymin + j * hy; }
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * N + j]; }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * N + j];
  }
};

// central stencils (second order)
double d1x(const Grid2& g, int i, int j) {
  return (g.at(i + 1, j) - g.at(i - 1, j)) / (2 * g.hx);
}
double d1y(const Grid2& g, int i, int j) {
  return (g.at(i, j + 1) - g.at(i, j - 1)) / (2 * g.hy);
}
double d2x(const Grid2& g, int i, int j) {
  return (g.at(i + 1, j) - 2 * g.at(i, j) + g.at(i - 1, j)) / (g.hx * g.hx);
}
double d2y(const Grid2& g, int i, int j) {
  return (g.at(i, j + 1) - 2 * g.at(i, j) + g.at(i, j - 1)) / (g.hy * g.hy);
}
double dxy(const Grid2& g, int i, int j) {
  return (g.at(i + 1, j + 1) - g.at(i + 1, j - 1) - g.at(i - 1, j + 1) +
          g.at(i - 1, j - 1)) /
         (4 * g.hx * g.hy);
}
double d3x(const Grid2& g, int i, int j) {
  return (-0.5 * g.at(i - 2, j) + g.at(i - 1, j) - g.at(i + 1, j) +
          0.5 * g.at(i + 2, j)) /
         (g.hx * g.hx * g.hx) * -1.0;
}
double d3y(const Grid2& g, int i, int j) {
  return (-0.5 * g.at(i, j - 2) + g.at(i, j - 1) - g.at(i, j + 1) +
          0.5 * g.at(i, j + 2)) /
         (g.hy * g.hy * g.hy) * -1.0;
}
double d2x1y(const Grid2& g, int i, int j) {
  // d/dy of d2x
  return ((g.at(i + 1, j + 1) - 2 * g.at(i, j + 1) + g.at(i - 1, j + 1)) -
          (g.at(i + 1, j - 1) - 2 * g.at(i, j - 1) + g.at(i - 1, j - 1))) /
         (2 * g.hy * g.hx * g.hx);
}
double d1x2y(const Grid2& g, int i, int j) {
  return ((g.at(i + 1, j + 1) - 2 * g.at(i + 1, j) + g.at(i + 1, j - 1)) -
          (g.at(i - 1, j + 1) - 2 * g.at(i - 1, j) + g.at(i - 1, j - 1))) /
         (2 * g.hx * g.hy * g.hy);
}

// apply H = -(hbar^2/2) Lap + V
Grid2 apply_H(const Potential& pot, double hbar, const Grid2& in, int margin) {
  Grid2 out(in.reg, in.N);
  for (int i = margin; i < in.N - margin; ++i)
    for (int j = margin; j < in.N - margin; ++j) {
      const Vec2 q{in.x(i), in.y(j)};
      out.at(i, j) = -0.5 * hbar * hbar * (d2x(in, i, j) + d2y(in, i, j)) +
                     pot.eval(q) * in.at(i, j);
    }
  return out;
}

// apply the normal-ordered X / (i hbar)
Grid2 apply_X(const ThirdOrderIntegral& X, const Grid2& in, int margin) {
  Grid2 out(in.reg, in.N);
  const double h2 = X.hbar * X.hbar;
  const auto& A = X.A;
  for (int i = margin; i < in.N - margin; ++i)
    for (int j = margin; j < in.N - margin; ++j) {
      const Vec2 q{in.x(i), in.y(j)};
      const FPolys f = f_polys(A, q);
      const double q20 = -A[kA111] + 2 * A[kA201] * q.y - 2 * A[kA210] * q.x +
                         6 * A[kA300] * q.x * q.y;
      const double q11 = -A[kA102] + A[kA120] - 2 * A[kA201] * q.x -
                         2 * A[kA210] * q.y - 3 * A[kA300] * q.x * q.x +
                         3 * A[kA300] * q.y * q.y;
      const double g1 = X.g1.v(q), g2 = X.g2.v(q);
      const Vec2 g1g = X.g1.g(q), g2g = X.g2.g(q);
      out.at(i, j) =
          2 * h2 * (f.f1 * d3x(in, i, j) + f.f2 * d2x1y(in, i, j) +
                    f.f3 * d1x2y(in, i, j) + f.f4 * d3y(in, i, j)) +
          h2 * q20 * (d2x(in, i, j) - d2y(in, i, j)) +
          2 * h2 * q11 * dxy(in, i, j) +
          (-A[kA210] * h2 + 2 * A[kA300] * h2 * q.y - 2 * g1) * d1x(in, i, j) +
          (-A[kA201] * h2 - 2 * A[kA300] * h2 * q.x - 2 * g2) * d1y(in, i, j) -
          (g1g.x + g2g.y) * in.at(i, j);
    }
  return out;
}

double commutator_max(const Potential& pot, const ThirdOrderIntegral& X,
                      const Region& region, int N,
                      const std::function<double(Vec2)>& psi) {
  Grid2 g(region, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g.at(i, j) = psi({g.x(i), g.y(j)});
  const int m1 = 2;           // X stencil margin
  const int m2 = m1 + 2;      // after second application
  const Grid2 Xpsi = apply_X(X, g, m1);
  const Grid2 Hpsi = apply_H(pot, X.hbar, g, m1);
  const Grid2 HX = apply_H(pot, X.hbar, Xpsi, m2);
  const Grid2 XH = apply_X(X, Hpsi, m2);
  double worst = 0.0;
  for (int i = m2; i < N - m2; ++i)
    for (int j = m2; j < N - m2; ++j)
      worst = std::max(worst, std::abs(HX.at(i, j) - XH.at(i, j)));
  return worst;
}

}  // namespace

CommutatorReport grid_commutator_residual(
    const Potential& pot, const ThirdOrderIntegral& X, const Region& region,
    int N, const std::vector<std::function<double(Vec2)>>& test_functions) {
  if (test_functions.empty())
    fail(ErrorCode::InvalidArgument, "need at least one test function");
  CommutatorReport rep;
  for (const auto& psi : test_functions) {
    rep.residual_coarse =
        std::max(rep.residual_coarse, commutator_max(pot, X, region, N, psi));
    rep.residual_fine = std::max(rep.residual_fine,
                                 commutator_max(pot, X, region, 2 * N, psi));
  }
  rep.order = std::log2(std::max(rep.residual_coarse, 1e-300) /
                        std::max(rep.residual_fine, 1e-300));
  return rep;
}

}  // namespace superint
