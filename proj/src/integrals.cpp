#include "superint/integrals.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <ctime>
#include <fstream>

#include "json.hpp"

namespace superint {

const std::array<const char*, 10> kAIdxNames = {
    "A300", "A210", "A201", "A120", "A111",
    "A102", "A030", "A021", "A012", "A003"};

FPolys f_polys(const A10& A, Vec2 q) {
  const double x = q.x, y = q.y;
  return {
      -A[kA300] * y * y * y + A[kA210] * y * y - A[kA120] * y + A[kA030],
      3 * A[kA300] * x * y * y - 2 * A[kA210] * x * y + A[kA201] * y * y +
          A[kA120] * x - A[kA111] * y + A[kA021],
      -3 * A[kA300] * x * x * y + A[kA210] * x * x - 2 * A[kA201] * x * y +
          A[kA111] * x - A[kA102] * y + A[kA012],
      A[kA300] * x * x * x + A[kA201] * x * x + A[kA102] * x + A[kA003]};
}

FPolys f_polys_dx(const A10& A, Vec2 q) {
  const double x = q.x, y = q.y;
  return {0.0,
          3 * A[kA300] * y * y - 2 * A[kA210] * y + A[kA120],
          -6 * A[kA300] * x * y + 2 * A[kA210] * x - 2 * A[kA201] * y +
              A[kA111],
          3 * A[kA300] * x * x + 2 * A[kA201] * x + A[kA102]};
}

FPolys f_polys_dy(const A10& A, Vec2 q) {
  const double x = q.x, y = q.y;
  return {-3 * A[kA300] * y * y + 2 * A[kA210] * y - A[kA120],
          6 * A[kA300] * x * y - 2 * A[kA210] * x + 2 * A[kA201] * y -
              A[kA111],
          -3 * A[kA300] * x * x - 2 * A[kA201] * x - A[kA102],
          0.0};
}

namespace {
struct FSecond {
  double f1yy, f2yy, f2xy, f3xx, f3xy, f4xx;
};
FSecond f_polys_second(const A10& A, Vec2 q) {
  const double x = q.x, y = q.y;
  return {-6 * A[kA300] * y + 2 * A[kA210], 6 * A[kA300] * x + 2 * A[kA201],
          6 * A[kA300] * y - 2 * A[kA210],  -6 * A[kA300] * y + 2 * A[kA210],
          -6 * A[kA300] * x - 2 * A[kA201], 6 * A[kA300] * x + 2 * A[kA201]};
}
A10 unit_A(int k) {
  A10 a{};
  a[k] = 1.0;
  return a;
}
}  // namespace

double GFunction::v(Vec2 q) const {
  if (!value) fail(ErrorCode::UndefinedG, "g-function has no value");
  return value(q);
}

Vec2 GFunction::g(Vec2 q) const {
  if (grad) return grad(q);
  if (!value) fail(ErrorCode::UndefinedG, "g-function has no value");
  const double hx = finite_diff_step(q.x), hy = finite_diff_step(q.y);
  const double gx =
      fd_derivative([&](double s) { return value({s, q.y}); }, q.x, hx);
  const double gy =
      fd_derivative([&](double s) { return value({q.x, s}); }, q.y, hy);
  return {gx, gy};
}

GFunction zero_g() {
  GFunction g;
  g.value = [](Vec2) { return 0.0; };
  g.grad = [](Vec2) { return Vec2{0.0, 0.0}; };
  return g;
}

double eval_X_classical(const ThirdOrderIntegral& X, const PhaseState& s) {
  const FPolys f = f_polys(X.A, {s.x1, s.x2});
  const double p1 = s.p1, p2 = s.p2;
  const double cubic = f.f1 * p1 * p1 * p1 + f.f2 * p1 * p1 * p2 +
                       f.f3 * p1 * p2 * p2 + f.f4 * p2 * p2 * p2;
  return 2.0 * cubic + 2.0 * X.g1.v({s.x1, s.x2}) * p1 +
         2.0 * X.g2.v({s.x1, s.x2}) * p2;
}

// ----------------------------------------------------------------------

std::array<double, 4> PhaseFunction::g(const PhaseState& s) const {
  if (grad) return grad(s);
  std::array<double, 4> out;
  auto eval_shift = [&](int idx, double d) {
    PhaseState t = s;
    (idx == 0 ? t.x1 : idx == 1 ? t.x2 : idx == 2 ? t.p1 : t.p2) += d;
    return value(t);
  };
  const double coords[4] = {s.x1, s.x2, s.p1, s.p2};
  for (int i = 0; i < 4; ++i) {
    const double h = finite_diff_step(coords[i]);
    out[i] = (eval_shift(i, h) - eval_shift(i, -h)) / (2.0 * h);
  }
  return out;
}

double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G,
                       const PhaseState& s) {
  const auto gf = F.g(s);
  const auto gg = G.g(s);
  return gf[0] * gg[2] - gf[2] * gg[0] + gf[1] * gg[3] - gf[3] * gg[1];
}

PhaseFunction hamiltonian_function(const Potential& pot) {
  PhaseFunction H;
  H.name = "H";
  H.value = [pot](const PhaseState& s) {
    return 0.5 * (s.p1 * s.p1 + s.p2 * s.p2) + pot.eval({s.x1, s.x2});
  };
  H.grad = [pot](const PhaseState& s) -> std::array<double, 4> {
    const Vec2 g = pot.grad({s.x1, s.x2});
    return {g.x, g.y, s.p1, s.p2};
  };
  return H;
}

PhaseFunction angular_momentum() {
  PhaseFunction L;
  L.name = "L3";
  L.value = [](const PhaseState& s) { return s.x1 * s.p2 - s.x2 * s.p1; };
  L.grad = [](const PhaseState& s) -> std::array<double, 4> {
    return {s.p2, -s.p1, -s.x2, s.x1};
  };
  return L;
}

PhaseFunction momentum(int axis) {
  PhaseFunction P;
  P.name = axis == 1 ? "p1" : "p2";
  P.value = [axis](const PhaseState& s) { return axis == 1 ? s.p1 : s.p2; };
  P.grad = [axis](const PhaseState&) -> std::array<double, 4> {
    return {0.0, 0.0, axis == 1 ? 1.0 : 0.0, axis == 1 ? 0.0 : 1.0};
  };
  return P;
}

PhaseFunction phase_function(const ThirdOrderIntegral& X) {
  PhaseFunction F;
  F.name = "X3";
  F.value = [X](const PhaseState& s) { return eval_X_classical(X, s); };
  return F;
}

double eval_second_order(const SecondOrderIntegral& Y, const PhaseState& s) {
  const double L3 = s.x1 * s.p2 - s.x2 * s.p1;
  double v = Y.a * L3 * L3 + 2.0 * Y.b * L3 * s.p1 + 2.0 * Y.c * L3 * s.p2 +
             Y.d * (s.p1 * s.p1 - s.p2 * s.p2) + 2.0 * Y.f * s.p1 * s.p2;
  if (Y.phi) v += Y.phi({s.x1, s.x2});
  return v;
}

PhaseFunction phase_function(const SecondOrderIntegral& Y) {
  PhaseFunction F;
  F.name = "Y2";
  F.value = [Y](const PhaseState& s) { return eval_second_order(Y, s); };
  F.grad = [Y](const PhaseState& s) -> std::array<double, 4> {
    const double L3 = s.x1 * s.p2 - s.x2 * s.p1;
    // dL3/d(x1,x2,p1,p2) = (p2, -p1, -x2, x1)
    const double dL[4] = {s.p2, -s.p1, -s.x2, s.x1};
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i)
      g[i] = (2.0 * Y.a * L3 + 2.0 * Y.b * s.p1 + 2.0 * Y.c * s.p2) * dL[i];
    g[2] += 2.0 * Y.b * L3 + 2.0 * Y.d * s.p1 + 2.0 * Y.f * s.p2;
    g[3] += 2.0 * Y.c * L3 - 2.0 * Y.d * s.p2 + 2.0 * Y.f * s.p1;
    if (Y.phi_grad) {
      const Vec2 pg = Y.phi_grad({s.x1, s.x2});
      g[0] += pg.x;
      g[1] += pg.y;
    }
    return g;
  };
  return F;
}

SecondOrderIntegral make_cartesian_Y(const Potential& pot) {
  if (!pot.separable()) fail(ErrorCode::NotSeparable, "cartesian Y needs V1+V2");
  SecondOrderIntegral Y;
  Y.d = 0.5;
  Y.phi = [pot](Vec2 q) { return pot.x_axis().v(q.x) - pot.y_axis().v(q.y); };
  Y.phi_grad = [pot](Vec2 q) {
    return Vec2{pot.x_axis().d1(q.x), -pot.y_axis().d1(q.y)};
  };
  return Y;
}

PhaseFunction make_runge_lenz_x(double alpha) {
  PhaseFunction F;
  F.name = "RungeLenzX";
  F.value = [alpha](const PhaseState& s) {
    const double L3 = s.x1 * s.p2 - s.x2 * s.p1;
    const double r = std::hypot(s.x1, s.x2);
    return s.p2 * L3 + alpha * s.x1 / r;
  };
  F.grad = [alpha](const PhaseState& s) -> std::array<double, 4> {
    const double L3 = s.x1 * s.p2 - s.x2 * s.p1;
    const double r = std::hypot(s.x1, s.x2), r3 = r * r * r;
    return {s.p2 * s.p2 + alpha * s.x2 * s.x2 / r3,
            -s.p2 * s.p1 - alpha * s.x1 * s.x2 / r3,
            -s.p2 * s.x2,
            L3 + s.p2 * s.x1};
  };
  return F;
}

PhaseFunction make_fradkin_xy(double alpha) {
  PhaseFunction F;
  F.name = "FradkinXY";
  F.value = [alpha](const PhaseState& s) {
    return s.p1 * s.p2 + 2.0 * alpha * s.x1 * s.x2;
  };
  F.grad = [alpha](const PhaseState& s) -> std::array<double, 4> {
    return {2.0 * alpha * s.x2, 2.0 * alpha * s.x1, s.p2, s.p1};
  };
  return F;
}

PhaseFunction build_reducible_X(const PhaseFunction& Y1,
                                const PhaseFunction& Y2, bool square_first) {
  PhaseFunction G;  // Y1^2 (or Y1)
  if (square_first) {
    G.value = [Y1](const PhaseState& s) {
      const double v = Y1.v(s);
      return v * v;
    };
    if (Y1.grad) {
      G.grad = [Y1](const PhaseState& s) -> std::array<double, 4> {
        const double v = Y1.v(s);
        auto g = Y1.g(s);
        for (auto& e : g) e *= 2.0 * v;
        return g;
      };
    }
  } else {
    G = Y1;
  }
  PhaseFunction X;
  X.name = "{" + Y2.name + "," + Y1.name + (square_first ? "^2}" : "}");
  X.value = [Y2, G](const PhaseState& s) { return poisson_bracket(Y2, G, s); };
  return X;
}

// ----------------------------------------------------------------------
// determining residuals for an explicit integral

ResidualReport determining_residuals(const Potential& pot,
                                     const ThirdOrderIntegral& X,
                                     const std::vector<Vec2>& pts) {
  ResidualReport rep;
  rep.n_points = pts.size();
  const double h2_4 = X.hbar * X.hbar / 4.0;
  for (const Vec2& q : pts) {
    const FPolys f = f_polys(X.A, q);
    const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
    const Vec2 g1g = X.g1.g(q), g2g = X.g2.g(q);
    const double g1v = X.g1.v(q), g2v = X.g2.v(q);

    const double t1a = g1g.x, t1b = 3 * f.f1 * Vx, t1c = f.f2 * Vy;
    const double e1 = t1a - t1b - t1c;
    const double s1 = std::abs(t1a) + std::abs(t1b) + std::abs(t1c);

    const double t2a = g2g.y, t2b = f.f3 * Vx, t2c = 3 * f.f4 * Vy;
    const double e2 = t2a - t2b - t2c;
    const double s2 = std::abs(t2a) + std::abs(t2b) + std::abs(t2c);

    const double t3a = g1g.y + g2g.x, t3b = 2 * (f.f2 * Vx + f.f3 * Vy);
    const double e3 = t3a - t3b;
    const double s3 = std::abs(g1g.y) + std::abs(g2g.x) + std::abs(t3b);

    const double quantum =
        f.f1 * pot.d(3, 0, q) + f.f2 * pot.d(2, 1, q) + f.f3 * pot.d(1, 2, q) +
        f.f4 * pot.d(0, 3, q) +
        8.0 * X.A[kA300] * (q.x * Vy - q.y * Vx) +
        2.0 * (X.A[kA210] * Vx + X.A[kA201] * Vy);
    const double t4a = g1v * Vx + g2v * Vy, t4b = h2_4 * quantum;
    const double e4 = t4a - t4b;
    const double s4 = std::abs(g1v * Vx) + std::abs(g2v * Vy) + std::abs(t4b);

    const double es[4] = {e1, e2, e3, e4};
    const double ss[4] = {s1, s2, s3, s4};
    for (int i = 0; i < 4; ++i) {
      rep.max_abs[i] = std::max(rep.max_abs[i], std::abs(es[i]));
      rep.scale[i] = std::max(rep.scale[i], ss[i]);
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double sc = std::max(rep.scale[i], 1e-30);
    rep.max_rel = std::max(rep.max_rel, rep.max_abs[i] / sc);
  }
  return rep;
}

// ----------------------------------------------------------------------
// Assembly of the least-squares system.

namespace {

struct Assembly {
  Eigen::MatrixXd M;           // rows x (10 + 2*(D+1))
  std::vector<double> xs, ys;  // grid
  Vec2 base;
  Region region;
  int D;
  int i0, j0;  // base indices
};

// cumulative integrals of the A-basis line integrands from the base index
// outward, per row/column. out[k][i] = int_{base}^{pt_i}.
void cumulative_basis(const std::vector<double>& pts, int i_base,
                      const std::function<void(double, double*)>& integrand10,
                      int panels, std::vector<std::array<double, 10>>& out) {
  const int n = static_cast<int>(pts.size());
  out.assign(n, {});
  double vals[10];
  for (int dir : {+1, -1}) {
    std::array<double, 10> acc{};
    double prev = pts[i_base];
    for (int i = i_base + dir; i >= 0 && i < n; i += dir) {
      const double a = prev, b = pts[i];
      const double w = (b - a) / panels;
      for (int p = 0; p < panels; ++p) {
        const double pa = a + p * w;
        const double hh = 0.5 * w, mid = pa + hh;
        for (std::size_t gnode = 0; gnode < kGlNodes.size(); ++gnode) {
          integrand10(mid + hh * kGlNodes[gnode], vals);
          for (int k = 0; k < 10; ++k)
            acc[k] += hh * kGlWeights[gnode] * vals[k];
        }
      }
      out[i] = acc;
      prev = b;
    }
  }
}

Assembly assemble(const Potential& pot, double hbar, const Region& region,
                  const CertifyOptions& opts) {
  Assembly as;
  as.region = region;
  as.D = opts.cheb_degree;
  const int m = opts.grid_m, n = opts.grid_n;
  as.xs = linspace(region.xmin, region.xmax, m);
  as.ys = linspace(region.ymin, region.ymax, n);
  as.i0 = m / 2;
  as.j0 = n / 2;
  as.base = {as.xs[as.i0], as.ys[as.j0]};

  // cumulative line integrals of R1_k and dR1_k/dy along every row, and of
  // R2_k and dR2_k/dx along every column
  std::vector<std::vector<std::array<double, 10>>> I1(n), dI1(n), I2(m), dI2(m);
  par::for_each_index(n, opts.exec, [&](std::size_t jy) {
    const double y = as.ys[jy];
    cumulative_basis(
        as.xs, as.i0,
        [&](double s, double* out) {
          const Vec2 q{s, y};
          const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
          for (int k = 0; k < 10; ++k) {
            const FPolys f = f_polys(unit_A(k), q);
            out[k] = 3.0 * f.f1 * Vx + f.f2 * Vy;
          }
        },
        opts.quad_panels, I1[jy]);
    cumulative_basis(
        as.xs, as.i0,
        [&](double s, double* out) {
          const Vec2 q{s, y};
          const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
          const double Vxy = pot.d(1, 1, q), Vyy = pot.d(0, 2, q);
          for (int k = 0; k < 10; ++k) {
            const A10 a = unit_A(k);
            const FPolys f = f_polys(a, q);
            const FPolys fy = f_polys_dy(a, q);
            out[k] = 3.0 * fy.f1 * Vx + 3.0 * f.f1 * Vxy + fy.f2 * Vy +
                     f.f2 * Vyy;
          }
        },
        opts.quad_panels, dI1[jy]);
  });
  par::for_each_index(m, opts.exec, [&](std::size_t ix) {
    const double x = as.xs[ix];
    cumulative_basis(
        as.ys, as.j0,
        [&](double t, double* out) {
          const Vec2 q{x, t};
          const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
          for (int k = 0; k < 10; ++k) {
            const FPolys f = f_polys(unit_A(k), q);
            out[k] = f.f3 * Vx + 3.0 * f.f4 * Vy;
          }
        },
        opts.quad_panels, I2[ix]);
    cumulative_basis(
        as.ys, as.j0,
        [&](double t, double* out) {
          const Vec2 q{x, t};
          const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
          const double Vxx = pot.d(2, 0, q), Vxy = pot.d(1, 1, q);
          for (int k = 0; k < 10; ++k) {
            const A10 a = unit_A(k);
            const FPolys f = f_polys(a, q);
            const FPolys fx = f_polys_dx(a, q);
            out[k] = fx.f3 * Vx + f.f3 * Vxx + 3.0 * fx.f4 * Vy +
                     3.0 * f.f4 * Vxy;
          }
        },
        opts.quad_panels, dI2[ix]);
  });

  const int rows_per_pt = opts.with_compat ? 3 : 2;
  const int D = as.D;
  const int ncols = 10 + 2 * (D + 1);
  as.M.setZero(static_cast<long>(m) * n * rows_per_pt, ncols);

  const double h2_4 = hbar * hbar / 4.0;
  par::for_each_index(static_cast<std::size_t>(m) * n, opts.exec,
                      [&](std::size_t idx) {
    const int ix = static_cast<int>(idx) / n;
    const int jy = static_cast<int>(idx) % n;
    const Vec2 q{as.xs[ix], as.ys[jy]};
    const double Vx = pot.d(1, 0, q), Vy = pot.d(0, 1, q);
    std::vector<double> Tx(D + 1), dTx(D + 1), Ty(D + 1), dTy(D + 1);
    cheb_eval(q.x, region.xmin, region.xmax, D, Tx.data(), dTx.data());
    cheb_eval(q.y, region.ymin, region.ymax, D, Ty.data(), dTy.data());
    const long r0 = static_cast<long>(idx) * rows_per_pt;
    // E3 row
    for (int k = 0; k < 10; ++k) {
      const FPolys f = f_polys(unit_A(k), q);
      as.M(r0, k) = dI1[jy][ix][k] + dI2[ix][jy][k] -
                    2.0 * (f.f2 * Vx + f.f3 * Vy);
    }
    for (int j = 0; j <= D; ++j) {
      as.M(r0, 10 + j) = dTy[j];
      as.M(r0, 10 + (D + 1) + j) = dTx[j];
    }
    // E4 row
    const double Vxxx = pot.d(3, 0, q), Vyyy = pot.d(0, 3, q);
    const double Vxxy = pot.d(2, 1, q), Vxyy = pot.d(1, 2, q);
    for (int k = 0; k < 10; ++k) {
      const FPolys f = f_polys(unit_A(k), q);
      double aterm = 0.0;
      if (k == kA300) aterm = 8.0 * (q.x * Vy - q.y * Vx);
      if (k == kA210) aterm = 2.0 * Vx;
      if (k == kA201) aterm = 2.0 * Vy;
      as.M(r0 + 1, k) =
          I1[jy][ix][k] * Vx + I2[ix][jy][k] * Vy -
          h2_4 * (f.f1 * Vxxx + f.f2 * Vxxy + f.f3 * Vxyy + f.f4 * Vyyy +
                  aterm);
    }
    for (int j = 0; j <= D; ++j) {
      as.M(r0 + 1, 10 + j) = Ty[j] * Vx;
      as.M(r0 + 1, 10 + (D + 1) + j) = Tx[j] * Vy;
    }
    // compatibility row (A block only)
    if (rows_per_pt == 3) {
      const double Vxx = pot.d(2, 0, q), Vxy = pot.d(1, 1, q),
                   Vyy = pot.d(0, 2, q);
      for (int k = 0; k < 10; ++k) {
        const A10 a = unit_A(k);
        const FPolys f = f_polys(a, q);
        const FPolys fx = f_polys_dx(a, q);
        const FPolys fy = f_polys_dy(a, q);
        const FSecond f2 = f_polys_second(a, q);
        const double t1 = 3 * f2.f1yy * Vx + 6 * fy.f1 * Vxy +
                          3 * f.f1 * Vxyy + f2.f2yy * Vy + 2 * fy.f2 * Vyy +
                          f.f2 * Vyyy;
        const double t2 = f2.f3xx * Vx + 2 * fx.f3 * Vxx + f.f3 * Vxxx +
                          3 * f2.f4xx * Vy + 6 * fx.f4 * Vxy + 3 * f.f4 * Vxxy;
        const double t3 =
            2.0 * (f2.f2xy * Vx + fx.f2 * Vxy + fy.f2 * Vxx + f.f2 * Vxxy +
                   f2.f3xy * Vy + fx.f3 * Vyy + fy.f3 * Vxy + f.f3 * Vxyy);
        as.M(r0 + 2, k) = t1 + t2 - t3;
      }
    }
  });
  return as;
}

double solution_rel_residual(const Eigen::MatrixXd& M,
                             const Eigen::VectorXd& u) {
  const Eigen::VectorXd r = (M * u).cwiseAbs();
  const Eigen::VectorXd scale = M.cwiseAbs() * u.cwiseAbs();
  const double smax = std::max(scale.maxCoeff(), 1e-30);
  return r.maxCoeff() / smax;
}

GFunction build_g1(const Potential& pot, const A10& A, Vec2 base,
                   const Region& region, int D, std::vector<double> c1,
                   int panels_per_gap, double gap) {
  auto R1 = [pot, A](double s, double y) {
    const Vec2 q{s, y};
    const FPolys f = f_polys(A, q);
    return 3.0 * f.f1 * pot.d(1, 0, q) + f.f2 * pot.d(0, 1, q);
  };
  auto dR1 = [pot, A](double s, double y) {
    const Vec2 q{s, y};
    const FPolys f = f_polys(A, q);
    const FPolys fy = f_polys_dy(A, q);
    return 3.0 * fy.f1 * pot.d(1, 0, q) + 3.0 * f.f1 * pot.d(1, 1, q) +
           fy.f2 * pot.d(0, 1, q) + f.f2 * pot.d(0, 2, q);
  };
  GFunction g;
  g.value = [=](Vec2 q) {
    std::vector<double> T(D + 1);
    cheb_eval(q.y, region.ymin, region.ymax, D, T.data(), nullptr);
    double c = 0.0;
    for (int j = 0; j <= D; ++j) c += c1[j] * T[j];
    const int panels =
        std::max(1, static_cast<int>(std::ceil(std::abs(q.x - base.x) / gap)) *
                        panels_per_gap);
    return c + gl_integrate([&](double s) { return R1(s, q.y); }, base.x, q.x,
                            panels);
  };
  g.grad = [=](Vec2 q) {
    std::vector<double> T(D + 1), dT(D + 1);
    cheb_eval(q.y, region.ymin, region.ymax, D, T.data(), dT.data());
    double dc = 0.0;
    for (int j = 0; j <= D; ++j) dc += c1[j] * dT[j];
    const int panels =
        std::max(1, static_cast<int>(std::ceil(std::abs(q.x - base.x) / gap)) *
                        panels_per_gap);
    const double gy =
        dc + gl_integrate([&](double s) { return dR1(s, q.y); }, base.x, q.x,
                          panels);
    return Vec2{R1(q.x, q.y), gy};
  };
  return g;
}

GFunction build_g2(const Potential& pot, const A10& A, Vec2 base,
                   const Region& region, int D, std::vector<double> c2,
                   int panels_per_gap, double gap) {
  auto R2 = [pot, A](double x, double t) {
    const Vec2 q{x, t};
    const FPolys f = f_polys(A, q);
    return f.f3 * pot.d(1, 0, q) + 3.0 * f.f4 * pot.d(0, 1, q);
  };
  auto dR2 = [pot, A](double x, double t) {
    const Vec2 q{x, t};
    const FPolys f = f_polys(A, q);
    const FPolys fx = f_polys_dx(A, q);
    return fx.f3 * pot.d(1, 0, q) + f.f3 * pot.d(2, 0, q) +
           3.0 * fx.f4 * pot.d(0, 1, q) + 3.0 * f.f4 * pot.d(1, 1, q);
  };
  GFunction g;
  g.value = [=](Vec2 q) {
    std::vector<double> T(D + 1);
    cheb_eval(q.x, region.xmin, region.xmax, D, T.data(), nullptr);
    double c = 0.0;
    for (int j = 0; j <= D; ++j) c += c2[j] * T[j];
    const int panels =
        std::max(1, static_cast<int>(std::ceil(std::abs(q.y - base.y) / gap)) *
                        panels_per_gap);
    return c + gl_integrate([&](double t) { return R2(q.x, t); }, base.y, q.y,
                            panels);
  };
  g.grad = [=](Vec2 q) {
    std::vector<double> T(D + 1), dT(D + 1);
    cheb_eval(q.x, region.xmin, region.xmax, D, T.data(), dT.data());
    double dc = 0.0;
    for (int j = 0; j <= D; ++j) dc += c2[j] * dT[j];
    const int panels =
        std::max(1, static_cast<int>(std::ceil(std::abs(q.y - base.y) / gap)) *
                        panels_per_gap);
    const double gx =
        dc + gl_integrate([&](double t) { return dR2(q.x, t); }, base.y, q.y,
                          panels);
    return Vec2{gx, R2(q.x, q.y)};
  };
  return g;
}

Reconstruction finish_reconstruction(const Potential& pot, const A10& A,
                                     const Assembly& as,
                                     const Eigen::VectorXd& c,
                                     const CertifyOptions& opts,
                                     double rel_residual) {
  Reconstruction rec;
  rec.base = as.base;
  rec.region = as.region;
  rec.max_rel_residual = rel_residual;
  const int D = as.D;
  rec.c1_coeffs.assign(c.data(), c.data() + (D + 1));
  rec.c2_coeffs.assign(c.data() + (D + 1), c.data() + 2 * (D + 1));
  const double gapx = (as.region.xmax - as.region.xmin) /
                      std::max<std::size_t>(1, as.xs.size() - 1);
  const double gapy = (as.region.ymax - as.region.ymin) /
                      std::max<std::size_t>(1, as.ys.size() - 1);
  rec.g1 = build_g1(pot, A, as.base, as.region, D, rec.c1_coeffs,
                    opts.quad_panels, gapx);
  rec.g2 = build_g2(pot, A, as.base, as.region, D, rec.c2_coeffs,
                    opts.quad_panels, gapy);
  return rec;
}

}  // namespace

Reconstruction reconstruct_g(const Potential& pot, const A10& A, Vec2 base,
                             const Region& region, double hbar,
                             const CertifyOptions& opts) {
  (void)base;  // the assembly pins the base to the central grid node
  Assembly as = assemble(pot, hbar, region, opts);
  const Eigen::Map<const Eigen::VectorXd> Av(A.data(), 10);
  const auto MA = as.M.leftCols(10);
  const auto Mc = as.M.rightCols(as.M.cols() - 10);
  const Eigen::VectorXd rhs = -(MA * Av);
  const Eigen::VectorXd c = Mc.householderQr().solve(rhs);
  Eigen::VectorXd u(as.M.cols());
  u << Av, c;
  const double rel = solution_rel_residual(as.M, u);
  Reconstruction rec = finish_reconstruction(pot, A, as, c, opts, rel);
  if (rel > opts.tol)
    throw Error(ErrorCode::IncompatibleAnsatz,
                "no third-order integral with this A (relative residual " +
                    std::to_string(rel) + ")");
  return rec;
}

double certified_direction_residual(const Potential& pot, double hbar,
                                    const Region& region, const A10& A,
                                    const CertifyOptions& opts) {
  Assembly as = assemble(pot, hbar, region, opts);
  const Eigen::Map<const Eigen::VectorXd> Av(A.data(), 10);
  const auto MA = as.M.leftCols(10);
  const auto Mc = as.M.rightCols(as.M.cols() - 10);
  const Eigen::VectorXd c = Mc.householderQr().solve(-(MA * Av));
  Eigen::VectorXd u(as.M.cols());
  u << Av, c;
  return solution_rel_residual(as.M, u);
}

CertifiedIntegral certify_integrability(const Potential& pot, double hbar,
                                        const Region& region,
                                        const CertifyOptions& opts) {
  Assembly as = assemble(pot, hbar, region, opts);
  const auto MA = as.M.leftCols(10);
  const auto Mc = as.M.rightCols(as.M.cols() - 10);

  // restrict the A search to the complement of the excluded directions
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(10, 10);
  if (!opts.exclude.empty()) {
    Eigen::MatrixXd E(10, opts.exclude.size());
    for (std::size_t i = 0; i < opts.exclude.size(); ++i)
      for (int k = 0; k < 10; ++k) E(k, i) = opts.exclude[i][k];
    // orthonormal basis of the complement via full QR of E
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(E);
    Eigen::MatrixXd Q = qr.householderQ();
    const int r = static_cast<int>(opts.exclude.size());
    B = Q.rightCols(10 - r);
  }

  const Eigen::MatrixXd MAred = MA * B;
  // project out the span of the c block
  Eigen::HouseholderQR<Eigen::MatrixXd> qrc(Mc);
  const Eigen::MatrixXd Qc =
      qrc.householderQ() * Eigen::MatrixXd::Identity(as.M.rows(), Mc.cols());
  const Eigen::MatrixXd MAperp = MAred - Qc * (Qc.transpose() * MAred);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(MAperp,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sing = svd.singularValues();
  const Eigen::VectorXd a_red = svd.matrixV().col(sing.size() - 1);
  const Eigen::VectorXd Av = B * a_red;

  CertifiedIntegral cert;
  cert.hbar = hbar;
  for (int k = 0; k < 10; ++k) cert.A[k] = Av(k);
  cert.sigma_rel = sing(sing.size() - 1) / std::max(sing(0), 1e-300);
  const Eigen::VectorXd c = Mc.householderQr().solve(-(MA * Av));
  Eigen::VectorXd u(as.M.cols());
  u << Av, c;
  cert.rel_residual = solution_rel_residual(as.M, u);
  cert.rec = finish_reconstruction(pot, cert.A, as, c, opts,
                                   cert.rel_residual);
  return cert;
}

ThirdOrderIntegral CertifiedIntegral::integral() const {
  ThirdOrderIntegral X;
  X.A = A;
  X.g1 = rec.g1;
  X.g2 = rec.g2;
  X.hbar = hbar;
  X.verified = true;
  X.residual = rel_residual;
  X.tol = 1e-6;
  return X;
}

// ----------------------------------------------------------------------
// cache records

using nlohmann::ordered_json;

CertificateRecord make_certificate(const std::string& potential_id,
                                   const ParamMap& params,
                                   const CertifiedIntegral& cert) {
  CertificateRecord rec;
  rec.potential_id = potential_id;
  rec.params = params;
  rec.hbar = cert.hbar;
  rec.A = cert.A;
  rec.region = cert.rec.region;
  rec.base = cert.rec.base;
  rec.cheb_degree = static_cast<int>(cert.rec.c1_coeffs.size()) - 1;
  rec.c1_coeffs = cert.rec.c1_coeffs;
  rec.c2_coeffs = cert.rec.c2_coeffs;
  rec.residual = cert.rel_residual;
  rec.tolerance = 1e-6;
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", std::gmtime(&t));
  rec.date = buf;
  return rec;
}

void save_certificate(const std::string& path, const CertificateRecord& rec) {
  ordered_json j;
  j["potential_id"] = rec.potential_id;
  j["params"] = rec.params;
  j["hbar"] = rec.hbar;
  j["A"] = rec.A;
  j["region"] = {rec.region.xmin, rec.region.xmax, rec.region.ymin,
                 rec.region.ymax};
  j["base"] = {rec.base.x, rec.base.y};
  j["cheb_degree"] = rec.cheb_degree;
  j["c1"] = rec.c1_coeffs;
  j["c2"] = rec.c2_coeffs;
  j["residual"] = rec.residual;
  j["tolerance"] = rec.tolerance;
  j["date"] = rec.date;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << "\n";
}

CertificateRecord load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read " + path);
  ordered_json j;
  in >> j;
  CertificateRecord rec;
  rec.potential_id = j.at("potential_id").get<std::string>();
  rec.params = j.at("params").get<ParamMap>();
  rec.hbar = j.at("hbar").get<double>();
  auto av = j.at("A").get<std::vector<double>>();
  std::copy(av.begin(), av.end(), rec.A.begin());
  auto rv = j.at("region").get<std::vector<double>>();
  rec.region = {rv[0], rv[1], rv[2], rv[3]};
  auto bv = j.at("base").get<std::vector<double>>();
  rec.base = {bv[0], bv[1]};
  rec.cheb_degree = j.at("cheb_degree").get<int>();
  rec.c1_coeffs = j.at("c1").get<std::vector<double>>();
  rec.c2_coeffs = j.at("c2").get<std::vector<double>>();
  rec.residual = j.at("residual").get<double>();
  rec.tolerance = j.at("tolerance").get<double>();
  rec.date = j.at("date").get<std::string>();
  return rec;
}

ThirdOrderIntegral certificate_integral(const CertificateRecord& rec) {
  const Potential pot = make_potential(rec.potential_id, rec.params);
  ThirdOrderIntegral X;
  X.A = rec.A;
  X.hbar = rec.hbar;
  const double gapx =
      (rec.region.xmax - rec.region.xmin) / std::max(1, rec.cheb_degree);
  const double gapy =
      (rec.region.ymax - rec.region.ymin) / std::max(1, rec.cheb_degree);
  X.g1 = build_g1(pot, rec.A, rec.base, rec.region, rec.cheb_degree,
                  rec.c1_coeffs, 2, gapx);
  X.g2 = build_g2(pot, rec.A, rec.base, rec.region, rec.cheb_degree,
                  rec.c2_coeffs, 2, gapy);
  X.verified = rec.residual <= rec.tolerance;
  X.residual = rec.residual;
  X.tol = rec.tolerance;
  return X;
}

}  // namespace superint
