#include "superint/trajectory_algebraic.hpp"

#include <algorithm>
#include <cmath>

namespace superint {

std::pair<double, double> momenta_from_energies(const Potential& pot, double x,
                                                double y, double E1, double E2,
                                                int s1, int s2) {
  const double r1 = 2.0 * (E1 - pot.x_axis().v(x));
  const double r2 = 2.0 * (E2 - pot.y_axis().v(y));
  if (r1 < 0.0 || r2 < 0.0)
    fail(ErrorCode::ClassicallyForbidden, "negative momentum radicand");
  return {s1 * std::sqrt(r1), s2 * std::sqrt(r2)};
}

double implicit_residual(const Potential& pot, const ThirdOrderIntegral& X,
                         double x, double y, double E1, double E2, double K,
                         int s1, int s2) {
  const auto [p1, p2] = momenta_from_energies(pot, x, y, E1, E2, s1, s2);
  PhaseState s{x, y, p1, p2, 0.0};
  return eval_X_classical(X, s) - K;
}

namespace {

struct Sheet {
  const Potential* pot;
  const ThirdOrderIntegral* X;
  double E1, E2, K;
  int s1, s2;

  // radicands
  double rad1(double x) const { return 2.0 * (E1 - pot->x_axis().v(x)); }
  double rad2(double y) const { return 2.0 * (E2 - pot->y_axis().v(y)); }

  double F(double x, double y) const {
    const double r1 = rad1(x), r2 = rad2(y);
    if (r1 < 0.0 || r2 < 0.0)
      fail(ErrorCode::ClassicallyForbidden, "off the allowed rectangle");
    PhaseState s{x, y, s1 * std::sqrt(r1), s2 * std::sqrt(r2), 0.0};
    return eval_X_classical(*X, s) - K;
  }

  // analytic gradient of F in (x, y)
  Vec2 gradF(double x, double y) const {
    const double r1 = rad1(x), r2 = rad2(y);
    const double p1 = s1 * std::sqrt(std::max(r1, 1e-300));
    const double p2 = s2 * std::sqrt(std::max(r2, 1e-300));
    const Vec2 q{x, y};
    const FPolys f = f_polys(X->A, q);
    const FPolys fx = f_polys_dx(X->A, q);
    const FPolys fy = f_polys_dy(X->A, q);
    const Vec2 g1g = X->g1.g(q), g2g = X->g2.g(q);
    const double g1v = X->g1.v(q), g2v = X->g2.v(q);
    const double dF_dp1 =
        2.0 * (3.0 * f.f1 * p1 * p1 + 2.0 * f.f2 * p1 * p2 + f.f3 * p2 * p2) +
        2.0 * g1v;
    const double dF_dp2 =
        2.0 * (f.f2 * p1 * p1 + 2.0 * f.f3 * p1 * p2 + 3.0 * f.f4 * p2 * p2) +
        2.0 * g2v;
    const double dp1_dx = -pot->x_axis().d1(x) / p1;
    const double dp2_dy = -pot->y_axis().d1(y) / p2;
    const double Fx = 2.0 * (fx.f2 * p1 * p1 * p2 + fx.f3 * p1 * p2 * p2 +
                             fx.f4 * p2 * p2 * p2) +
                      2.0 * (g1g.x * p1 + g2g.x * p2) + dF_dp1 * dp1_dx;
    const double Fy = 2.0 * (fy.f1 * p1 * p1 * p1 + fy.f2 * p1 * p1 * p2 +
                             fy.f3 * p1 * p2 * p2) +
                      2.0 * (g1g.y * p1 + g2g.y * p2) + dF_dp2 * dp2_dy;
    return {Fx, Fy};
  }
};

// root of rad(x) = 0 near x0 (turning point), Newton with bisection fallback
double find_turning(const std::function<double(double)>& rad, double x0,
                    double dir, double span) {
  double a = x0, b = x0 + dir * span;
  double fa = rad(a), fb = rad(b);
  int expand = 0;
  while (fa * fb > 0 && expand++ < 40) {
    b += dir * span;
    fb = rad(b);
  }
  if (fa * fb > 0) fail(ErrorCode::BranchDeadEnd, "no turning point bracket");
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = rad(m);
    if (fa * fm <= 0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

AlgebraicOrbit trace_orbit(const Potential& pot, const ThirdOrderIntegral& X,
                           double E1, double E2, double K, Vec2 seed,
                           const TraceOptions& opts) {
  if (!pot.separable())
    fail(ErrorCode::NotSeparable, "orbit tracing needs a separable potential");
  AlgebraicOrbit orbit;
  orbit.E1 = E1;
  orbit.E2 = E2;
  orbit.K = K;

  Sheet sh{&pot, &X, E1, E2, K, +1, +1};

  // pick the sign pair minimizing |F| at the seed
  double bestF = 1e300;
  int bs1 = 1, bs2 = 1;
  for (int s1 : {-1, 1})
    for (int s2 : {-1, 1}) {
      sh.s1 = s1;
      sh.s2 = s2;
      double f;
      try {
        f = std::abs(sh.F(seed.x, seed.y));
      } catch (const Error&) {
        continue;
      }
      if (f < bestF) {
        bestF = f;
        bs1 = s1;
        bs2 = s2;
      }
    }
  // scale of X for the seed tolerance
  const double Kscale = std::max({std::abs(K), std::abs(E1), std::abs(E2), 1.0});
  if (bestF > opts.seed_tol * 100.0 * Kscale)
    fail(ErrorCode::SeedNotOnOrbit,
         "implicit residual at seed: " + std::to_string(bestF));
  sh.s1 = bs1;
  sh.s2 = bs2;

  double x = seed.x, y = seed.y;
  // polish the seed onto the curve
  for (int it = 0; it < 8; ++it) {
    const double f = sh.F(x, y);
    const Vec2 g = sh.gradF(x, y);
    const double n2 = g.x * g.x + g.y * g.y;
    if (n2 == 0.0) break;
    x -= f * g.x / n2;
    y -= f * g.y / n2;
  }

  const double h = opts.step;
  Vec2 tangent{0.0, 0.0};
  {
    const Vec2 g = sh.gradF(x, y);
    const double n = std::hypot(g.x, g.y);
    tangent = {-g.y / n, g.x / n};
  }

  orbit.curve.push_back({x, y, sh.s1, sh.s2, sh.F(x, y)});
  const int seed_s1 = sh.s1, seed_s2 = sh.s2;
  int folds = 0;
  double arclen = 0.0;

  auto fold_threshold = [&](double rad, double drad) {
    return rad < std::abs(drad) * 8.0 * h;
  };

  for (int stepi = 0; stepi < opts.max_points; ++stepi) {
    const double r1 = sh.rad1(x), r2 = sh.rad2(y);
    const double dr1 = -2.0 * pot.x_axis().d1(x);
    const double dr2 = -2.0 * pot.y_axis().d1(y);
    const bool fold_x = fold_threshold(r1, dr1);
    const bool fold_y = fold_threshold(r2, dr2);

    if (fold_x && fold_y) {
      orbit.status = AlgebraicOrbit::Status::DeadEnd;
      return orbit;
    }
    if (fold_x || fold_y) {
      if (++folds > opts.max_folds) {
        orbit.status = AlgebraicOrbit::Status::DeadEnd;
        return orbit;
      }
      if (fold_x) {
        // place the fold point, flip s1, continue in y
        auto radf = [&](double xx) { return sh.rad1(xx); };
        const double dirx = (dr1 < 0) ? +1.0 : -1.0;  // rad decreases this way
        const double xt = find_turning(radf, x, dirx, 4.0 * h);
        const double ystep = (tangent.y >= 0 ? 1.0 : -1.0) * h;
        orbit.curve.push_back({xt, y, sh.s1, sh.s2, 0.0});
        sh.s1 = -sh.s1;
        double ynew = y + ystep;
        // solve F(x, ynew) = 0 for x on the flipped sheet by bisection
        // between xt (exclusive) and a point a few steps inside
        double xin = xt - dirx * 1e-14;
        double xfar = xt - dirx * 8.0 * h;
        double ffar;
        bool ok = false;
        for (int widen = 0; widen < 20; ++widen) {
          try {
            ffar = sh.F(xfar, ynew);
          } catch (const Error&) {
            xfar = 0.5 * (xfar + xt);
            continue;
          }
          // near the turning point F has the sign of its p1->0 limit
          double fnear;
          try {
            fnear = sh.F(xt - dirx * std::abs(xt - xfar) * 1e-6, ynew);
          } catch (const Error&) {
            xfar = 0.5 * (xfar + xt);
            continue;
          }
          if (fnear * ffar <= 0.0) {
            double a = xt - dirx * std::abs(xt - xfar) * 1e-6, b = xfar;
            double fa = fnear;
            for (int it = 0; it < 80; ++it) {
              const double m = 0.5 * (a + b);
              double fm;
              try {
                fm = sh.F(m, ynew);
              } catch (const Error&) {
                a = m;
                continue;
              }
              if (fa * fm <= 0)
                b = m;
              else {
                a = m;
                fa = fm;
              }
            }
            x = 0.5 * (a + b);
            y = ynew;
            ok = true;
            break;
          }
          xfar = xt - dirx * std::abs(xt - xfar) * 1.7;
        }
        if (!ok) {
          orbit.status = AlgebraicOrbit::Status::DeadEnd;
          return orbit;
        }
        tangent = {-dirx * 0.2, ystep > 0 ? 1.0 : -1.0};
        const double tn = std::hypot(tangent.x, tangent.y);
        tangent = {tangent.x / tn, tangent.y / tn};
        arclen += h;
      } else {
        auto radf = [&](double yy) { return sh.rad2(yy); };
        const double diry = (dr2 < 0) ? +1.0 : -1.0;
        const double yt = find_turning(radf, y, diry, 4.0 * h);
        const double xstep = (tangent.x >= 0 ? 1.0 : -1.0) * h;
        orbit.curve.push_back({x, yt, sh.s1, sh.s2, 0.0});
        sh.s2 = -sh.s2;
        double xnew = x + xstep;
        double yin = yt - diry * 1e-14;
        (void)yin;
        double yfar = yt - diry * 8.0 * h;
        bool ok = false;
        for (int widen = 0; widen < 20; ++widen) {
          double ffar, fnear;
          try {
            ffar = sh.F(xnew, yfar);
            fnear = sh.F(xnew, yt - diry * std::abs(yt - yfar) * 1e-6);
          } catch (const Error&) {
            yfar = 0.5 * (yfar + yt);
            continue;
          }
          if (fnear * ffar <= 0.0) {
            double a = yt - diry * std::abs(yt - yfar) * 1e-6, b = yfar;
            double fa = fnear;
            for (int it = 0; it < 80; ++it) {
              const double m = 0.5 * (a + b);
              double fm;
              try {
                fm = sh.F(xnew, m);
              } catch (const Error&) {
                a = m;
                continue;
              }
              if (fa * fm <= 0)
                b = m;
              else {
                a = m;
                fa = fm;
              }
            }
            y = 0.5 * (a + b);
            x = xnew;
            ok = true;
            break;
          }
          yfar = yt - diry * std::abs(yt - yfar) * 1.7;
        }
        if (!ok) {
          orbit.status = AlgebraicOrbit::Status::DeadEnd;
          return orbit;
        }
        tangent = {xstep > 0 ? 1.0 : -1.0, -diry * 0.2};
        const double tn = std::hypot(tangent.x, tangent.y);
        tangent = {tangent.x / tn, tangent.y / tn};
        arclen += h;
      }
    } else {
      // regular predictor-corrector step
      Vec2 g = sh.gradF(x, y);
      double n = std::hypot(g.x, g.y);
      Vec2 t{-g.y / n, g.x / n};
      if (t.x * tangent.x + t.y * tangent.y < 0.0) t = {-t.x, -t.y};
      double xn = x + h * t.x, yn = y + h * t.y;
      bool ok = true;
      for (int it = 0; it < 6; ++it) {
        double f;
        try {
          f = sh.F(xn, yn);
          g = sh.gradF(xn, yn);
        } catch (const Error&) {
          ok = false;
          break;
        }
        const double n2 = g.x * g.x + g.y * g.y;
        if (n2 == 0.0) break;
        xn -= f * g.x / n2;
        yn -= f * g.y / n2;
        if (std::abs(f) < 1e-13 * Kscale) break;
      }
      if (!ok) {
        // shrink toward the fold; the fold branch will pick it up next
        tangent = t;
        x += 0.25 * h * t.x;
        y += 0.25 * h * t.y;
        arclen += 0.25 * h;
        continue;
      }
      tangent = t;
      x = xn;
      y = yn;
      arclen += h;
    }

    double res;
    try {
      res = sh.F(x, y);
    } catch (const Error&) {
      res = std::numeric_limits<double>::quiet_NaN();
    }
    orbit.curve.push_back({x, y, sh.s1, sh.s2, res});

    // closure check
    const auto& p0 = orbit.curve.front();
    if (arclen > 20.0 * h && sh.s1 == seed_s1 && sh.s2 == seed_s2 &&
        std::hypot(x - p0.x, y - p0.y) < 1.5 * h) {
      orbit.status = AlgebraicOrbit::Status::Closed;
      return orbit;
    }
  }
  orbit.status = AlgebraicOrbit::Status::OpenEnd;
  return orbit;
}

// ----------------------------------------------------------------------

namespace {
double point_segment_dist2(Vec2 p, Vec2 a, Vec2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx, dy = wy - t * vy;
  return dx * dx + dy * dy;
}

struct SegGrid {
  double xmin, ymin, cell;
  int nx, ny;
  std::vector<std::vector<int>> cells;  // segment indices
  const std::vector<Vec2>* pts;

  SegGrid(const std::vector<Vec2>& poly, double xmin_, double ymin_,
          double xmax_, double ymax_, int target_cells)
      : xmin(xmin_), ymin(ymin_), pts(&poly) {
    const double w = std::max(xmax_ - xmin_, 1e-12);
    const double h = std::max(ymax_ - ymin_, 1e-12);
    cell = std::max(w, h) / target_cells;
    nx = static_cast<int>(w / cell) + 2;
    ny = static_cast<int>(h / cell) + 2;
    cells.resize(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i + 1 < static_cast<int>(poly.size()); ++i) {
      // conservative rasterization over the segment bounding box
      const Vec2 a = poly[i], b = poly[i + 1];
      int ia = clampi((a.x - xmin) / cell), ib = clampi((b.x - xmin) / cell);
      int ja = clampj((a.y - ymin) / cell), jb = clampj((b.y - ymin) / cell);
      if (ia > ib) std::swap(ia, ib);
      if (ja > jb) std::swap(ja, jb);
      for (int ii = ia; ii <= ib; ++ii)
        for (int jj = ja; jj <= jb; ++jj)
          cells[static_cast<std::size_t>(ii) * ny + jj].push_back(i);
    }
  }
  int clampi(double v) const { return std::clamp(static_cast<int>(v), 0, nx - 1); }
  int clampj(double v) const { return std::clamp(static_cast<int>(v), 0, ny - 1); }

  double min_dist(Vec2 p) const {
    const int ci = clampi((p.x - xmin) / cell);
    const int cj = clampj((p.y - ymin) / cell);
    double best = 1e300;
    for (int ring = 0; ring < std::max(nx, ny); ++ring) {
      bool any = false;
      for (int ii = std::max(0, ci - ring); ii <= std::min(nx - 1, ci + ring); ++ii)
        for (int jj = std::max(0, cj - ring); jj <= std::min(ny - 1, cj + ring); ++jj) {
          if (std::max(std::abs(ii - ci), std::abs(cj - jj)) != ring) continue;
          for (int s : cells[static_cast<std::size_t>(ii) * ny + jj]) {
            any = true;
            best = std::min(best,
                            point_segment_dist2(p, (*pts)[s], (*pts)[s + 1]));
          }
        }
      if (best < 1e290 && ring > 0 &&
          std::sqrt(best) < (ring - 1) * cell) {
        break;  // no closer segment can exist outside this ring
      }
      (void)any;
    }
    return std::sqrt(best);
  }
};
}  // namespace

double hausdorff_distance(const std::vector<Vec2>& a,
                          const std::vector<Vec2>& b) {
  if (a.size() < 2 || b.size() < 2)
    fail(ErrorCode::InvalidArgument, "polylines need at least two points");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto* poly : {&a, &b})
    for (const Vec2& p : *poly) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  const double sx = std::max(xmax - xmin, 1e-12);
  const double sy = std::max(ymax - ymin, 1e-12);
  auto normalize = [&](const std::vector<Vec2>& poly) {
    std::vector<Vec2> out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i)
      out[i] = {(poly[i].x - xmin) / sx, (poly[i].y - ymin) / sy};
    return out;
  };
  const std::vector<Vec2> na = normalize(a), nb = normalize(b);
  const SegGrid ga(na, 0, 0, 1, 1, 128), gb(nb, 0, 0, 1, 1, 128);
  double h = 0.0;
  for (const Vec2& p : na) h = std::max(h, gb.min_dist(p));
  for (const Vec2& p : nb) h = std::max(h, ga.min_dist(p));
  return h;
}

}  // namespace superint
