#include "superint/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace superint {

namespace {
constexpr int kAgmMax = 32;
constexpr double kAgmTol = 1e-16;
}  // namespace

JacobiTriple jacobi_sn_cn_dn(double u, double k) {
  if (k < 0.0 || k > 1.0) fail(ErrorCode::InvalidArgument, "modulus k outside [0,1]");
  const double m = k * k;
  if (m < 1e-16) {
    // k -> 0: circular functions, first m-correction kept for accuracy
    double s = std::sin(u), c = std::cos(u);
    double corr = 0.25 * m * (u - s * c);
    return {s - corr * c, c + corr * s, 1.0 - 0.5 * m * s * s};
  }
  if (1.0 - m < 1e-16) {
    const double s = std::tanh(u), c = 1.0 / std::cosh(u);
    return {s, c, c};
  }
  double a[kAgmMax], c[kAgmMax];
  double an = 1.0, bn = std::sqrt(1.0 - m);
  int n = 0;
  for (; n < kAgmMax; ++n) {
    a[n] = an;
    c[n] = 0.5 * (an - bn);
    const double a1 = 0.5 * (an + bn);
    const double b1 = std::sqrt(an * bn);
    an = a1;
    bn = b1;
    if (c[n] < kAgmTol * a[n]) break;
  }
  if (n == kAgmMax) --n;
  double phi = std::ldexp(an * u, n);  // 2^n a_n u
  double phi_prev = phi;
  for (int j = n; j >= 1; --j) {
    phi_prev = phi;
    phi = 0.5 * (phi + std::asin(std::clamp(c[j] / a[j] * std::sin(phi), -1.0, 1.0)));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  // dn = cos(phi0) / cos(phi1 - phi0)
  const double dn = cn / std::cos(phi_prev - phi);
  return {sn, cn, dn};
}

double elliptic_K(double k) {
  if (k >= 1.0) fail(ErrorCode::InvalidArgument, "K(k) diverges at k=1");
  double an = 1.0, bn = std::sqrt(1.0 - k * k);
  for (int i = 0; i < kAgmMax && std::abs(an - bn) > kAgmTol * an; ++i) {
    const double a1 = 0.5 * (an + bn);
    bn = std::sqrt(an * bn);
    an = a1;
  }
  return M_PI / (2.0 * an);
}

double elliptic_E(double k) {
  if (k >= 1.0) return 1.0;
  double an = 1.0, bn = std::sqrt(1.0 - k * k), cn = k;
  double sum = 0.5 * cn * cn;
  double pow2 = 1.0;
  for (int i = 1; i < kAgmMax; ++i) {
    const double a1 = 0.5 * (an + bn);
    const double c1 = 0.5 * (an - bn);
    bn = std::sqrt(an * bn);
    an = a1;
    pow2 *= 2.0;
    sum += pow2 * 0.5 * c1 * c1;
    if (c1 < kAgmTol) break;
  }
  return elliptic_K(k) * (1.0 - sum);
}

double jacobi_epsilon(double u, double k) {
  const double m = k * k;
  if (m < 1e-16) return u;  // dn ~ 1
  if (1.0 - m < 1e-16) return std::tanh(u);
  double a[kAgmMax], c[kAgmMax];
  double an = 1.0, bn = std::sqrt(1.0 - m);
  int n = 0;
  for (; n < kAgmMax; ++n) {
    a[n] = an;
    c[n] = 0.5 * (an - bn);
    const double a1 = 0.5 * (an + bn);
    const double b1 = std::sqrt(an * bn);
    an = a1;
    bn = b1;
    if (c[n] < kAgmTol * a[n]) break;
  }
  if (n == kAgmMax) --n;
  // E/K = 1 - sum_{j>=0} 2^{j-1} c_j^2, c_0 = k
  double eok = 1.0 - 0.5 * m;
  double pw = 1.0;
  for (int j = 1; j <= n; ++j) {
    pw *= 2.0;
    eok -= 0.5 * pw * c[j] * c[j];
  }
  // angles phi_j at every Landen level (phi_0 = am(u))
  double phis[kAgmMax + 1];
  double phi = std::ldexp(an * u, n);
  phis[n] = phi;
  for (int j = n; j >= 1; --j) {
    phi = 0.5 * (phi + std::asin(std::clamp(c[j] / a[j] * std::sin(phi), -1.0, 1.0)));
    phis[j - 1] = phi;
  }
  double zeta = 0.0;
  for (int j = 1; j <= n; ++j) zeta += c[j] * std::sin(phis[j]);
  return eok * u + zeta;
}

JacobiTriple jacobi_via_landen_step(double u, double k) {
  // sn(u,k) = (1+k1) sn(v,k1) / (1 + k1 sn^2(v,k1)), v = u/(1+k1),
  // k1 = (1 - k') / (1 + k'), k' = sqrt(1-k^2)
  const double kp = std::sqrt(std::max(0.0, 1.0 - k * k));
  const double k1 = (1.0 - kp) / (1.0 + kp);
  const double v = u / (1.0 + k1);
  const JacobiTriple t = jacobi_sn_cn_dn(v, k1);
  const double den = 1.0 + k1 * t.sn * t.sn;
  const double sn = (1.0 + k1) * t.sn / den;
  const double cn = t.cn * t.dn / den;
  const double dn = (1.0 - k1 * t.sn * t.sn) / den;
  return {sn, cn, dn};
}

double weierstrass_discriminant(double g2, double g3) {
  return g2 * g2 * g2 - 27.0 * g3 * g3;
}

WeierstrassValue weierstrass_p(double x, double g2, double g3) {
  constexpr double kPoleGuard = 1e-7;
  if (g2 == 0.0 && g3 == 0.0) {
    if (std::abs(x) < kPoleGuard) fail(ErrorCode::PoleProximity, "wp at lattice point");
    return {1.0 / (x * x), -2.0 / (x * x * x)};
  }
  // roots of 4 t^3 - g2 t - g3
  const double disc = weierstrass_discriminant(g2, g3);
  if (disc >= 0.0) {
    // three real roots via trigonometric method: t = cos-form
    // 4t^3 - g2 t - g3 = 0  =>  t = sqrt(g2/3) cos(...) when g2 > 0
    double e[3];
    const double p = -g2 / 4.0, q = -g3 / 4.0;  // t^3 + p t + q = 0
    const double rr = std::sqrt(-4.0 * p / 3.0);
    double arg = std::clamp(-4.0 * q / (rr * rr * rr), -1.0, 1.0);
    const double th = std::acos(arg) / 3.0;
    for (int i = 0; i < 3; ++i)
      e[i] = rr * std::cos(th - 2.0 * M_PI * i / 3.0);
    std::sort(e, e + 3);
    const double e3 = e[0], e2 = e[1], e1 = e[2];
    const double lam2 = e1 - e3;
    const double lam = std::sqrt(lam2);
    const double m = (e2 - e3) / lam2;
    const JacobiTriple t = jacobi_sn_cn_dn(lam * x, std::sqrt(std::clamp(m, 0.0, 1.0)));
    if (std::abs(t.sn) < kPoleGuard) fail(ErrorCode::PoleProximity, "wp near pole");
    const double s2 = t.sn * t.sn;
    return {e3 + lam2 / s2, -2.0 * lam2 * lam * t.cn * t.dn / (s2 * t.sn)};
  }
  // one real root c0; H^2 = 3 c0^2 - g2/4
  // solve by Cardano for the real root
  const double p = -g2 / 4.0, q = -g3 / 4.0;
  const double D = q * q / 4.0 + p * p * p / 27.0;  // > 0 here
  const double sq = std::sqrt(D);
  const double c0 = std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq);
  const double H2 = 3.0 * c0 * c0 - g2 / 4.0;
  const double H = std::sqrt(H2);
  const double m = 0.5 - 3.0 * c0 / (4.0 * H);
  const double w = 2.0 * std::sqrt(H) * x;
  const JacobiTriple t = jacobi_sn_cn_dn(w, std::sqrt(std::clamp(m, 0.0, 1.0)));
  const double den = 1.0 - t.cn;
  if (std::abs(den) < kPoleGuard * kPoleGuard) fail(ErrorCode::PoleProximity, "wp near pole");
  const double pv = c0 + H * (1.0 + t.cn) / den;
  const double dv = -4.0 * H * std::sqrt(H) * t.sn * t.dn / (den * den);
  return {pv, dv};
}

// ----------------------------------------------------------------------
// Dormand-Prince 5(4) with dense output (classic coefficients).

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;
}  // namespace dp

std::array<double, 2> PainleveSolution::rhs(double x, double w,
                                            double wp) const {
  switch (kind_) {
    case PainleveKind::P_I:
      return {wp, 6.0 * w * w + x};
    case PainleveKind::P_II:
      return {wp, 2.0 * w * w * w + x * w + params_.a};
    case PainleveKind::P_IV: {
      if (std::abs(w) < 1e-12) fail(ErrorCode::PoleProximity, "P_IV at w=0");
      return {wp, wp * wp / (2.0 * w) + 1.5 * w * w * w + 4.0 * x * w * w +
                      2.0 * (x * x - params_.a) * w + params_.b / w};
    }
  }
  return {0.0, 0.0};
}

void PainleveSolution::integrate_direction(double x0, double w0, double w0p,
                                           double xend, double rtol) {
  constexpr double kBlowup = 1e8;
  auto& store = (xend >= x0) ? fwd_ : bwd_;
  const double dir = (xend >= x0) ? 1.0 : -1.0;
  double x = x0;
  std::array<double, 2> y = {w0, w0p};
  std::array<double, 2> k1 = rhs(x, y[0], y[1]);
  double h = dir * 1e-3 * std::max(1.0, std::abs(xend - x0));
  const double atol = rtol;
  int steps = 0;
  while (dir * (xend - x) > 1e-14 && steps < 2000000) {
    ++steps;
    if (dir * (x + h - xend) > 0.0) h = xend - x;
    std::array<double, 2> k2, k3, k4, k5, k6, k7, y5;
    auto stage = [&](double cf, double s1, double s2) {
      return std::array<double, 2>{y[0] + h * s1, y[1] + h * s2};
    };
    {
      auto t = stage(dp::c2, dp::a21 * k1[0], dp::a21 * k1[1]);
      k2 = rhs(x + dp::c2 * h, t[0], t[1]);
      t = stage(dp::c3, dp::a31 * k1[0] + dp::a32 * k2[0],
                dp::a31 * k1[1] + dp::a32 * k2[1]);
      k3 = rhs(x + dp::c3 * h, t[0], t[1]);
      t = stage(dp::c4, dp::a41 * k1[0] + dp::a42 * k2[0] + dp::a43 * k3[0],
                dp::a41 * k1[1] + dp::a42 * k2[1] + dp::a43 * k3[1]);
      k4 = rhs(x + dp::c4 * h, t[0], t[1]);
      t = stage(dp::c5,
                dp::a51 * k1[0] + dp::a52 * k2[0] + dp::a53 * k3[0] + dp::a54 * k4[0],
                dp::a51 * k1[1] + dp::a52 * k2[1] + dp::a53 * k3[1] + dp::a54 * k4[1]);
      k5 = rhs(x + dp::c5 * h, t[0], t[1]);
      t = stage(1.0,
                dp::a61 * k1[0] + dp::a62 * k2[0] + dp::a63 * k3[0] + dp::a64 * k4[0] + dp::a65 * k5[0],
                dp::a61 * k1[1] + dp::a62 * k2[1] + dp::a63 * k3[1] + dp::a64 * k4[1] + dp::a65 * k5[1]);
      k6 = rhs(x + h, t[0], t[1]);
      for (int i = 0; i < 2; ++i)
        y5[i] = y[i] + h * (dp::b1 * k1[i] + dp::b3 * k3[i] + dp::b4 * k4[i] +
                            dp::b5 * k5[i] + dp::b6 * k6[i]);
      k7 = rhs(x + h, y5[0], y5[1]);
    }
    double errn = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double e = h * (dp::e1 * k1[i] + dp::e3 * k3[i] + dp::e4 * k4[i] +
                            dp::e5 * k5[i] + dp::e6 * k6[i] + dp::e7 * k7[i]);
      errn += (e / sc) * (e / sc);
    }
    errn = std::sqrt(0.5 * errn);
    if (errn <= 1.0) {
      Segment seg;
      seg.x0 = x;
      seg.h = h;
      for (int i = 0; i < 2; ++i) {
        const double ydiff = y5[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        auto& c = (i == 0) ? seg.c0 : seg.c1;
        c[0] = y[i];
        c[1] = ydiff;
        c[2] = bspl;
        c[3] = -h * k7[i] + ydiff - bspl;
        c[4] = h * (dp::d1 * k1[i] + dp::d3 * k3[i] + dp::d4 * k4[i] +
                    dp::d5 * k5[i] + dp::d6 * k6[i] + dp::d7 * k7[i]);
      }
      store.push_back(seg);
      x += h;
      y = y5;
      k1 = k7;
      if (std::abs(y[0]) > kBlowup || std::abs(y[1]) > kBlowup * kBlowup) {
        poles_.push_back(x);
        break;
      }
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(errn, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x))) {
      poles_.push_back(x);
      break;
    }
  }
  if (dir > 0)
    cov_max_ = x;
  else
    cov_min_ = x;
}

PainleveSolution::PainleveSolution(PainleveKind kind, PainleveParams params,
                                   double x0, double w0, double w0p, double xa,
                                   double xb, double rtol)
    : kind_(kind), params_(params), x0_(x0), cov_min_(x0), cov_max_(x0) {
  if (xa > x0 || xb < x0) fail(ErrorCode::InvalidArgument, "x0 outside [xa, xb]");
  if (xb > x0) integrate_direction(x0, w0, w0p, xb, rtol);
  if (xa < x0) integrate_direction(x0, w0, w0p, xa, rtol);
}

const PainleveSolution::Segment* PainleveSolution::find_segment(
    double x) const {
  auto in = [x](const Segment& s) {
    const double lo = std::min(s.x0, s.x0 + s.h);
    const double hi = std::max(s.x0, s.x0 + s.h);
    return x >= lo - 1e-14 && x <= hi + 1e-14;
  };
  const auto& store = (x >= x0_) ? fwd_ : bwd_;
  // binary search: segments ordered along direction
  std::size_t lo = 0, hi = store.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    const Segment& s = store[mid];
    if (in(s)) return &s;
    const bool before = (x >= x0_) ? (x < s.x0) : (x > s.x0);
    if (before)
      hi = mid;
    else
      lo = mid + 1;
  }
  return nullptr;
}

std::array<double, 2> PainleveSolution::eval(double x) const {
  if (x < cov_min_ - 1e-12 || x > cov_max_ + 1e-12) {
    for (double p : poles_) {
      if ((p >= x0_ && x >= p) || (p <= x0_ && x <= p))
        fail(ErrorCode::PoleCrossed, "movable pole between x0 and x");
    }
    fail(ErrorCode::NotCached, "x outside cached interval");
  }
  const Segment* s = find_segment(std::clamp(x, cov_min_, cov_max_));
  if (!s) fail(ErrorCode::NotCached, "no dense segment at x");
  const double th = (x - s->x0) / s->h;
  const double th1 = 1.0 - th;
  auto ev = [&](const std::array<double, 5>& c) {
    return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
  };
  return {ev(s->c0), ev(s->c1)};
}

double PainleveSolution::ode_residual(double x) const {
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  if (x - 2 * h < cov_min_ || x + 2 * h > cov_max_) {
    const double xs = std::clamp(x, cov_min_ + 2 * h, cov_max_ - 2 * h);
    return ode_residual(xs);
  }
  auto wp_at = [this](double t) { return eval(t)[1]; };
  const double wpp = (wp_at(x - 2 * h) - 8 * wp_at(x - h) + 8 * wp_at(x + h) -
                      wp_at(x + 2 * h)) /
                     (12.0 * h);
  const auto v = eval(x);
  return std::abs(wpp - rhs(x, v[0], v[1])[1]);
}

}  // namespace superint
