#include "superint/potentials.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "superint/special_functions.hpp"

namespace superint {

namespace {

constexpr double kPoleGuardRel = 1e-3;  // |x - pole| < guard: PoleProximity
constexpr double kKinkGuard = 1e-9;     // gradient undefined this close to a kink

double get(const ParamMap& m, const FamilyInfo& info, const std::string& key) {
  auto it = m.find(key);
  if (it != m.end()) return it->second;
  for (const auto& [name, def] : info.params)
    if (name == key) return def;
  fail(ErrorCode::InvalidArgument, "unknown parameter " + key);
}

bool has(const ParamMap& m, const std::string& key) { return m.count(key) > 0; }

}  // namespace

const std::vector<FamilyInfo>& catalog() {
  static const std::vector<FamilyInfo> cat = {
      {Family::Kepler, "kepler", false, false, false,
       {{"alpha", -1.0}},
       "alpha/r"},
      {Family::Oscillator, "oscillator", false, true, false,
       {{"alpha", 0.5}},
       "alpha r^2"},
      {Family::LinearX, "linear-x", false, true, false,
       {{"a", 1.0}},
       "a x"},
      {Family::InverseSquareX, "inverse-square-x", false, true, false,
       {{"a", 1.0}},
       "a / x^2"},
      {Family::V_I, "v-i", false, true, false,
       {{"alpha", 0.5}, {"beta", 0.5}, {"gamma", 0.5}},
       "alpha(x^2+y^2) + beta/x^2 + gamma/y^2"},
      {Family::V_II, "v-ii", false, true, false,
       {{"alpha", 0.5}, {"beta", 0.5}, {"gamma", 1.0}},
       "alpha(x^2+4y^2) + beta/x^2 + gamma y"},
      {Family::V_III, "v-iii", false, false, false,
       {{"alpha", -1.0}, {"beta", 0.3}, {"gamma", 0.3}},
       "alpha/r + beta/(r(r+x)) + gamma/(r(r-x))"},
      {Family::V_IV, "v-iv", false, false, false,
       {{"alpha", -1.0}, {"beta", 0.3}, {"gamma", 0.3}},
       "alpha/r + (beta cos(phi/2) + gamma sin(phi/2))/r"},
      {Family::EllipticSn, "elliptic-sn", true, true, true,
       {{"omega", 1.0}, {"k", 0.7}, {"hbar", 1.0}},
       "(hbar om)^2 k^2 sn^2(om x, k)"},
      {Family::EllipticCnWell, "elliptic-cn-well", true, true, true,
       {{"omega", 1.0}, {"k", 0.7}, {"hbar", 1.0}},
       "(hbar om)^2 / (2(cn(om x, k)+1))"},
      {Family::EllipticSnInverse, "elliptic-sn-inverse", true, true, true,
       {{"omega", 1.0}, {"k", 0.7}, {"hbar", 1.0}},
       "(hbar om)^2 / sn^2(om x, k)"},
      {Family::DegenerateCosh, "degenerate-cosh", true, true, true,
       {{"omega", 1.0}, {"hbar", 1.0}},
       "-(hbar om)^2 / cosh^2(om x)"},
      {Family::DegenerateSinh, "degenerate-sinh", true, true, true,
       {{"omega", 1.0}, {"hbar", 1.0}},
       "(hbar om)^2 / sinh^2(om x)"},
      {Family::DegenerateSin, "degenerate-sin", true, true, true,
       {{"omega", 1.0}, {"hbar", 1.0}},
       "(hbar om)^2 / sin^2(om x)"},
      {Family::Aniso9to1, "aniso-9-1", false, true, false,
       {{"omega", 1.0}},
       "om^2 (9x^2 + y^2)/2"},
      {Family::SqrtSqrt, "sqrt-sqrt", false, true, false,
       {{"beta1", 1.0}, {"beta2", 1.0}},
       "beta1^2 sqrt|x| + beta2^2 sqrt|y|"},
      {Family::AbsSqrt, "abs-sqrt", false, true, false,
       {{"a", 1.0}, {"b", 1.0}},
       "a^2 |y| + b^2 sqrt|x|"},
      {Family::OscPlusQuarticRoot, "osc-quartic-root", false, true, false,
       {{"omega", 1.0}, {"b", 1.0}, {"xmin", -3.0}, {"xmax", 3.0},
        {"c", 0.0}, {"d", 0.0}, {"anchor_x", 0.0}, {"anchor_v", 0.0}},
       "om^2 y^2/2 + V(x), quartic branch"},
      {Family::AbsPlusCubicRoot, "abs-cubic-root", false, true, false,
       {{"a", 1.0}, {"b", 1.0}, {"d", 1.0}, {"xmin", -0.4}, {"xmax", 1.2}},
       "a|y| + f(x), cubic branch"},
      {Family::Rational1, "rational-1", true, true, true,
       {{"a", 1.0}, {"a_imag", 0.0}, {"a0", 1.0}, {"hbar", 1.0}},
       "hb^2[(x^2+y^2)/(8a^4) + 1/(x-a)^2 + 1/(x+a)^2]"},
      {Family::Rational2, "rational-2", true, true, true,
       {{"a", 1.0}, {"a_imag", 0.0}, {"a0", 1.0}, {"hbar", 1.0}},
       "hb^2[(x^2+y^2)/(8a^4) + 1/y^2 + 1/(x-a)^2 + 1/(x+a)^2]"},
      {Family::Rational3, "rational-3", true, true, true,
       {{"a", 1.0}, {"a_imag", 0.0}, {"a0", 1.0}, {"hbar", 1.0}},
       "hb^2[(x^2+y^2)/(8a^4) + 1/(y-a)^2 + 1/(y+a)^2 + 1/(x-a)^2 + 1/(x+a)^2]"},
      {Family::Aniso9to1InvY, "aniso-9-1-inv-y", false, true, false,
       {{"omega", 1.0}, {"hbar", 1.0}},
       "om^2(9x^2+y^2)/2 + hb^2/y^2"},
      {Family::Rational6, "rational-6", true, true, true,
       {{"a", 1.0}, {"a_imag", 0.0}, {"a0", 1.0}, {"hbar", 1.0}},
       "hb^2[(9x^2+y^2)/(8a^4) + 1/(y-a)^2 + 1/(y+a)^2]"},
      {Family::WeierstrassSum, "weierstrass-sum", true, true, true,
       {{"g2", 1.0}, {"g3", 0.0}, {"hbar", 1.0}},
       "hb^2 (P(x) + P(y)), P Weierstrass"},
      {Family::PainleveI_I, "painleve1-xy", true, true, true,
       {{"omega1", 1.0}, {"omega2", 1.0}, {"hbar", 1.0},
        {"w0", 0.0}, {"wp0", 0.0}, {"z0", 0.0}, {"zspan", 2.0}},
       "hb^2(om1^2 P1(om1 x) + om2^2 P1(om2 y))"},
      {Family::PainleveI_linear, "painleve1-linear", false, true, false,
       {{"a", 1.0}, {"omega1", 1.0}, {"hbar", 1.0},
        {"w0", 0.0}, {"wp0", 0.0}, {"z0", 0.0}, {"zspan", 2.0}},
       "a y + hb^2 om1^2 P1(om1 x)"},
      {Family::PainleveII_a, "painleve2-a", false, true, false,
       {{"a", 1.0}, {"b", 1.0}, {"hbar", 1.0}, {"alpha", 0.5},
        {"w0", 0.0}, {"wp0", 0.0}, {"z0", 0.0}, {"zspan", 2.0}},
       "b x + a y + (2 hb b)^(2/3) P2^2((2b/hb^2)^(1/3) x)"},
      {Family::PainleveII_b, "painleve2-b", false, true, false,
       {{"a", 1.0}, {"b", 1.0}, {"hbar", 1.0}, {"alpha", 0.5},
        {"w0", 0.0}, {"wp0", 0.0}, {"z0", 0.0}, {"zspan", 2.0}},
       "a y + (2 hb^2 b^2)^(1/3)(P2' + P2^2)(lam x), lam^3 = -4b/hb^2"},
      {Family::PainleveIV, "painleve4", true, true, false,
       {{"a", 0.5}, {"hbar", 1.0}, {"alpha", 0.0}, {"beta", -2.0},
        {"eps", 1.0}, {"w0", 2.0}, {"wp0", -2.0}, {"z0", -1.0},
        {"zspan", 1.5}},
       "a(x^2+y^2) + hb om [eps w'/2 + w^2/2 + z w + (eps-alpha)/3], om=sqrt(2a)"},
  };
  return cat;
}

const FamilyInfo& family_info(Family f) {
  for (const auto& e : catalog())
    if (e.family == f) return e;
  fail(ErrorCode::InvalidArgument, "unknown family");
}

const FamilyInfo* find_family(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return &e;
  return nullptr;
}

// ----------------------------------------------------------------------

void Axis1D::check_eval(double x) const {
  for (const auto& p : poles)
    if (std::abs(x - p.pos) < p.guard)
      fail(ErrorCode::PoleProximity, "axis pole at " + std::to_string(p.pos));
}

void Axis1D::check_deriv(double x) const {
  check_eval(x);
  for (const auto& kk : kinks)
    if (std::abs(x - kk.pos) < kKinkGuard)
      fail(ErrorCode::PoleProximity, "gradient undefined at kink");
}

namespace {

Axis1D axis_zero() {
  Axis1D a;
  a.v = [](double) { return 0.0; };
  a.d1 = a.d2 = a.d3 = a.v;
  a.antiderivative = [](double) { return 0.0; };
  return a;
}

// alpha x^2 + beta / (x-p1)^2 [+ same at p2] + gamma x; covers the harmonic,
// inverse-square and linear building blocks.
struct RationalTerms {
  double quad = 0;      // q x^2
  double lin = 0;       // l x
  struct Inv2 { double coeff, pos; };
  std::vector<Inv2> inv2;        // c/(x-p)^2
  bool smooth_pair = false;      // c2 * 2(x^2-a0^2)/(x^2+a0^2)^2
  double pair_coeff = 0, pair_a0 = 0;
};

Axis1D axis_rational(const RationalTerms& t) {
  Axis1D a;
  a.v = [t](double x) {
    double s = t.quad * x * x + t.lin * x;
    for (auto& iv : t.inv2) s += iv.coeff / ((x - iv.pos) * (x - iv.pos));
    if (t.smooth_pair) {
      const double c = t.pair_a0 * t.pair_a0;
      const double D = x * x + c;
      s += t.pair_coeff * 2.0 * (x * x - c) / (D * D);
    }
    return s;
  };
  a.d1 = [t](double x) {
    double s = 2.0 * t.quad * x + t.lin;
    for (auto& iv : t.inv2) {
      const double d = x - iv.pos;
      s += -2.0 * iv.coeff / (d * d * d);
    }
    if (t.smooth_pair) {
      const double c = t.pair_a0 * t.pair_a0;
      const double D = x * x + c;
      s += t.pair_coeff * 4.0 * x * (3.0 * c - x * x) / (D * D * D);
    }
    return s;
  };
  a.d2 = [t](double x) {
    double s = 2.0 * t.quad;
    for (auto& iv : t.inv2) {
      const double d = x - iv.pos;
      s += 6.0 * iv.coeff / (d * d * d * d);
    }
    if (t.smooth_pair) {
      const double c = t.pair_a0 * t.pair_a0;
      const double D = x * x + c;
      s += t.pair_coeff * 12.0 * (x * x * x * x - 6.0 * c * x * x + c * c) /
           (D * D * D * D);
    }
    return s;
  };
  a.d3 = [t](double x) {
    double s = 0.0;
    for (auto& iv : t.inv2) {
      const double d = x - iv.pos;
      s += -24.0 * iv.coeff / (d * d * d * d * d);
    }
    if (t.smooth_pair) {
      const double c = t.pair_a0 * t.pair_a0;
      const double D = x * x + c;
      s += -t.pair_coeff * 48.0 * x *
           (x * x * x * x - 10.0 * c * x * x + 5.0 * c * c) /
           (D * D * D * D * D);
    }
    return s;
  };
  a.antiderivative = [t](double x) {
    double s = t.quad * x * x * x / 3.0 + 0.5 * t.lin * x * x;
    for (auto& iv : t.inv2) s += -iv.coeff / (x - iv.pos);
    if (t.smooth_pair) {
      const double c = t.pair_a0 * t.pair_a0;
      s += -t.pair_coeff * 2.0 * x / (x * x + c);
    }
    return s;
  };
  for (auto& iv : t.inv2) {
    double guard = kPoleGuardRel * std::max(1.0, std::abs(iv.pos));
    a.poles.push_back({iv.pos, guard});
  }
  return a;
}

Axis1D axis_abs(double coeff) {  // coeff * |x|
  Axis1D a;
  a.v = [coeff](double x) { return coeff * std::abs(x); };
  a.d1 = [coeff](double x) { return coeff * (x >= 0 ? 1.0 : -1.0); };
  a.d2 = [](double) { return 0.0; };
  a.d3 = [](double) { return 0.0; };
  a.antiderivative = [coeff](double x) { return 0.5 * coeff * x * std::abs(x); };
  a.kinks.push_back({0.0, Axis1D::KinkKind::AbsLinear, coeff});
  return a;
}

Axis1D axis_sqrt_abs(double coeff) {  // coeff * sqrt|x|
  Axis1D a;
  a.v = [coeff](double x) { return coeff * std::sqrt(std::abs(x)); };
  a.d1 = [coeff](double x) {
    const double s = x >= 0 ? 1.0 : -1.0;
    return 0.5 * coeff * s / std::sqrt(std::abs(x));
  };
  a.d2 = [coeff](double x) {
    return -0.25 * coeff / std::pow(std::abs(x), 1.5);
  };
  a.d3 = [coeff](double x) {
    const double s = x >= 0 ? 1.0 : -1.0;
    return 0.375 * coeff * s / std::pow(std::abs(x), 2.5);
  };
  a.antiderivative = [coeff](double x) {
    const double s = x >= 0 ? 1.0 : -1.0;
    return s * coeff * (2.0 / 3.0) * std::pow(std::abs(x), 1.5);
  };
  a.kinks.push_back({0.0, Axis1D::KinkKind::SqrtAbs, coeff});
  return a;
}

// ----- section-3 quantum axes -----

Axis1D axis_deg_sin(double hbar, double om) {
  const double c = hbar * hbar * om * om;
  Axis1D a;
  a.v = [c, om](double x) { const double s = std::sin(om * x); return c / (s * s); };
  a.d1 = [c, om](double x) {
    const double s = std::sin(om * x), co = std::cos(om * x);
    return -2.0 * c * om * co / (s * s * s);
  };
  a.d2 = [c, om](double x) {
    const double s = std::sin(om * x);
    const double u = 1.0 / (s * s);
    return 2.0 * c * om * om * (3.0 * u * u - 2.0 * u);
  };
  a.d3 = [c, om](double x) {
    const double s = std::sin(om * x), co = std::cos(om * x);
    const double u = 1.0 / (s * s);
    // d/dx of 2 c om^2 (3u^2 - 2u), du/dx = -2 om cos/sin^3
    const double du = -2.0 * om * co * u / s;
    return 2.0 * c * om * om * (6.0 * u - 2.0) * du;
  };
  a.antiderivative = [c, om](double x) {
    return -c / om * std::cos(om * x) / std::sin(om * x);
  };
  const double guard = kPoleGuardRel / om;
  for (int n = -8; n <= 8; ++n) a.poles.push_back({n * M_PI / om, guard});
  return a;
}

Axis1D axis_deg_sinh(double hbar, double om) {
  const double c = hbar * hbar * om * om;
  Axis1D a;
  a.v = [c, om](double x) { const double s = std::sinh(om * x); return c / (s * s); };
  a.d1 = [c, om](double x) {
    const double s = std::sinh(om * x), co = std::cosh(om * x);
    return -2.0 * c * om * co / (s * s * s);
  };
  a.d2 = [c, om](double x) {
    const double s = std::sinh(om * x);
    const double u = 1.0 / (s * s);
    return 2.0 * c * om * om * (3.0 * u * u + 2.0 * u);
  };
  a.d3 = [c, om](double x) {
    const double s = std::sinh(om * x), co = std::cosh(om * x);
    const double u = 1.0 / (s * s);
    const double du = -2.0 * om * co * u / s;
    return 2.0 * c * om * om * (6.0 * u + 2.0) * du;
  };
  a.antiderivative = [c, om](double x) {
    return -c / om * std::cosh(om * x) / std::sinh(om * x);
  };
  a.poles.push_back({0.0, kPoleGuardRel / om});
  return a;
}

// V = -(hbar om)^2 / cosh^2(om x); the attractive sign is required by the
// determining equations (see tests).
Axis1D axis_deg_cosh(double hbar, double om) {
  const double c = -hbar * hbar * om * om;
  Axis1D a;
  a.v = [c, om](double x) { const double ch = std::cosh(om * x); return c / (ch * ch); };
  a.d1 = [c, om](double x) {
    const double ch = std::cosh(om * x), sh = std::sinh(om * x);
    return -2.0 * c * om * sh / (ch * ch * ch);
  };
  a.d2 = [c, om](double x) {
    const double ch = std::cosh(om * x);
    const double u = 1.0 / (ch * ch);
    return 2.0 * c * om * om * (2.0 * u - 3.0 * u * u);
  };
  a.d3 = [c, om](double x) {
    const double ch = std::cosh(om * x), sh = std::sinh(om * x);
    const double u = 1.0 / (ch * ch);
    const double du = -2.0 * om * sh * u / ch;
    return 2.0 * c * om * om * (2.0 - 6.0 * u) * du;
  };
  a.antiderivative = [c, om](double x) { return c / om * std::tanh(om * x); };
  return a;
}

Axis1D axis_elliptic_sn(double hbar, double om, double k) {
  const double c = hbar * hbar * om * om * k * k;  // V = c sn^2(om x)
  Axis1D a;
  a.v = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    return c * j.sn * j.sn;
  };
  a.d1 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    return 2.0 * c * om * j.sn * j.cn * j.dn;
  };
  a.d2 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    const double m = k * k;
    return 2.0 * c * om * om *
           (j.cn * j.cn * j.dn * j.dn - j.sn * j.sn * j.dn * j.dn -
            m * j.sn * j.sn * j.cn * j.cn);
  };
  a.d3 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    const double m = k * k;
    return 8.0 * c * om * om * om * j.sn * j.cn * j.dn *
           (-j.dn * j.dn - m * j.cn * j.cn + m * j.sn * j.sn);
  };
  a.antiderivative = [hbar, om, k](double x) {
    // int (hb om)^2 k^2 sn^2(om x) dx = hb^2 om (u - eps(u)), u = om x
    const double u = om * x;
    return hbar * hbar * om * (u - jacobi_epsilon(u, k));
  };
  return a;
}

Axis1D axis_elliptic_cn_well(double hbar, double om, double k) {
  const double c = hbar * hbar * om * om;  // V = c / (2(cn+1))
  Axis1D a;
  a.v = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    return c / (2.0 * (j.cn + 1.0));
  };
  a.d1 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    const double q = j.cn + 1.0;
    return c * om * j.sn * j.dn / (2.0 * q * q);
  };
  a.d2 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    const double m = k * k, q = j.cn + 1.0;
    const double num = (j.cn * j.dn * j.dn - m * j.sn * j.sn * j.cn) * q +
                       2.0 * j.sn * j.sn * j.dn * j.dn;
    return c * om * om * num / (2.0 * q * q * q);
  };
  a.d3 = [a_d2 = a.d2, om](double x) {
    const double h = 1e-4 / std::max(om, 1.0);
    return fd_derivative(a_d2, x, h);
  };
  a.antiderivative = [av = a.v](double x) {
    return gl_integrate(av, 0.0, x, std::max(1, int(std::abs(x) * 8)));
  };
  // pole where cn = -1: om x = 2K
  const double xK = 2.0 * elliptic_K(k) / om;
  for (int n = -4; n <= 4; ++n)
    a.poles.push_back({(4 * n + 2) * xK / 2.0, kPoleGuardRel / om});
  return a;
}

Axis1D axis_elliptic_sn_inverse(double hbar, double om, double k) {
  const double c = hbar * hbar * om * om;  // V = c / sn^2
  Axis1D a;
  a.v = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    return c / (j.sn * j.sn);
  };
  a.d1 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    return -2.0 * c * om * j.cn * j.dn / (j.sn * j.sn * j.sn);
  };
  a.d2 = [c, om, k](double x) {
    const auto j = jacobi_sn_cn_dn(om * x, k);
    const double m = k * k, s2 = j.sn * j.sn;
    return 2.0 * c * om * om *
           (s2 * (j.dn * j.dn + m * j.cn * j.cn) + 3.0 * j.cn * j.cn * j.dn * j.dn) /
           (s2 * s2);
  };
  a.d3 = [a_d2 = a.d2, om](double x) {
    const double h = 1e-4 / std::max(om, 1.0);
    return fd_derivative(a_d2, x, h);
  };
  const double x0 = 2.0 * elliptic_K(k) / om;  // base point inside (0, 2K/om)
  a.antiderivative = [av = a.v, x0](double x) {
    return gl_integrate(av, 0.5 * x0, x, std::max(1, int(std::abs(x - 0.5 * x0) * 8) + 1));
  };
  for (int n = -4; n <= 4; ++n)
    a.poles.push_back({n * x0, kPoleGuardRel / om});
  return a;
}

Axis1D axis_weierstrass(double hbar, double g2, double g3) {
  const double h2 = hbar * hbar;
  Axis1D a;
  a.v = [h2, g2, g3](double x) { return h2 * weierstrass_p(x, g2, g3).p; };
  a.d1 = [h2, g2, g3](double x) { return h2 * weierstrass_p(x, g2, g3).dp; };
  a.d2 = [h2, g2, g3](double x) {
    const double p = weierstrass_p(x, g2, g3).p;
    return h2 * (6.0 * p * p - 0.5 * g2);
  };
  a.d3 = [h2, g2, g3](double x) {
    const auto w = weierstrass_p(x, g2, g3);
    return h2 * 12.0 * w.p * w.dp;
  };
  a.poles.push_back({0.0, 5e-3});
  return a;
}

Axis1D axis_painleve1(double hbar, double om1,
                      std::shared_ptr<const PainleveSolution> sol) {
  const double c = hbar * hbar * om1 * om1;
  Axis1D a;
  a.v = [c, om1, sol](double x) { return c * sol->eval(om1 * x)[0]; };
  a.d1 = [c, om1, sol](double x) { return c * om1 * sol->eval(om1 * x)[1]; };
  a.d2 = [c, om1, sol](double x) {
    const auto v = sol->eval(om1 * x);
    const double z = om1 * x;
    return c * om1 * om1 * (6.0 * v[0] * v[0] + z);
  };
  a.d3 = [c, om1, sol](double x) {
    const auto v = sol->eval(om1 * x);
    return c * om1 * om1 * om1 * (12.0 * v[0] * v[1] + 1.0);
  };
  return a;
}

Axis1D axis_painleve2_sq(double c2, double lam, double bline,
                         std::shared_ptr<const PainleveSolution> sol) {
  // U = bline x + c2 w(lam x)^2
  Axis1D a;
  auto wch = [sol](double z) {
    const auto v = sol->eval(z);
    const double w = v[0], wp = v[1];
    const double wpp = sol->rhs(z, w, wp)[1];
    const double wppp = 6.0 * w * w * wp + w + z * wp;
    return std::array<double, 4>{w, wp, wpp, wppp};
  };
  a.v = [c2, lam, bline, wch](double x) {
    const auto w = wch(lam * x);
    return bline * x + c2 * w[0] * w[0];
  };
  a.d1 = [c2, lam, bline, wch](double x) {
    const auto w = wch(lam * x);
    return bline + 2.0 * c2 * lam * w[0] * w[1];
  };
  a.d2 = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return 2.0 * c2 * lam * lam * (w[1] * w[1] + w[0] * w[2]);
  };
  a.d3 = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return 2.0 * c2 * lam * lam * lam * (3.0 * w[1] * w[2] + w[0] * w[3]);
  };
  return a;
}

Axis1D axis_painleve2_miura(double c2, double lam,
                            std::shared_ptr<const PainleveSolution> sol) {
  // U = c2 (w' + w^2)(lam x)
  Axis1D a;
  auto wch = [sol](double z) {
    const auto v = sol->eval(z);
    const double w = v[0], wp = v[1];
    const double wpp = sol->rhs(z, w, wp)[1];
    const double wppp = 6.0 * w * w * wp + w + z * wp;
    const double w4 = 12.0 * w * wp * wp + 6.0 * w * w * wpp + 2.0 * wp + z * wpp;
    return std::array<double, 5>{w, wp, wpp, wppp, w4};
  };
  a.v = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return c2 * (w[1] + w[0] * w[0]);
  };
  a.d1 = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return c2 * lam * (w[2] + 2.0 * w[0] * w[1]);
  };
  a.d2 = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return c2 * lam * lam * (w[3] + 2.0 * w[1] * w[1] + 2.0 * w[0] * w[2]);
  };
  a.d3 = [c2, lam, wch](double x) {
    const auto w = wch(lam * x);
    return c2 * lam * lam * lam *
           (w[4] + 6.0 * w[1] * w[2] + 2.0 * w[0] * w[3]);
  };
  return a;
}

Axis1D axis_painleve4(double a_str, double hbar, double alpha, double eps,
                      double lam, std::shared_ptr<const PainleveSolution> sol) {
  // V1 = a x^2 + hb om [eps w'/2 + w^2/2 + z w + (eps - alpha)/3], z = lam x
  const double om = std::sqrt(2.0 * a_str);
  const double C = hbar * om;
  const double shift = C * (eps - alpha) / 3.0;
  Axis1D a;
  auto wch = [sol](double z) {
    const auto v = sol->eval(z);
    const double w = v[0], wp = v[1];
    const double wpp = sol->rhs(z, w, wp)[1];
    // w''' = d/dz of the P_IV right-hand side
    const auto pr = sol->params();
    const double wppp = wp * wpp / w - wp * wp * wp / (2.0 * w * w) +
                        4.5 * w * w * wp + 4.0 * w * w + 8.0 * z * w * wp +
                        4.0 * z * w + 2.0 * (z * z - pr.a) * wp -
                        pr.b * wp / (w * w);
    return std::array<double, 4>{w, wp, wpp, wppp};
  };
  a.v = [=](double x) {
    const double z = lam * x;
    const auto w = wch(z);
    return a_str * x * x +
           C * (0.5 * eps * w[1] + 0.5 * w[0] * w[0] + z * w[0]) + shift;
  };
  a.d1 = [=](double x) {
    const double z = lam * x;
    const auto w = wch(z);
    return 2.0 * a_str * x +
           C * lam * (0.5 * eps * w[2] + w[0] * w[1] + w[0] + z * w[1]);
  };
  a.d2 = [=](double x) {
    const double z = lam * x;
    const auto w = wch(z);
    return 2.0 * a_str +
           C * lam * lam *
               (0.5 * eps * w[3] + w[1] * w[1] + w[0] * w[2] + 2.0 * w[1] +
                z * w[2]);
  };
  a.d3 = [d2 = a.d2, lam](double x) {
    return fd_derivative(d2, x, 1e-4 / std::max(1.0, std::abs(lam)));
  };
  return a;
}

// ----------------------------------------------------------------------
// polynomial roots via companion matrix (Eigen)

std::vector<double> real_poly_roots(const std::vector<double>& coeffs) {
  // coeffs: c0 + c1 x + ... + cn x^n, cn != 0
  const int n = static_cast<int>(coeffs.size()) - 1;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -coeffs[i] / coeffs[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) < 1e-9 * std::max(1.0, std::abs(ev.real())))
      roots.push_back(ev.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

// ----------------------------------------------------------------------
// Quartic branch:  -9V^4 + 14 om^2 x^2 V^3 + (6d - 15/2 om^4 x^4) V^2
//   + (3/2 om^6 x^6 - 2 d om^2 x^2) V + c x^2 - d^2 - d om^2 x^4 / 2
//   - om^8 x^8 / 16 = 0

namespace {
void quartic_coeffs(double x, const QuarticParams& p, double out[5]) {
  const double om2 = p.omega * p.omega;
  const double om4 = om2 * om2, om6 = om4 * om2, om8 = om4 * om4;
  const double x2 = x * x, x4 = x2 * x2, x6 = x4 * x2, x8 = x4 * x4;
  out[4] = -9.0;
  out[3] = 14.0 * om2 * x2;
  out[2] = 6.0 * p.d - 7.5 * om4 * x4;
  out[1] = 1.5 * om6 * x6 - 2.0 * p.d * om2 * x2;
  out[0] = p.c * x2 - p.d * p.d - 0.5 * p.d * om2 * x4 - om8 * x8 / 16.0;
}
}  // namespace

double quartic_residual(double V, double x, const QuarticParams& p) {
  double c[5];
  quartic_coeffs(x, p, c);
  return (((c[4] * V + c[3]) * V + c[2]) * V + c[1]) * V + c[0];
}

std::vector<double> quartic_V_roots(double x, const QuarticParams& p) {
  double c[5];
  quartic_coeffs(x, p, c);
  auto roots = real_poly_roots({c[0], c[1], c[2], c[3], c[4]});
  // polish with Newton on the quartic
  for (double& r : roots) {
    for (int it = 0; it < 4; ++it) {
      const double f = (((c[4] * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0];
      const double df = ((4 * c[4] * r + 3 * c[3]) * r + 2 * c[2]) * r + c[1];
      if (df == 0.0) break;
      r -= f / df;
    }
  }
  if (roots.empty()) fail(ErrorCode::NoRealRoot, "quartic has no real root");
  return roots;
}

QuarticParams quartic_double_root_params(double omega, double b) {
  const double om4 = std::pow(omega, 4), om8 = om4 * om4;
  return {omega, b, 8.0 * om8 * b * b * b / 729.0, om4 * b * b / 27.0};
}

double quartic_V1(double x, double omega, double b) {
  const double S = std::sqrt(b + x * x);
  return omega * omega * (2.0 * b + 5.0 * x * x + 4.0 * x * S) / 18.0;
}
double quartic_V2(double x, double omega, double b) {
  const double S = std::sqrt(b + x * x);
  return omega * omega * (2.0 * b + 5.0 * x * x - 4.0 * x * S) / 18.0;
}
double quartic_V3(double x, double omega, double b) {
  return omega * omega * x * x / 2.0 - omega * omega * b / 9.0;
}

namespace {

// branch tracking over a grid by quadratic prediction
template <class RootsFn>
std::pair<std::vector<double>, std::vector<double>> track_branch(
    RootsFn roots_at, double x_anchor, double v_anchor, double xmin,
    double xmax, int n) {
  std::vector<double> xs = linspace(xmin, xmax, n);
  std::vector<double> vs(n);
  // index nearest to the anchor
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(xs[i] - x_anchor) < std::abs(xs[i0] - x_anchor)) i0 = i;
  auto nearest = [&](double x, double pred) {
    auto rts = roots_at(x);
    double best = rts[0];
    double bestd = std::abs(rts[0] - pred);
    double second = 1e300;
    for (double r : rts) {
      const double d = std::abs(r - pred);
      if (d < bestd) {
        second = bestd;
        bestd = d;
        best = r;
      } else if (d < second) {
        second = d;
      }
    }
    if (rts.size() > 1 && bestd > 0.8 * second && second < 1e290)
      fail(ErrorCode::BranchJump, "root continuation is ambiguous");
    return best;
  };
  vs[i0] = nearest(xs[i0], v_anchor);
  for (int dir : {+1, -1}) {
    double prev = vs[i0], prev2 = vs[i0];
    for (int i = i0 + dir; i >= 0 && i < n; i += dir) {
      const double pred = 2.0 * prev - prev2;  // linear extrapolation
      vs[i] = nearest(xs[i], pred);
      prev2 = prev;
      prev = vs[i];
    }
  }
  return {xs, vs};
}

}  // namespace

QuarticBranch::QuarticBranch(QuarticParams p, double x_anchor, double v_anchor,
                             double xmin, double xmax, int grid_n)
    : p_(p), xmin_(xmin), xmax_(xmax) {
  auto roots_at = [this](double x) { return quartic_V_roots(x, p_); };
  std::tie(xs_, vs_) = track_branch(roots_at, x_anchor, v_anchor, xmin, xmax,
                                    grid_n);
}

double QuarticBranch::polish(double x, double guess) const {
  double c[5];
  quartic_coeffs(x, p_, c);
  double r = guess;
  for (int it = 0; it < 12; ++it) {
    const double f = (((c[4] * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0];
    const double df = ((4 * c[4] * r + 3 * c[3]) * r + 2 * c[2]) * r + c[1];
    if (df == 0.0) break;
    const double step = f / df;
    r -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(r))) break;
  }
  return r;
}

double QuarticBranch::value(double x) const {
  if (x < xmin_ || x > xmax_)
    fail(ErrorCode::DomainViolation, "x outside tracked branch interval");
  const double t = (x - xmin_) / (xmax_ - xmin_) * (xs_.size() - 1);
  const int i = std::clamp<int>(static_cast<int>(t), 0,
                                static_cast<int>(xs_.size()) - 2);
  const double fr = t - i;
  const double guess = (1.0 - fr) * vs_[i] + fr * vs_[i + 1];
  return polish(x, guess);
}

namespace {
// implicit derivatives from the quartic Q(V, x) = 0
struct QPartials {
  double Qv, Qx, Qvv, Qxv, Qxx, Qvvv, Qxvv, Qxxv, Qxxx;
};
QPartials quartic_partials(double V, double x, const QuarticParams& p) {
  const double om2 = p.omega * p.omega;
  const double om4 = om2 * om2, om6 = om4 * om2, om8 = om4 * om4;
  const double x2 = x * x, x3 = x2 * x, x4 = x2 * x2, x5 = x4 * x,
               x6 = x4 * x2, x7 = x6 * x;
  QPartials q;
  q.Qv = -36.0 * V * V * V + 42.0 * om2 * x2 * V * V +
         2.0 * (6.0 * p.d - 7.5 * om4 * x4) * V + 1.5 * om6 * x6 -
         2.0 * p.d * om2 * x2;
  q.Qx = 28.0 * om2 * x * V * V * V - 30.0 * om4 * x3 * V * V +
         (9.0 * om6 * x5 - 4.0 * p.d * om2 * x) * V + 2.0 * p.c * x -
         2.0 * p.d * om2 * x3 - 0.5 * om8 * x7;
  q.Qvv = -108.0 * V * V + 84.0 * om2 * x2 * V + 12.0 * p.d - 15.0 * om4 * x4;
  q.Qxv = 84.0 * om2 * x * V * V - 60.0 * om4 * x3 * V + 9.0 * om6 * x5 -
          4.0 * p.d * om2 * x;
  q.Qxx = 28.0 * om2 * V * V * V - 90.0 * om4 * x2 * V * V +
          (45.0 * om6 * x4 - 4.0 * p.d * om2) * V + 2.0 * p.c -
          6.0 * p.d * om2 * x2 - 3.5 * om8 * x6;
  q.Qvvv = -216.0 * V + 84.0 * om2 * x2;
  q.Qxvv = 168.0 * om2 * x * V - 60.0 * om4 * x3;
  q.Qxxv = 84.0 * om2 * V * V - 180.0 * om4 * x2 * V + 45.0 * om6 * x4 -
           4.0 * p.d * om2;
  q.Qxxx = -180.0 * om4 * x * V * V + 180.0 * om6 * x3 * V -
           12.0 * p.d * om2 * x - 21.0 * om8 * x5;
  return q;
}
}  // namespace

double QuarticBranch::d1(double x) const {
  const double V = value(x);
  const auto q = quartic_partials(V, x, p_);
  return -q.Qx / q.Qv;
}

double QuarticBranch::d2(double x) const {
  const double V = value(x);
  const auto q = quartic_partials(V, x, p_);
  const double v1 = -q.Qx / q.Qv;
  return -(q.Qxx + 2.0 * q.Qxv * v1 + q.Qvv * v1 * v1) / q.Qv;
}

double QuarticBranch::d3(double x) const {
  const double V = value(x);
  const auto q = quartic_partials(V, x, p_);
  const double v1 = -q.Qx / q.Qv;
  const double v2 = -(q.Qxx + 2.0 * q.Qxv * v1 + q.Qvv * v1 * v1) / q.Qv;
  return -(q.Qxxx + 3.0 * q.Qxxv * v1 + 3.0 * q.Qxvv * v1 * v1 +
           q.Qvvv * v1 * v1 * v1 + 3.0 * (q.Qxv + q.Qvv * v1) * v2) /
         q.Qv;
}

double quartic_branch_V(double x, const QuarticParams& p, double x_anchor,
                        double v_anchor) {
  const double lo = std::min(x, x_anchor), hi = std::max(x, x_anchor);
  const double pad = 0.05 * (hi - lo + 1.0);
  QuarticBranch br(p, x_anchor, v_anchor, lo - pad, hi + pad, 1024);
  return br.value(x);
}

// Cubic branch: f^3 - 2 b x f^2 + b^2 x^4 f - d = 0
double cubic_residual(double f, double x, const CubicParams& p) {
  return ((f - 2.0 * p.b * x) * f + p.b * p.b * x * x * x * x) * f - p.d;
}

std::vector<double> cubic_f_roots(double x, const CubicParams& p) {
  auto roots = real_poly_roots(
      {-p.d, p.b * p.b * x * x * x * x, -2.0 * p.b * x, 1.0});
  if (roots.empty()) fail(ErrorCode::NoRealRoot, "cubic has no real root");
  return roots;
}

CubicBranch::CubicBranch(CubicParams p, double x_anchor, double f_anchor,
                         double xmin, double xmax, int grid_n)
    : p_(p), xmin_(xmin), xmax_(xmax) {
  auto roots_at = [this](double x) { return cubic_f_roots(x, p_); };
  std::tie(xs_, vs_) = track_branch(roots_at, x_anchor, f_anchor, xmin, xmax,
                                    grid_n);
}

double CubicBranch::polish(double x, double guess) const {
  double r = guess;
  const double b = p_.b, x4 = x * x * x * x;
  for (int it = 0; it < 12; ++it) {
    const double f = ((r - 2.0 * b * x) * r + b * b * x4) * r - p_.d;
    const double df = 3.0 * r * r - 4.0 * b * x * r + b * b * x4;
    if (df == 0.0) break;
    const double step = f / df;
    r -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(r))) break;
  }
  return r;
}

double CubicBranch::value(double x) const {
  if (x < xmin_ || x > xmax_)
    fail(ErrorCode::DomainViolation, "x outside tracked branch interval");
  const double t = (x - xmin_) / (xmax_ - xmin_) * (xs_.size() - 1);
  const int i = std::clamp<int>(static_cast<int>(t), 0,
                                static_cast<int>(xs_.size()) - 2);
  const double fr = t - i;
  return polish(x, (1.0 - fr) * vs_[i] + fr * vs_[i + 1]);
}

namespace {
struct CPartials {
  double Qf, Qx, Qff, Qxf, Qxx, Qfff, Qxff, Qxxf, Qxxx;
};
CPartials cubic_partials(double f, double x, const CubicParams& p) {
  const double b = p.b, b2 = b * b;
  const double x2 = x * x, x3 = x2 * x, x4 = x2 * x2;
  CPartials q;
  q.Qf = 3.0 * f * f - 4.0 * b * x * f + b2 * x4;
  q.Qx = -2.0 * b * f * f + 4.0 * b2 * x3 * f;
  q.Qff = 6.0 * f - 4.0 * b * x;
  q.Qxf = -4.0 * b * f + 4.0 * b2 * x3;
  q.Qxx = 12.0 * b2 * x2 * f;
  q.Qfff = 6.0;
  q.Qxff = -4.0 * b;
  q.Qxxf = 12.0 * b2 * x2;
  q.Qxxx = 24.0 * b2 * x * f;
  return q;
}
}  // namespace

double CubicBranch::d1(double x) const {
  const double f = value(x);
  const auto q = cubic_partials(f, x, p_);
  return -q.Qx / q.Qf;
}
double CubicBranch::d2(double x) const {
  const double f = value(x);
  const auto q = cubic_partials(f, x, p_);
  const double v1 = -q.Qx / q.Qf;
  return -(q.Qxx + 2.0 * q.Qxf * v1 + q.Qff * v1 * v1) / q.Qf;
}
double CubicBranch::d3(double x) const {
  const double f = value(x);
  const auto q = cubic_partials(f, x, p_);
  const double v1 = -q.Qx / q.Qf;
  const double v2 = -(q.Qxx + 2.0 * q.Qxf * v1 + q.Qff * v1 * v1) / q.Qf;
  return -(q.Qxxx + 3.0 * q.Qxxf * v1 + 3.0 * q.Qxff * v1 * v1 +
           q.Qfff * v1 * v1 * v1 + 3.0 * (q.Qxf + q.Qff * v1) * v2) /
         q.Qf;
}

double cubic_branch_f(double x, const CubicParams& p, double x_anchor,
                      double f_anchor) {
  const double lo = std::min(x, x_anchor), hi = std::max(x, x_anchor);
  const double pad = 0.05 * (hi - lo + 1.0);
  CubicBranch br(p, x_anchor, f_anchor, lo - pad, hi + pad, 1024);
  return br.value(x);
}

// ----------------------------------------------------------------------
// Potential assembly

double Potential::hbar() const {
  auto it = params_.find("hbar");
  if (it != params_.end()) return it->second;
  for (const auto& [name, def] : info_->params)
    if (name == "hbar") return def;
  return 0.0;
}

void Potential::check_point(Vec2 q) const {
  if (!domain_.contains(q))
    fail(ErrorCode::DomainViolation, "point outside potential domain");
  if (guard2d_) guard2d_(q);
  if (ax_) ax_->check_eval(q.x);
  if (ay_) ay_->check_eval(q.y);
}

double Potential::eval(Vec2 q) const {
  check_point(q);
  if (separable()) return ax_->v(q.x) + ay_->v(q.y);
  return v2d_(q);
}

Vec2 Potential::grad(Vec2 q) const {
  check_point(q);
  if (separable()) {
    ax_->check_deriv(q.x);
    ay_->check_deriv(q.y);
    return {ax_->d1(q.x), ay_->d1(q.y)};
  }
  return grad2d_(q);
}

double Potential::d(int i, int j, Vec2 q) const {
  check_point(q);
  if (i + j > 3 || i < 0 || j < 0)
    fail(ErrorCode::InvalidArgument, "derivative order out of range");
  if (separable()) {
    if (i > 0 && j > 0) return 0.0;
    const Axis1D& ax = (j == 0) ? *ax_ : *ay_;
    const double t = (j == 0) ? q.x : q.y;
    const int order = i + j;
    if (order > 0) ax.check_deriv(t);
    switch (order) {
      case 0: return ax.v(t);
      case 1: return ax.d1(t);
      case 2: return ax.d2(t);
      default: return ax.d3(t);
    }
  }
  if (i == 0 && j == 0) return v2d_(q);
  if (i + j == 1) {
    const Vec2 g = grad2d_(q);
    return i == 1 ? g.x : g.y;
  }
  if (d2d_) return d2d_(i, j, q);
  // finite differences of the gradient
  const double h = finite_diff_step(std::max(std::abs(q.x), std::abs(q.y)));
  if (i + j == 2) {
    auto g = [this, i](Vec2 p) { const Vec2 gg = grad2d_(p); return i >= 1 ? gg.x : gg.y; };
    if (i == 2) return fd_derivative([&](double s) { return g({s, q.y}); }, q.x, h);
    if (j == 2) return fd_derivative([&](double s) { return g({q.x, s}); }, q.y, h);
    return fd_derivative([&](double s) { return grad2d_({s, q.y}).y; }, q.x, h);
  }
  fail(ErrorCode::DerivativeUnavailable,
       "third derivatives unavailable for this family");
}

const Axis1D& Potential::x_axis() const {
  if (!ax_) fail(ErrorCode::NotSeparable, "potential is not separable");
  return *ax_;
}
const Axis1D& Potential::y_axis() const {
  if (!ay_) fail(ErrorCode::NotSeparable, "potential is not separable");
  return *ay_;
}

Potential make_potential(Family f, const ParamMap& params) {
  return make_potential(family_info(f).id, params);
}

Potential make_potential(const std::string& id, const ParamMap& params) {
  const FamilyInfo* info = find_family(id);
  if (!info) fail(ErrorCode::InvalidArgument, "unknown potential id: " + id);
  for (const auto& [k, v] : params) {
    bool known = false;
    for (const auto& [name, def] : info->params)
      if (name == k) known = true;
    if (!known)
      fail(ErrorCode::InvalidArgument,
           "unknown parameter '" + k + "' for " + id);
  }
  Potential P;
  P.info_ = info;
  P.params_ = params;
  P.domain_ = {-6.0, 6.0, -6.0, 6.0};
  auto p = [&](const std::string& key) { return get(params, *info, key); };

  auto set_axes = [&](Axis1D x, Axis1D y) {
    P.ax_ = std::make_shared<Axis1D>(std::move(x));
    P.ay_ = std::make_shared<Axis1D>(std::move(y));
  };

  switch (info->family) {
    case Family::Kepler: {
      const double al = p("alpha");
      P.v2d_ = [al](Vec2 q) { return al / norm(q); };
      P.grad2d_ = [al](Vec2 q) {
        const double r = norm(q), r3 = r * r * r;
        return Vec2{-al * q.x / r3, -al * q.y / r3};
      };
      P.d2d_ = [al](int i, int j, Vec2 q) {
        const double x = q.x, y = q.y, r = norm(q);
        const double r3 = r * r * r, r5 = r3 * r * r, r7 = r5 * r * r;
        if (i == 1 && j == 0) return -al * x / r3;
        if (i == 0 && j == 1) return -al * y / r3;
        if (i == 2 && j == 0) return al * (2 * x * x - y * y) / r5;
        if (i == 0 && j == 2) return al * (2 * y * y - x * x) / r5;
        if (i == 1 && j == 1) return 3 * al * x * y / r5;
        if (i == 3 && j == 0) return 3 * al * x * (3 * y * y - 2 * x * x) / r7;
        if (i == 0 && j == 3) return 3 * al * y * (3 * x * x - 2 * y * y) / r7;
        if (i == 2 && j == 1) return 3 * al * y * (y * y - 4 * x * x) / r7;
        if (i == 1 && j == 2) return 3 * al * x * (x * x - 4 * y * y) / r7;
        return al / r;
      };
      P.guard2d_ = [](Vec2 q) {
        if (norm(q) < kPoleGuardRel)
          fail(ErrorCode::PoleProximity, "Kepler origin");
      };
      break;
    }
    case Family::Oscillator: {
      RationalTerms t;
      t.quad = p("alpha");
      set_axes(axis_rational(t), axis_rational(t));
      break;
    }
    case Family::LinearX: {
      RationalTerms t;
      t.lin = p("a");
      set_axes(axis_rational(t), axis_zero());
      break;
    }
    case Family::InverseSquareX: {
      RationalTerms t;
      t.inv2.push_back({p("a"), 0.0});
      set_axes(axis_rational(t), axis_zero());
      break;
    }
    case Family::V_I: {
      RationalTerms tx, ty;
      tx.quad = p("alpha");
      tx.inv2.push_back({p("beta"), 0.0});
      ty.quad = p("alpha");
      ty.inv2.push_back({p("gamma"), 0.0});
      set_axes(axis_rational(tx), axis_rational(ty));
      break;
    }
    case Family::V_II: {
      RationalTerms tx, ty;
      tx.quad = p("alpha");
      tx.inv2.push_back({p("beta"), 0.0});
      ty.quad = 4.0 * p("alpha");
      ty.lin = p("gamma");
      set_axes(axis_rational(tx), axis_rational(ty));
      break;
    }
    case Family::V_III: {
      const double al = p("alpha"), be = p("beta"), ga = p("gamma");
      P.v2d_ = [=](Vec2 q) {
        const double r = norm(q);
        return al / r + be / (r * (r + q.x)) + ga / (r * (r - q.x));
      };
      P.grad2d_ = [=](Vec2 q) {
        const double x = q.x, y = q.y, r = norm(q);
        const double r3 = r * r * r;
        double gx = -al * x / r3, gy = -al * y / r3;
        {
          const double D = r * r + r * x;
          gx += -be * (2 * x + r + x * x / r) / (D * D);
          gy += -be * (2 * y + x * y / r) / (D * D);
        }
        {
          const double D = r * r - r * x;
          gx += -ga * (2 * x - r - x * x / r) / (D * D);
          gy += -ga * (2 * y - x * y / r) / (D * D);
        }
        return Vec2{gx, gy};
      };
      P.guard2d_ = [](Vec2 q) {
        const double r = norm(q);
        if (r < kPoleGuardRel) fail(ErrorCode::PoleProximity, "origin");
        if (r + q.x < kPoleGuardRel || r - q.x < kPoleGuardRel)
          fail(ErrorCode::PoleProximity, "x axis singular line");
      };
      break;
    }
    case Family::V_IV: {
      const double al = p("alpha"), be = p("beta"), ga = p("gamma");
      P.v2d_ = [=](Vec2 q) {
        const double r = norm(q), phi = std::atan2(q.y, q.x);
        return al / r + (be * std::cos(phi / 2) + ga * std::sin(phi / 2)) / r;
      };
      P.grad2d_ = [=](Vec2 q) {
        const double x = q.x, y = q.y, r = norm(q), phi = std::atan2(y, x);
        const double r3 = r * r * r;
        const double c = std::cos(phi / 2), s = std::sin(phi / 2);
        const double A = be * c + ga * s;
        const double dA = 0.5 * (-be * s + ga * c);
        // d phi/dx = -y/r^2, d phi/dy = x/r^2
        const double gx = -al * x / r3 - A * x / r3 + dA * (-y / (r * r)) / r;
        const double gy = -al * y / r3 - A * y / r3 + dA * (x / (r * r)) / r;
        return Vec2{gx, gy};
      };
      P.guard2d_ = [](Vec2 q) {
        const double r = norm(q);
        if (r < kPoleGuardRel) fail(ErrorCode::PoleProximity, "origin");
        if (q.x < 0 && std::abs(q.y) < kPoleGuardRel)
          fail(ErrorCode::PoleProximity, "half-angle branch cut");
      };
      break;
    }
    case Family::EllipticSn:
      set_axes(axis_elliptic_sn(p("hbar"), p("omega"), p("k")), axis_zero());
      break;
    case Family::EllipticCnWell:
      set_axes(axis_elliptic_cn_well(p("hbar"), p("omega"), p("k")), axis_zero());
      break;
    case Family::EllipticSnInverse:
      set_axes(axis_elliptic_sn_inverse(p("hbar"), p("omega"), p("k")), axis_zero());
      break;
    case Family::DegenerateCosh:
      set_axes(axis_deg_cosh(p("hbar"), p("omega")), axis_zero());
      break;
    case Family::DegenerateSinh:
      set_axes(axis_deg_sinh(p("hbar"), p("omega")), axis_zero());
      break;
    case Family::DegenerateSin:
      set_axes(axis_deg_sin(p("hbar"), p("omega")), axis_zero());
      break;
    case Family::Aniso9to1: {
      RationalTerms tx, ty;
      const double om = p("omega");
      tx.quad = 4.5 * om * om;
      ty.quad = 0.5 * om * om;
      set_axes(axis_rational(tx), axis_rational(ty));
      break;
    }
    case Family::SqrtSqrt: {
      const double b1 = p("beta1"), b2 = p("beta2");
      set_axes(axis_sqrt_abs(b1 * b1), axis_sqrt_abs(b2 * b2));
      break;
    }
    case Family::AbsSqrt: {
      const double a = p("a"), b = p("b");
      set_axes(axis_sqrt_abs(b * b), axis_abs(a * a));
      break;
    }
    case Family::OscPlusQuarticRoot: {
      const double om = p("omega");
      const double xmin = p("xmin"), xmax = p("xmax");
      QuarticParams qp;
      double xa, va;
      if (has(params, "c") || has(params, "d")) {
        qp.omega = om;
        qp.c = get(params, *info, "c");
        qp.d = get(params, *info, "d");
        xa = get(params, *info, "anchor_x");
        va = get(params, *info, "anchor_v");
      } else {
        qp = quartic_double_root_params(om, p("b"));
        xa = 0.0;
        va = quartic_V1(0.0, om, p("b"));
      }
      auto br = std::make_shared<QuarticBranch>(qp, xa, va, xmin, xmax);
      Axis1D axx;
      axx.v = [br](double x) { return br->value(x); };
      axx.d1 = [br](double x) { return br->d1(x); };
      axx.d2 = [br](double x) { return br->d2(x); };
      axx.d3 = [br](double x) { return br->d3(x); };
      RationalTerms ty;
      ty.quad = 0.5 * om * om;
      set_axes(std::move(axx), axis_rational(ty));
      P.domain_ = {xmin, xmax, -6.0, 6.0};
      break;
    }
    case Family::AbsPlusCubicRoot: {
      const double a = p("a");
      CubicParams cp{p("b"), p("d")};
      const double xmin = p("xmin"), xmax = p("xmax");
      auto br = std::make_shared<CubicBranch>(cp, 0.0, std::cbrt(cp.d), xmin, xmax);
      Axis1D axx;
      axx.v = [br](double x) { return br->value(x); };
      axx.d1 = [br](double x) { return br->d1(x); };
      axx.d2 = [br](double x) { return br->d2(x); };
      axx.d3 = [br](double x) { return br->d3(x); };
      set_axes(std::move(axx), axis_abs(a));
      P.domain_ = {xmin, xmax, -6.0, 6.0};
      break;
    }
    case Family::Rational1:
    case Family::Rational2:
    case Family::Rational3:
    case Family::Rational6: {
      const double hb = p("hbar");
      const bool imag = p("a_imag") != 0.0;
      const double a = imag ? p("a0") : p("a");
      const double a4 = a * a * a * a;
      const double h2 = hb * hb;
      const double xquad = (info->family == Family::Rational6)
                               ? 9.0 * h2 / (8.0 * a4)
                               : h2 / (8.0 * a4);
      const double yquad = h2 / (8.0 * a4);
      RationalTerms tx, ty;
      tx.quad = xquad;
      ty.quad = yquad;
      const bool x_pair = info->family != Family::Rational6;
      const bool y_pair = info->family == Family::Rational3 ||
                          info->family == Family::Rational6;
      auto add_pair = [&](RationalTerms& t) {
        if (imag) {
          t.smooth_pair = true;
          t.pair_coeff = h2;
          t.pair_a0 = a;
        } else {
          t.inv2.push_back({h2, a});
          t.inv2.push_back({h2, -a});
        }
      };
      if (x_pair) add_pair(tx);
      if (y_pair) add_pair(ty);
      if (info->family == Family::Rational2) ty.inv2.push_back({h2, 0.0});
      set_axes(axis_rational(tx), axis_rational(ty));
      break;
    }
    case Family::Aniso9to1InvY: {
      const double om = p("omega"), hb = p("hbar");
      RationalTerms tx, ty;
      tx.quad = 4.5 * om * om;
      ty.quad = 0.5 * om * om;
      ty.inv2.push_back({hb * hb, 0.0});
      set_axes(axis_rational(tx), axis_rational(ty));
      break;
    }
    case Family::WeierstrassSum: {
      const double hb = p("hbar"), g2 = p("g2"), g3 = p("g3");
      set_axes(axis_weierstrass(hb, g2, g3), axis_weierstrass(hb, g2, g3));
      P.domain_ = {0.02, 4.0, 0.02, 4.0};
      break;
    }
    case Family::PainleveI_I: {
      const double hb = p("hbar"), om1 = p("omega1"), om2 = p("omega2");
      const double z0 = p("z0"), span = p("zspan");
      auto s1 = std::make_shared<PainleveSolution>(
          PainleveKind::P_I, PainleveParams{}, z0, p("w0"), p("wp0"),
          z0 - span, z0 + span);
      auto s2 = std::make_shared<PainleveSolution>(
          PainleveKind::P_I, PainleveParams{}, z0, p("w0"), p("wp0"),
          z0 - span, z0 + span);
      set_axes(axis_painleve1(hb, om1, s1), axis_painleve1(hb, om2, s2));
      const double pad = 1e-3;
      P.domain_ = {(s1->covered_min() + pad) / om1, (s1->covered_max() - pad) / om1,
                   (s2->covered_min() + pad) / om2, (s2->covered_max() - pad) / om2};
      break;
    }
    case Family::PainleveI_linear: {
      const double hb = p("hbar"), om1 = p("omega1");
      const double z0 = p("z0"), span = p("zspan");
      auto s1 = std::make_shared<PainleveSolution>(
          PainleveKind::P_I, PainleveParams{}, z0, p("w0"), p("wp0"),
          z0 - span, z0 + span);
      RationalTerms ty;
      ty.lin = p("a");
      set_axes(axis_painleve1(hb, om1, s1), axis_rational(ty));
      const double pad = 1e-3;
      P.domain_ = {(s1->covered_min() + pad) / om1,
                   (s1->covered_max() - pad) / om1, -6.0, 6.0};
      break;
    }
    case Family::PainleveII_a: {
      const double hb = p("hbar"), b = p("b");
      const double lam = std::cbrt(2.0 * b / (hb * hb));
      const double c2 = std::pow(2.0 * hb * b, 2.0 / 3.0);
      const double z0 = p("z0"), span = p("zspan");
      auto sol = std::make_shared<PainleveSolution>(
          PainleveKind::P_II, PainleveParams{p("alpha"), 0.0}, z0, p("w0"),
          p("wp0"), z0 - span, z0 + span);
      RationalTerms ty;
      ty.lin = p("a");
      set_axes(axis_painleve2_sq(c2, lam, b, sol), axis_rational(ty));
      const double pad = 1e-3;
      P.domain_ = {(sol->covered_min() + pad) / lam,
                   (sol->covered_max() - pad) / lam, -6.0, 6.0};
      break;
    }
    case Family::PainleveII_b: {
      const double hb = p("hbar"), b = p("b");
      const double lam = -std::cbrt(4.0 * b / (hb * hb));
      const double c2 = std::cbrt(2.0 * hb * hb * b * b);
      const double z0 = p("z0"), span = p("zspan");
      auto sol = std::make_shared<PainleveSolution>(
          PainleveKind::P_II, PainleveParams{p("alpha"), 0.0}, z0, p("w0"),
          p("wp0"), z0 - span, z0 + span);
      RationalTerms ty;
      ty.lin = p("a");
      set_axes(axis_painleve2_miura(c2, lam, sol), axis_rational(ty));
      const double pad = 1e-3;
      double xa = (sol->covered_min() + pad) / lam;
      double xb = (sol->covered_max() - pad) / lam;
      if (xa > xb) std::swap(xa, xb);
      P.domain_ = {xa, xb, -6.0, 6.0};
      break;
    }
    case Family::PainleveIV: {
      const double a_str = p("a"), hb = p("hbar");
      const double om = std::sqrt(2.0 * a_str);
      const double lam = std::sqrt(om / hb);
      const double z0 = p("z0"), span = p("zspan");
      auto sol = std::make_shared<PainleveSolution>(
          PainleveKind::P_IV, PainleveParams{p("alpha"), p("beta")}, z0,
          p("w0"), p("wp0"), z0 - span, z0 + span);
      RationalTerms ty;
      ty.quad = a_str;
      set_axes(axis_painleve4(a_str, hb, p("alpha"), p("eps"), lam, sol),
               axis_rational(ty));
      const double pad = 1e-3;
      P.domain_ = {(sol->covered_min() + pad) / lam,
                   (sol->covered_max() - pad) / lam, -6.0, 6.0};
      break;
    }
  }
  // quartic/cubic general-parameter entries expose anchor keys
  return P;
}

// ----------------------------------------------------------------------

EllipticOdeFit check_elliptic_ode(const Potential& pot,
                                  const std::vector<double>& xs) {
  const Axis1D& ax = pot.x_axis();
  const double hb = pot.hbar();
  Eigen::MatrixXd M(xs.size(), 3);
  Eigen::VectorXd rhs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double V = ax.v(xs[i]);
    const double Vp = ax.d1(xs[i]);
    M(i, 0) = V * V;
    M(i, 1) = V;
    M(i, 2) = 1.0;
    rhs(i) = hb * hb * Vp * Vp - 4.0 * V * V * V;
  }
  EllipticOdeFit fit;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  if (svd.rank() < 3) fit.degenerate = true;
  Eigen::Vector3d abc = svd.solve(rhs);
  fit.alpha = abc(0);
  fit.beta = abc(1);
  fit.gamma = abc(2);
  Eigen::VectorXd res = M * abc - rhs;
  fit.max_residual = res.cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace superint
