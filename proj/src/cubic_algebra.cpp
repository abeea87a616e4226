#include "superint/cubic_algebra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace superint {

double StructureFunction::eval(double x, double u, double E) const {
  if (has_factored()) {
    double v = overall_coefficient;
    for (const auto& r : factored_roots)
      v *= (x + u - (r.slope * E + r.offset));
    return v;
  }
  return phi(x, u, E);
}

namespace {
// multiply polynomial (in E) by (c0 + c1 E)
std::vector<double> poly_mul_linear(const std::vector<double>& p, double c0,
                                    double c1) {
  std::vector<double> out(p.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] += p[i] * c0;
    out[i + 1] += p[i] * c1;
  }
  return out;
}
}  // namespace

std::pair<CubicAlgebraModel, StructureFunction> build_rational1_model(
    double a_or_a0, bool a_imag, double hbar) {
  if (a_or_a0 == 0.0) fail(ErrorCode::InvalidArgument, "a must be nonzero");
  const double a2 = a_imag ? -a_or_a0 * a_or_a0 : a_or_a0 * a_or_a0;
  const double a4 = a2 * a2, a6 = a4 * a2, a8 = a4 * a4;
  const double h2 = hbar * hbar;
  const double th = a2 / h2;  // theta(E) = th * E
  const double kappa = -std::pow(hbar, 8) / a4;

  StructureFunction sf;
  sf.overall_coefficient = kappa;
  sf.factored_roots = {{-th, -0.5}, {th, 0.5}, {-th, 1.5}, {-th, 2.5}};
  sf.phi = [sf2 = sf](double x, double u, double E) {
    return sf2.eval(x, u, E);
  };

  // monic expansion of prod(xi - r_i): coefficients c3..c0 as polys in E
  // (xi^4 + c3 xi^3 + c2 xi^2 + c1 xi + c0)
  std::vector<std::vector<double>> elem = {{1.0}};  // e_0 = 1
  for (const auto& r : sf.factored_roots) {
    std::vector<std::vector<double>> next(elem.size() + 1);
    for (std::size_t k = 0; k < elem.size() + 1; ++k) next[k] = {0.0};
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
      if (a.size() < b.size()) a.resize(b.size(), 0.0);
      for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    for (std::size_t k = 0; k < elem.size(); ++k) {
      add(next[k], elem[k]);  // without this root
      add(next[k + 1], poly_mul_linear(elem[k], r.offset, r.slope));
    }
    elem = std::move(next);
  }
  // prod(xi - r_i) = sum_k (-1)^k e_k xi^{4-k}: c_{4-k} = (-1)^k e_k
  auto ek = [&](int k) {
    std::vector<double> v = elem[k];
    if (k % 2 == 1)
      for (double& e : v) e = -e;
    return v;
  };
  const EPoly c3{ek(1)}, c2{ek(2)}, c1{ek(3)};

  CubicAlgebraModel m;
  m.id = a_imag ? "rational-1(a=i a0)" : "rational-1(a real)";
  m.alpha = 1.0;
  m.beta = 8.0 * kappa;
  auto scale_shift = [&](const EPoly& base, double shift, double factor) {
    EPoly out;
    out.c = base.c;
    if (out.c.empty()) out.c = {0.0};
    out.c[0] += shift;
    for (double& e : out.c) e *= factor;
    return out;
  };
  // gamma = 2 kappa (6 + 3 c3);  delta = 2 kappa (4 + 3 c3 + 2 c2);
  // eps = 2 kappa (1 + c3 + c2 + c1)
  {
    EPoly g;
    g.c = c3.c;
    for (double& e : g.c) e *= 3.0;
    g.c[0] += 6.0;
    for (double& e : g.c) e *= 2.0 * kappa;
    m.gamma = g;
  }
  {
    EPoly dta;
    dta.c.assign(std::max(c3.c.size(), c2.c.size()), 0.0);
    for (std::size_t i = 0; i < c3.c.size(); ++i) dta.c[i] += 3.0 * c3.c[i];
    for (std::size_t i = 0; i < c2.c.size(); ++i) dta.c[i] += 2.0 * c2.c[i];
    dta.c[0] += 4.0;
    for (double& e : dta.c) e *= 2.0 * kappa;
    m.delta = dta;
  }
  {
    EPoly ep;
    ep.c.assign(std::max({c3.c.size(), c2.c.size(), c1.c.size()}), 0.0);
    for (std::size_t i = 0; i < c3.c.size(); ++i) ep.c[i] += c3.c[i];
    for (std::size_t i = 0; i < c2.c.size(); ++i) ep.c[i] += c2.c[i];
    for (std::size_t i = 0; i < c1.c.size(); ++i) ep.c[i] += c1.c[i];
    ep.c[0] += 1.0;
    for (double& e : ep.c) e *= 2.0 * kappa;
    m.eps = ep;
  }
  (void)scale_shift;
  // Casimir polynomial in the energy
  m.casimir.c = {-3.0 * std::pow(hbar, 10) / a8,
                 -40.0 * std::pow(hbar, 8) / a6,
                 16.0 * std::pow(hbar, 6) / a4,
                 32.0 * std::pow(hbar, 4) / a2,
                 -16.0 * h2};
  return {m, sf};
}

// ----------------------------------------------------------------------

namespace {

double phi_scale(const StructureFunction& sf, int p, double u, double E) {
  double sc = std::abs(sf.overall_coefficient);
  if (sf.has_factored()) {
    for (const auto& r : sf.factored_roots)
      sc *= std::max(1.0, std::abs(u) + std::abs(r.slope * E + r.offset) +
                              p + 1.0);
  } else {
    for (int x = 0; x <= p + 1; ++x)
      sc = std::max(sc, std::abs(sf.eval(x, u, E)));
    sc = std::max(sc, 1.0);
  }
  return sc;
}

bool positivity_certified(const StructureFunction& sf, int p, double u,
                          double E, double margin) {
  const double sc = phi_scale(sf, p, u, E);
  for (int x = 1; x <= p; ++x)
    if (sf.eval(x, u, E) <= margin * sc) return false;
  return true;
}

}  // namespace

SpectrumResult solve_spectrum(const StructureFunction& sf, int p_max,
                              const SolveOptions& opts) {
  SpectrumResult out;
  for (int p = 0; p <= p_max; ++p) {
    std::size_t before = out.levels.size();
    if (sf.has_factored()) {
      const auto& R = sf.factored_roots;
      for (std::size_t i = 0; i < R.size(); ++i) {
        for (std::size_t j = 0; j < R.size(); ++j) {
          if (i == j) continue;
          const double ds = R[j].slope - R[i].slope;
          if (std::abs(ds) < 1e-14) continue;  // no isolated solution
          const double E = (p + 1.0 - (R[j].offset - R[i].offset)) / ds;
          const double u = R[i].slope * E + R[i].offset;
          const double sc = phi_scale(sf, p, u, E);
          if (std::abs(sf.eval(0, u, E)) > opts.boundary_tol * sc) continue;
          if (std::abs(sf.eval(p + 1, u, E)) > opts.boundary_tol * sc)
            continue;
          if (!positivity_certified(sf, p, u, E, opts.positivity_margin))
            continue;
          SpectrumLevel lv;
          lv.p = p;
          lv.u = u;
          lv.E = E;
          lv.branch = "r" + std::to_string(i + 1) + "->r" + std::to_string(j + 1);
          lv.positivity = true;
          out.levels.push_back(lv);
        }
      }
    } else {
      // multi-start damped Newton on (Phi(0), Phi(p+1)) in (u, E)
      std::vector<std::pair<double, double>> found;
      for (int iu = 0; iu < opts.starts_per_axis; ++iu) {
        for (int ie = 0; ie < opts.starts_per_axis; ++ie) {
          double u = opts.u_min + (opts.u_max - opts.u_min) *
                                      (iu + 0.5) / opts.starts_per_axis;
          double E = opts.E_min + (opts.E_max - opts.E_min) *
                                      (ie + 0.5) / opts.starts_per_axis;
          bool converged = false;
          for (int it = 0; it < opts.max_newton; ++it) {
            const double f1 = sf.eval(0, u, E);
            const double f2 = sf.eval(p + 1, u, E);
            const double hu = 1e-7 * std::max(1.0, std::abs(u));
            const double hE = 1e-7 * std::max(1.0, std::abs(E));
            const double a11 = (sf.eval(0, u + hu, E) - sf.eval(0, u - hu, E)) / (2 * hu);
            const double a12 = (sf.eval(0, u, E + hE) - sf.eval(0, u, E - hE)) / (2 * hE);
            const double a21 = (sf.eval(p + 1, u + hu, E) - sf.eval(p + 1, u - hu, E)) / (2 * hu);
            const double a22 = (sf.eval(p + 1, u, E + hE) - sf.eval(p + 1, u, E - hE)) / (2 * hE);
            const double det = a11 * a22 - a12 * a21;
            if (std::abs(det) < 1e-300) break;
            double du = (f1 * a22 - f2 * a12) / det;
            double dE = (a11 * f2 - a21 * f1) / det;
            const double damp = std::min(1.0, 2.0 / (std::abs(du) + std::abs(dE) + 1e-30));
            u -= damp * du;
            E -= damp * dE;
            if (std::abs(f1) + std::abs(f2) <
                1e-13 * phi_scale(sf, p, u, E)) {
              converged = true;
              break;
            }
          }
          if (!converged) continue;
          bool dup = false;
          for (auto& [uu, ee] : found)
            if (std::abs(uu - u) < 1e-6 && std::abs(ee - E) < 1e-6) dup = true;
          if (dup) continue;
          found.push_back({u, E});
          if (!positivity_certified(sf, p, u, E, opts.positivity_margin))
            continue;
          SpectrumLevel lv;
          lv.p = p;
          lv.u = u;
          lv.E = E;
          lv.branch = "newton";
          lv.positivity = true;
          out.levels.push_back(lv);
        }
      }
    }
    if (out.levels.size() == before) out.no_solution_p.push_back(p);
  }
  return out;
}

double check_commutation(const CubicAlgebraModel& model,
                         const StructureFunction& sf,
                         const SpectrumLevel& level) {
  const int n = level.p + 1;
  Eigen::VectorXd Phi(n);
  for (int k = 0; k < n; ++k) {
    Phi(k) = sf.eval(k, level.u, level.E);
    if (k >= 1 && Phi(k) <= 0.0)
      fail(ErrorCode::RepresentationInconsistent,
           "structure function not positive inside the multiplet");
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(Phi(k));
  const Eigen::MatrixXd bt = b.transpose();
  const double s = std::sqrt(model.alpha);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) A(k, k) = s * (k + level.u);
  const Eigen::MatrixXd B = bt + b;
  const Eigen::MatrixXd C = A * B - B * A;

  const Eigen::MatrixXd r1 = (A * C - C * A) - model.alpha * B;
  const Eigen::MatrixXd rhs = model.beta * A * A * A +
                              model.gamma(level.E) * A * A +
                              model.delta(level.E) * A +
                              model.eps(level.E) *
                                  Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r2 = (B * C - C * B) - rhs;
  const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff(),
                                 (model.alpha * B).cwiseAbs().maxCoeff()});
  return std::max(r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff()) / scale;
}

}  // namespace superint
