#include "superint/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace superint {

namespace {

// ----- exact 1D flows for the kink axes -----

// V = c |x|: piecewise constant force, exact parabolic arcs with event
// splitting at x = 0.
void advance_abs(double c, double& x, double& p, double tau) {
  int guard = 0;
  while (tau > 0.0 && ++guard < 64) {
    double s = (x != 0.0) ? (x > 0 ? 1.0 : -1.0) : (p > 0 ? 1.0 : (p < 0 ? -1.0 : 0.0));
    if (s == 0.0) return;  // resting exactly on the kink
    const double a = -c * s;
    // smallest positive root of x + p t + a t^2/2 = 0 in (0, tau]
    double tc = -1.0;
    const double A2 = 0.5 * a;
    const double disc = p * p - 4.0 * A2 * x;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double r : {(-p - sq) / (2.0 * A2), (-p + sq) / (2.0 * A2)}) {
        if (r > 1e-15 && r <= tau && (tc < 0.0 || r < tc)) tc = r;
      }
    }
    if (tc < 0.0) {
      x += p * tau + 0.5 * a * tau * tau;
      p += a * tau;
      return;
    }
    p += a * tc;
    x = 0.0;
    tau -= tc;
  }
}

// V = c sqrt|x|: exact flow via the closed-form time-of-flight
//   F(u) = time from x=0 (outbound) to x=u^2,  u = sqrt|x|,
//   F(u) = (4/B^2) [ (2/3) A^{3/2} - sqrt(w) (A - w/3) ],  w = A - B u,
// with A = 2e, B = 2c. F is inverted through the monotone cubic
// G(v) = A v - v^3/3 on v = sqrt(w) in [0, sqrt(A)].
struct SqrtFlow {
  double A, B;
  double F(double u) const {
    const double w = std::max(0.0, A - B * u);
    return 4.0 / (B * B) *
           ((2.0 / 3.0) * std::pow(A, 1.5) - std::sqrt(w) * (A - w / 3.0));
  }
  double Finv(double t) const {
    // G(v) = A v - v^3/3 = (2/3) A^{3/2} - t B^2/4
    const double target = (2.0 / 3.0) * std::pow(A, 1.5) - t * B * B / 4.0;
    double lo = 0.0, hi = std::sqrt(A);
    double v = 0.5 * hi;
    for (int it = 0; it < 80; ++it) {
      const double g = A * v - v * v * v / 3.0 - target;
      if (g > 0)
        hi = v;
      else
        lo = v;
      const double dg = A - v * v;
      double vn = (dg > 0) ? v - g / dg : 0.5 * (lo + hi);
      if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
      if (std::abs(vn - v) < 1e-16 * std::max(1.0, v)) { v = vn; break; }
      v = vn;
    }
    const double w = v * v;
    return (A - w) / B;  // u
  }
};

void advance_sqrt(double c, double& x, double& p, double tau) {
  const double e = 0.5 * p * p + c * std::sqrt(std::abs(x));
  if (e <= 0.0) return;
  SqrtFlow fl{2.0 * e, 2.0 * c};
  const double uturn = fl.A / fl.B;
  int guard = 0;
  while (tau > 1e-18 && ++guard < 64) {
    const double s =
        (x != 0.0) ? (x > 0 ? 1.0 : -1.0) : (p >= 0 ? 1.0 : -1.0);
    double u = std::sqrt(std::abs(x));
    if (p * s >= 0.0) {
      // outbound: possibly reach the turning point within tau
      const double t_turn = fl.F(uturn) - fl.F(u);
      if (tau < t_turn) {
        const double un = fl.Finv(fl.F(u) + tau);
        x = s * un * un;
        p = s * std::sqrt(std::max(0.0, 2.0 * e - 2.0 * c * un));
        return;
      }
      tau -= t_turn;
      u = uturn;
    }
    // inbound from u toward the kink
    const double t_center = fl.F(u);
    if (tau < t_center) {
      const double un = fl.Finv(fl.F(u) - tau);
      x = s * un * un;
      p = -s * std::sqrt(std::max(0.0, 2.0 * e - 2.0 * c * un));
      return;
    }
    tau -= t_center;
    x = 0.0;
    p = -s * std::sqrt(2.0 * e);  // crosses into the mirror region
  }
}

enum class AxisScheme { Leapfrog, AbsExact, SqrtExact };

struct AxisStepper {
  AxisScheme scheme = AxisScheme::Leapfrog;
  double kink_coeff = 0.0;
  const Axis1D* axis = nullptr;
};

AxisStepper make_stepper(const Axis1D& ax) {
  AxisStepper st;
  st.axis = &ax;
  for (const auto& k : ax.kinks) {
    if (k.kind == Axis1D::KinkKind::AbsLinear) {
      st.scheme = AxisScheme::AbsExact;
      st.kink_coeff = k.coeff;
    } else if (k.kind == Axis1D::KinkKind::SqrtAbs) {
      st.scheme = AxisScheme::SqrtExact;
      st.kink_coeff = k.coeff;
    }
  }
  return st;
}

}  // namespace

Trajectory integrate(const Potential& pot, const PhaseState& s0, double dt,
                     long nsteps, const std::vector<PhaseFunction>& watch,
                     const IntegrateOptions& opts) {
  Trajectory tr;
  tr.dt = dt;
  tr.stride = opts.sample_stride;
  tr.watch_names.reserve(watch.size());
  for (const auto& w : watch) tr.watch_names.push_back(w.name);
  tr.watched.resize(watch.size());

  const bool sep = pot.separable();
  AxisStepper stx, sty;
  if (sep) {
    stx = make_stepper(pot.x_axis());
    sty = make_stepper(pot.y_axis());
  }

  PhaseState s = s0;
  s.t = 0.0;

  auto H_of = [&](const PhaseState& st) {
    return 0.5 * (st.p1 * st.p1 + st.p2 * st.p2) + pot.eval({st.x1, st.x2});
  };

  auto sample = [&](const PhaseState& st) {
    tr.states.push_back(st);
    tr.energy.push_back(H_of(st));
    for (std::size_t i = 0; i < watch.size(); ++i) {
      double v;
      try {
        v = watch[i].v(st);
      } catch (const Error&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      tr.watched[i].push_back(v);
    }
  };

  sample(s);

  // leapfrog state: current force (per axis / full)
  Vec2 force{};
  auto axis_force = [&](const AxisStepper& st, double x) {
    return -st.axis->d1(x);
  };
  try {
    if (!sep) {
      const Vec2 g = pot.grad({s.x1, s.x2});
      force = {-g.x, -g.y};
    } else {
      if (stx.scheme == AxisScheme::Leapfrog) force.x = axis_force(stx, s.x1);
      if (sty.scheme == AxisScheme::Leapfrog) force.y = axis_force(sty, s.x2);
    }

    for (long step = 1; step <= nsteps; ++step) {
      if (sep) {
        // kick-drift-kick per smooth axis; exact flows on kink axes
        if (stx.scheme == AxisScheme::Leapfrog) {
          double ph = s.p1 + 0.5 * dt * force.x;
          s.x1 += dt * ph;
          force.x = axis_force(stx, s.x1);
          s.p1 = ph + 0.5 * dt * force.x;
        } else if (stx.scheme == AxisScheme::AbsExact) {
          advance_abs(stx.kink_coeff, s.x1, s.p1, dt);
        } else {
          advance_sqrt(stx.kink_coeff, s.x1, s.p1, dt);
        }
        if (sty.scheme == AxisScheme::Leapfrog) {
          double ph = s.p2 + 0.5 * dt * force.y;
          s.x2 += dt * ph;
          force.y = axis_force(sty, s.x2);
          s.p2 = ph + 0.5 * dt * force.y;
        } else if (sty.scheme == AxisScheme::AbsExact) {
          advance_abs(sty.kink_coeff, s.x2, s.p2, dt);
        } else {
          advance_sqrt(sty.kink_coeff, s.x2, s.p2, dt);
        }
      } else {
        const double ph1 = s.p1 + 0.5 * dt * force.x;
        const double ph2 = s.p2 + 0.5 * dt * force.y;
        s.x1 += dt * ph1;
        s.x2 += dt * ph2;
        const Vec2 g = pot.grad({s.x1, s.x2});
        force = {-g.x, -g.y};
        s.p1 = ph1 + 0.5 * dt * force.x;
        s.p2 = ph2 + 0.5 * dt * force.y;
      }
      s.t = step * dt;
      if (std::abs(s.x1) > opts.overflow_limit ||
          std::abs(s.x2) > opts.overflow_limit ||
          std::abs(s.p1) > opts.overflow_limit ||
          std::abs(s.p2) > opts.overflow_limit) {
        tr.status = Trajectory::Status::Overflow;
        break;
      }
      if (step % opts.sample_stride == 0) sample(s);
    }
  } catch (const Error& e) {
    tr.status = (e.code() == ErrorCode::PoleProximity ||
                 e.code() == ErrorCode::DomainViolation)
                    ? Trajectory::Status::PoleEncounter
                    : Trajectory::Status::Overflow;
  }
  return tr;
}

std::vector<Trajectory> integrate_batch(const Potential& pot,
                                        const std::vector<PhaseState>& starts,
                                        double dt, long nsteps,
                                        const std::vector<PhaseFunction>& watch,
                                        const IntegrateOptions& opts,
                                        par::Exec exec) {
  std::vector<Trajectory> out(starts.size());
  par::for_each_index(starts.size(), exec, [&](std::size_t i) {
    out[i] = integrate(pot, starts[i], dt, nsteps, watch, opts);
  });
  return out;
}

ClosureResult detect_closure(const Trajectory& traj, double tol) {
  const auto& st = traj.states;
  if (st.size() < 16) fail(ErrorCode::InvalidArgument, "trajectory too short");

  // per-coordinate scales
  double mn[4], mx[4];
  for (int c = 0; c < 4; ++c) {
    mn[c] = 1e300;
    mx[c] = -1e300;
  }
  auto coords = [](const PhaseState& s, int c) {
    return c == 0 ? s.x1 : c == 1 ? s.x2 : c == 2 ? s.p1 : s.p2;
  };
  for (const auto& s : st)
    for (int c = 0; c < 4; ++c) {
      mn[c] = std::min(mn[c], coords(s, c));
      mx[c] = std::max(mx[c], coords(s, c));
    }
  double scale[4];
  for (int c = 0; c < 4; ++c) scale[c] = std::max(mx[c] - mn[c], 1e-300);

  // escape test: configuration range keeps growing => not bounded
  {
    double r_half = 0.0, r_full = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double r = std::hypot(st[i].x1, st[i].x2);
      if (i < st.size() / 2) r_half = std::max(r_half, r);
      r_full = std::max(r_full, r);
    }
    if (r_full > 2.0 * r_half && r_full > 10.0 * std::hypot(st[0].x1, st[0].x2) + 1.0)
      fail(ErrorCode::NotBounded, "trajectory escapes");
  }

  std::vector<double> d(st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double u = (coords(st[i], c) - coords(st[0], c)) / scale[c];
      acc += u * u;
    }
    d[i] = std::sqrt(acc);
  }
  // skip the initial departure
  std::size_t emerged = 0;
  for (std::size_t i = 1; i < st.size(); ++i)
    if (d[i] > 0.1) {
      emerged = i;
      break;
    }
  if (emerged == 0) {
    // never left the neighborhood: treat the smallest nonzero-time return
    emerged = st.size() / 4;
  }
  std::size_t imin = emerged;
  for (std::size_t i = emerged; i < st.size(); ++i)
    if (d[i] < d[imin]) imin = i;

  double dmin = d[imin];
  double period = st[imin].t;
  if (imin > 0 && imin + 1 < st.size()) {
    // parabolic refinement on d^2
    const double y0 = d[imin - 1] * d[imin - 1];
    const double y1 = d[imin] * d[imin];
    const double y2 = d[imin + 1] * d[imin + 1];
    const double den = y0 - 2.0 * y1 + y2;
    if (den > 0.0) {
      const double sh = 0.5 * (y0 - y2) / den;
      const double ymin = y1 - 0.25 * (y0 - y2) * sh;
      dmin = std::sqrt(std::max(ymin, 0.0));
      period += sh * traj.dt * traj.stride;
    }
  }
  return {dmin < tol, period, dmin};
}

bool check_bounded(const Potential& pot, double E1, double E2) {
  if (pot.family() == Family::Kepler) {
    // radial effective potential, E2 as angular momentum
    const double alpha = pot.params().count("alpha")
                             ? pot.params().at("alpha")
                             : family_info(Family::Kepler).params[0].second;
    bool confined = false;
    for (double r = 0.05; r < 400.0; r *= 1.1) {
      const double ueff = alpha / r + 0.5 * E2 * E2 / (r * r);
      if (r > 1.0 && ueff > E1) confined = true;
    }
    const double u_far = alpha / 400.0;
    return confined || u_far > E1;
  }
  if (!pot.separable()) fail(ErrorCode::NotSeparable, "boundedness test needs V1+V2");
  auto axis_bounded = [&](const Axis1D& ax, double E, double lo, double hi) {
    // the sublevel set {V <= E} must stay away from the scan boundary
    const int N = 2000;
    bool hit_boundary = false;
    for (int i = 0; i < N; ++i) {
      const double x = lo + (hi - lo) * i / (N - 1);
      double v;
      try {
        v = ax.v(x);
      } catch (const Error&) {
        continue;
      }
      if (v <= E && (i < 5 || i > N - 6)) hit_boundary = true;
    }
    return !hit_boundary;
  };
  const Region& dom = pot.domain();
  return axis_bounded(pot.x_axis(), E1, dom.xmin, dom.xmax) &&
         axis_bounded(pot.y_axis(), E2, dom.ymin, dom.ymax);
}

}  // namespace superint
