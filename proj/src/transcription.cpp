#include "lcqp/transcription.hpp"

#include <cmath>
#include <string>

namespace lcqp {

void validate(const IvocpConfig& cfg) {
  if (cfg.N < 1) throw InvalidValue("step count N must be at least 1");
  if (!(cfg.regularization_eps > 0.0) || !std::isfinite(cfg.regularization_eps)) {
    throw InvalidValue("regularization_eps must be positive and finite");
  }
}

IvocpProblem build_ivocp(const IvocpConfig& cfg) {
  validate(cfg);
  const int N = cfg.N;
  const double h = 2.0 / N;
  const double eps = cfg.regularization_eps;

  IvocpProblem out;
  out.map = IvocpIndexMap{N};
  out.h = h;
  const std::size_t n = out.map.size();
  const IvocpIndexMap& ix = out.map;

  LcqpProblem& p = out.problem;
  p.Q = Matrix(n, n);
  p.g.assign(n, 0.0);
  p.Q(ix.state(0), ix.state(0)) = eps;
  for (int k = 1; k < N; ++k) p.Q(ix.state(k), ix.state(k)) = 2.0 * h;
  p.Q(ix.state(N), ix.state(N)) = 2.0 * h + 2.0;
  p.g[ix.state(N)] = -10.0 / 3.0;
  for (int k = 1; k <= N; ++k) {
    p.Q(ix.switch_frac(k), ix.switch_frac(k)) = eps;
    p.Q(ix.neg_part(k), ix.neg_part(k)) = eps;
    p.Q(ix.complement(k), ix.complement(k)) = eps;
  }

  // Dynamics and slack identities as paired one-sided rows: first the 2N
  // dynamics rows, then the 2N slack rows, each + before -.
  p.A = Matrix(static_cast<std::size_t>(4 * N), n);
  p.b.assign(static_cast<std::size_t>(4 * N), 0.0);
  for (int k = 1; k <= N; ++k) {
    const std::size_t r = static_cast<std::size_t>(2 * (k - 1));
    p.A(r, ix.state(k - 1)) = 1.0;
    p.A(r, ix.state(k)) = -1.0;
    p.A(r, ix.switch_frac(k)) = -2.0 * h;
    p.b[r] = -3.0 * h;
    p.A(r + 1, ix.state(k - 1)) = -1.0;
    p.A(r + 1, ix.state(k)) = 1.0;
    p.A(r + 1, ix.switch_frac(k)) = 2.0 * h;
    p.b[r + 1] = 3.0 * h;
  }
  for (int k = 1; k <= N; ++k) {
    const std::size_t r = static_cast<std::size_t>(2 * N + 2 * (k - 1));
    p.A(r, ix.switch_frac(k)) = 1.0;
    p.A(r, ix.complement(k)) = 1.0;
    p.b[r] = 1.0;
    p.A(r + 1, ix.switch_frac(k)) = -1.0;
    p.A(r + 1, ix.complement(k)) = -1.0;
    p.b[r + 1] = -1.0;
  }

  // Sign logic: per step, (x_k + lam_k) perp s_k and lam_k perp y_k.
  p.L = Matrix(static_cast<std::size_t>(2 * N), n);
  p.R = Matrix(static_cast<std::size_t>(2 * N), n);
  for (int k = 1; k <= N; ++k) {
    const std::size_t pair = static_cast<std::size_t>(2 * (k - 1));
    p.L(pair, ix.state(k)) = 1.0;
    p.L(pair, ix.neg_part(k)) = 1.0;
    p.R(pair, ix.complement(k)) = 1.0;
    p.L(pair + 1, ix.neg_part(k)) = 1.0;
    p.R(pair + 1, ix.switch_frac(k)) = 1.0;
  }
  return out;
}

double AnalyticTrajectory::state_at(double t) const {
  if (x0 >= 0.0) return x0 + t;
  const double ts = -x0 / 3.0;
  if (t <= ts) return x0 + 3.0 * t;
  return t - ts;
}

AnalyticTrajectory analytic_trajectory(double x0) {
  AnalyticTrajectory traj;
  traj.x0 = x0;
  if (x0 >= 0.0) {
    // Slope 1 throughout.
    const double xe = x0 + 2.0;
    traj.objective = (xe * xe * xe - x0 * x0 * x0) / 3.0 +
                     (x0 + 1.0 / 3.0) * (x0 + 1.0 / 3.0);
    return traj;
  }
  const double ts = -x0 / 3.0;
  if (ts >= 2.0) {
    // Slope 3 throughout, never reaching zero.
    const double xe = x0 + 6.0;
    traj.objective = (xe * xe * xe - x0 * x0 * x0) / 9.0 +
                     (xe - 5.0 / 3.0) * (xe - 5.0 / 3.0);
    return traj;
  }
  // Slope 3 until the crossing at ts, slope 1 after.
  traj.switch_time = ts;
  const double tail = 2.0 - ts;
  traj.objective = -x0 * x0 * x0 / 9.0 + tail * tail * tail / 3.0 +
                   (tail - 5.0 / 3.0) * (tail - 5.0 / 3.0);
  return traj;
}

double analytic_optimal_x0() {
  static const double cached = [] {
    // The minimizer sits inside the regime where the trajectory crosses
    // zero mid-horizon. Differentiating the cost there (switch time
    // ts = -x0/3, tail = 2 - ts) gives
    //   J'(x0) = (-x0^2 + tail^2 + 2 tail - 10/3) / 3,
    // which is negative at -3 and positive at 0; bisecting the sign change
    // pins the root to machine precision, which comparison-based searches
    // on J itself cannot reach near a flat minimum.
    auto slope = [](double x0) {
      const double tail = 2.0 + x0 / 3.0;
      return (-x0 * x0 + tail * tail + 2.0 * tail - 10.0 / 3.0) / 3.0;
    };
    double lo = -3.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return cached;
}

double extract_x0(const Vector& x, const IvocpIndexMap& map) {
  if (x.size() != map.size()) {
    throw IndexMapMismatch("solution vector has length " +
                           std::to_string(x.size()) + ", layout expects " +
                           std::to_string(map.size()));
  }
  return x[map.state(0)];
}

Vector forward_simulate(const IvocpConfig& cfg, double x0) {
  validate(cfg);
  const IvocpIndexMap ix{cfg.N};
  const double h = 2.0 / cfg.N;
  Vector v(ix.size(), 0.0);
  double prev = x0;
  v[ix.state(0)] = x0;
  for (int k = 1; k <= cfg.N; ++k) {
    const double below = prev + 3.0 * h;  // step taken entirely below zero
    const double above = prev + h;        // step taken entirely above zero
    double xk, yk, lk;
    if (below <= 0.0) {
      xk = below;
      yk = 0.0;
      lk = -xk;
    } else if (above >= 0.0) {
      xk = above;
      yk = 1.0;
      lk = 0.0;
    } else {
      // Crossing step: the implicit update pins the state to zero with a
      // fractional switch value.
      xk = 0.0;
      yk = below / (2.0 * h);
      lk = 0.0;
    }
    v[ix.state(k)] = xk;
    v[ix.switch_frac(k)] = yk;
    v[ix.neg_part(k)] = lk;
    v[ix.complement(k)] = 1.0 - yk;
    prev = xk;
  }
  return v;
}

}  // namespace lcqp
