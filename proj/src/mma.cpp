#include "mmc/mma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mmc/errors.hpp"

namespace mmc {

namespace {

// Separable subproblem in normalized variables:
//   min  sum_j p0_j/(U_j-x_j) + q0_j/(x_j-L_j)
//   s.t. sum_j p_ij/(U_j-x_j) + q_ij/(x_j-L_j) <= b_i,   alpha_j <= x_j <= beta_j
struct Subproblem {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> low, upp, alpha, beta;
  std::vector<double> p0, q0;
  std::vector<std::vector<double>> p, q;
  std::vector<double> b;

  // Minimizer of P/(U-x) + Q/(x-L) on [alpha, beta].
  double argmin(std::size_t j, double pj, double qj) const {
    const double sp = std::sqrt(pj);
    const double sq = std::sqrt(qj);
    const double x = (sp + sq > 0.0) ? (low[j] * sp + upp[j] * sq) / (sp + sq) : 0.5 * (alpha[j] + beta[j]);
    return std::clamp(x, alpha[j], beta[j]);
  }

  std::vector<double> primal(std::span<const double> lambda) const {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
      double pj = p0[j], qj = q0[j];
      for (std::size_t i = 0; i < m; ++i) {
        pj += lambda[i] * p[i][j];
        qj += lambda[i] * q[i][j];
      }
      x[j] = argmin(j, pj, qj);
    }
    return x;
  }

  double constraint(std::size_t i, std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[i][j] / (upp[j] - x[j]) + q[i][j] / (x[j] - low[j]);
    return s - b[i];
  }

  // Smallest value constraint i can take on the box, ignoring the others.
  double constraint_floor(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = argmin(j, p[i][j], q[i][j]);
      s += p[i][j] / (upp[j] - xj) + q[i][j] / (xj - low[j]);
    }
    return s - b[i];
  }
};

void check_finite(std::span<const double> v, const char* what) {
  for (double d : v) {
    if (!std::isfinite(d)) throw NumericalError(std::string("mma_update: non-finite ") + what);
  }
}

// Maximizes the concave dual along lambda_i with the other multipliers fixed.
// The dual derivative along lambda_i is the approximated constraint value,
// nonincreasing in lambda_i, so the maximizer is its root (or 0).
void solve_coordinate(const Subproblem& sp, std::vector<double>& lambda, std::size_t i, double tol) {
  auto residual_at = [&](double value) {
    lambda[i] = value;
    return sp.constraint(i, sp.primal(lambda));
  };
  if (residual_at(0.0) <= 0.0) return;
  double lo = 0.0;
  double hi = 1.0;
  while (residual_at(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e30) {
      std::ostringstream os;
      os << "mma_update: infeasible subproblem, constraint " << i << " cannot be satisfied";
      throw NumericalError(os.str());
    }
  }
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual_at(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Keep the feasible end of the bracket.
  lambda[i] = hi;
}

}  // namespace

void MmaBounds::validate(std::size_t n) const {
  if (lower.size() != n || upper.size() != n || move_limit.size() != n) {
    throw std::invalid_argument("mma bounds: length mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(lower[j] < upper[j])) throw std::invalid_argument("mma bounds: lower must be < upper");
    if (!(move_limit[j] >= 0.0)) throw std::invalid_argument("mma bounds: move limit must be >= 0");
  }
}

MmaStep mma_update(std::span<const double> x, double f, std::span<const double> df,
                   std::span<const double> g, const ConstraintJacobian& dg,
                   const MmaBounds& bounds, const MmaState& state, const MmaSettings& settings) {
  const std::size_t n = x.size();
  const std::size_t m = g.size();
  if (n == 0) throw std::invalid_argument("mma_update: no variables");
  if (df.size() != n) throw std::invalid_argument("mma_update: objective gradient length mismatch");
  if (dg.size() != m) throw std::invalid_argument("mma_update: constraint Jacobian row count mismatch");
  for (const auto& row : dg) {
    if (row.size() != n) throw std::invalid_argument("mma_update: constraint Jacobian column count mismatch");
  }
  bounds.validate(n);
  if (!std::isfinite(f)) throw NumericalError("mma_update: non-finite objective");
  check_finite(df, "objective gradient");
  check_finite(g, "constraint value");
  for (const auto& row : dg) check_finite(row, "constraint gradient");

  const bool have_history = state.iteration >= 2 && state.x_prev.size() == n && state.x_prev2.size() == n &&
                            state.lower_asymptotes.size() == n && state.upper_asymptotes.size() == n;

  // Normalize to [0, 1].
  std::vector<double> range(n), xn(n), move(n);
  for (std::size_t j = 0; j < n; ++j) {
    range[j] = bounds.upper[j] - bounds.lower[j];
    xn[j] = std::clamp((x[j] - bounds.lower[j]) / range[j], 0.0, 1.0);
    move[j] = bounds.move_limit[j] / range[j];
  }

  Subproblem sp;
  sp.n = n;
  sp.m = m;
  sp.low.resize(n);
  sp.upp.resize(n);
  sp.alpha.resize(n);
  sp.beta.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    if (!have_history) {
      sp.low[j] = xn[j] - settings.initial_span;
      sp.upp[j] = xn[j] + settings.initial_span;
    } else {
      const double trend = (xn[j] - state.x_prev[j]) * (state.x_prev[j] - state.x_prev2[j]);
      const double gamma = trend > 0.0 ? settings.expand : (trend < 0.0 ? settings.shrink : 1.0);
      sp.low[j] = xn[j] - gamma * (state.x_prev[j] - state.lower_asymptotes[j]);
      sp.upp[j] = xn[j] + gamma * (state.upper_asymptotes[j] - state.x_prev[j]);
      sp.low[j] = std::clamp(sp.low[j], xn[j] - 10.0, xn[j] - 0.01);
      sp.upp[j] = std::clamp(sp.upp[j], xn[j] + 0.01, xn[j] + 10.0);
    }
    const double margin = settings.asymptote_margin;
    sp.alpha[j] = std::max({0.0, sp.low[j] + margin * (xn[j] - sp.low[j]), xn[j] - move[j]});
    sp.beta[j] = std::min({1.0, sp.upp[j] - margin * (sp.upp[j] - xn[j]), xn[j] + move[j]});
    sp.beta[j] = std::max(sp.beta[j], sp.alpha[j]);
  }

  auto approx_terms = [&](double grad, std::size_t j, double& pj, double& qj) {
    const double du = sp.upp[j] - xn[j];
    const double dl = xn[j] - sp.low[j];
    const double pos = std::max(grad, 0.0);
    const double neg = std::max(-grad, 0.0);
    pj = du * du * (1.001 * pos + 0.001 * neg + settings.raa0);
    qj = dl * dl * (0.001 * pos + 1.001 * neg + settings.raa0);
  };

  sp.p0.resize(n);
  sp.q0.resize(n);
  for (std::size_t j = 0; j < n; ++j) approx_terms(df[j] * range[j], j, sp.p0[j], sp.q0[j]);

  sp.p.assign(m, std::vector<double>(n));
  sp.q.assign(m, std::vector<double>(n));
  sp.b.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double at_x = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      approx_terms(dg[i][j] * range[j], j, sp.p[i][j], sp.q[i][j]);
      at_x += sp.p[i][j] / (sp.upp[j] - xn[j]) + sp.q[i][j] / (xn[j] - sp.low[j]);
    }
    sp.b[i] = at_x - g[i];
  }

  // Feasibility screen: each approximated constraint alone must be attainable.
  std::size_t worst = 0;
  double worst_value = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double floor_value = sp.constraint_floor(i);
    if (floor_value > worst_value) {
      worst_value = floor_value;
      worst = i;
    }
  }
  if (m > 0 && worst_value > 0.0) {
    std::ostringstream os;
    os << "mma_update: infeasible subproblem, constraint " << worst
       << " stays above zero by " << worst_value << " within the move limits";
    throw NumericalError(os.str());
  }

  // Dual ascent. For a single constraint one coordinate solve is exact.
  std::vector<double> lambda(m, 0.0);
  if (m == 1) {
    solve_coordinate(sp, lambda, 0, settings.dual_tolerance);
  } else if (m > 1) {
    for (int sweep = 0; sweep < 500; ++sweep) {
      const std::vector<double> before = lambda;
      for (std::size_t i = 0; i < m; ++i) solve_coordinate(sp, lambda, i, settings.dual_tolerance);
      double change = 0.0;
      for (std::size_t i = 0; i < m; ++i) change = std::max(change, std::abs(lambda[i] - before[i]));
      if (change <= settings.dual_tolerance * 10.0) break;
    }
  }
  const std::vector<double> xnew_n = sp.primal(lambda);

  MmaStep step;
  step.multipliers = lambda;
  step.approx_constraints.resize(m);
  for (std::size_t i = 0; i < m; ++i) step.approx_constraints[i] = sp.constraint(i, xnew_n);

  step.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = std::max(bounds.lower[j], x[j] - bounds.move_limit[j]);
    const double hi = std::min(bounds.upper[j], x[j] + bounds.move_limit[j]);
    const double candidate = bounds.lower[j] + xnew_n[j] * range[j];
    step.x[j] = std::clamp(candidate, std::min(lo, hi), std::max(lo, hi));
  }

  step.state.lower_asymptotes = sp.low;
  step.state.upper_asymptotes = sp.upp;
  step.state.x_prev2 = state.x_prev.size() == n ? state.x_prev : xn;
  step.state.x_prev = xn;
  step.state.iteration = state.iteration + 1;
  return step;
}

}  // namespace mmc
