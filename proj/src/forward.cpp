// Copyright (c) gncg contributors
#include "gncg/forward.hpp"

#include <cmath>
#include <limits>

#include "gncg/kkt_loss.hpp"

namespace gncg {

namespace {

struct KktResiduals {
  double raw = 0.0;     // infinity norm over all first-order error terms
  double scaled = 0.0;  // the same terms, each divided by its natural scale
};

/// Stationarity, complementarity products and constraint violations at
/// (x, lambda, nu). The scaled variant divides the stationarity terms by
/// 1 + max |summand| and each complementarity product by 1 + |lambda_q|, so
/// the tolerance stays meaningful when signals push F and the multipliers to
/// 1e5 scale where float64 cannot deliver small absolute products.
KktResiduals kkt_residuals(const ParametricGame& game, const Signal& u,
                           const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& lambda, const Eigen::VectorXd& nu) {
  const ConstraintEval ce = game.constraint_eval(x, u);
  const Eigen::VectorXd f = game.pseudo_gradient(x, u, theta);
  const Eigen::VectorXd hl = ce.grad_h * lambda;
  const Eigen::VectorXd gn = ce.grad_g * nu;
  const Eigen::VectorXd stat = f + hl + gn;

  auto inf_norm = [](const Eigen::VectorXd& v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  };
  const double stat_scale = 1.0 + std::max({inf_norm(f), inf_norm(hl), inf_norm(gn)});
  const double x_scale = 1.0 + inf_norm(x);

  KktResiduals r;
  r.raw = inf_norm(stat);
  r.scaled = r.raw / stat_scale;
  for (Eigen::Index q = 0; q < ce.h.size(); ++q) {
    const double compl_q = std::abs(lambda[q] * ce.h[q]);
    const double viol_q = std::max(ce.h[q], 0.0);
    r.raw = std::max({r.raw, compl_q, viol_q});
    r.scaled = std::max({r.scaled, compl_q / (1.0 + std::abs(lambda[q])), viol_q / x_scale});
  }
  for (Eigen::Index j = 0; j < ce.g.size(); ++j) {
    const double gj = std::abs(ce.g[j]);
    r.raw = std::max(r.raw, gj);
    r.scaled = std::max(r.scaled, gj / x_scale);
  }
  return r;
}

}  // namespace

EquilibriumResult solve_ve(const ParametricGame& game, const Signal& u,
                           const Eigen::VectorXd& theta, const VeSolveOptions& opts) {
  game.check_theta(theta);
  game.check_signal(u);
  if (!game.project_feasible) {
    throw std::invalid_argument(game.name + ": no feasible-set projection registered");
  }

  const int n = game.strategy_dim();
  // Seed-fixed start: the origin projected into X(u) defines the canonical
  // output when the equilibrium is not unique.
  Eigen::VectorXd x = game.project_feasible(Eigen::VectorXd::Zero(n), u);
  if (!x.allFinite()) {
    throw SolveError(game.name + ": feasible-set projection returned non-finite point",
                     std::numeric_limits<double>::infinity());
  }

  double tau = opts.initial_step;
  const double tau_floor = opts.initial_step * 1e-15;

  for (long iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd f = game.pseudo_gradient(x, u, theta);
    const Eigen::VectorXd step = x - game.project_feasible(x - tau * f, u);
    const double step_norm = step.cwiseAbs().maxCoeff();
    // Projected-gradient magnitude, compared against a tolerance tied to the
    // iterate scale.
    const double pg_tol = opts.tol * 1e-2 * (1.0 + x.cwiseAbs().maxCoeff());
    if (step_norm / tau <= pg_tol) break;

    const Eigen::VectorXd x_next = x - step;
    const Eigen::VectorXd f_next = game.pseudo_gradient(x_next, u, theta);
    const double next_norm =
        (x_next - game.project_feasible(x_next - tau * f_next, u)).cwiseAbs().maxCoeff();
    if (next_norm >= step_norm) {
      // No contraction at this step size; halve and retry from x.
      tau *= 0.5;
      if (tau < tau_floor) break;  // at the numerical floor, let the gate decide
      continue;
    }
    x = x_next;
  }

  // Multipliers from the loss inner solve at the converged point: at an exact
  // equilibrium the stationarity system is consistent and the nonnegative
  // least squares recovers the KKT pair.
  const KktData kkt = assemble_kkt(game, x, u);
  auto [lambda, nu] = inner_dual_solve(kkt, theta);

  EquilibriumResult out;
  out.x = std::move(x);
  out.lambda = std::move(lambda);
  out.nu = std::move(nu);

  const KktResiduals res = kkt_residuals(game, u, theta, out.x, out.lambda, out.nu);
  out.kkt_residual = res.raw;
  if (res.scaled > opts.tol) {
    throw SolveError(game.name + ": equilibrium solve stalled, scaled residual " +
                         std::to_string(res.scaled),
                     res.scaled);
  }
  return out;
}

EquilibriumResult cournot_closed_form(const Signal& u, const Eigen::VectorXd& theta) {
  if (u.size() != 3) throw std::invalid_argument("cournot: signal must be (a, b, q)");
  const double a = u[0], b = u[1], q = u[2];
  if (b == 0.0) throw std::invalid_argument("cournot: degenerate price slope b = 0");
  if (b > 0.0) throw std::invalid_argument("cournot: price slope must be negative");
  const int n = static_cast<int>(theta.size());
  if (n < 1) throw std::invalid_argument("cournot: empty parameter vector");

  EquilibriumResult out;
  out.nu = Eigen::VectorXd(0);

  // Unconstrained first-order solution: total output from the summed
  // stationarity conditions, then per-company outputs.
  const double total_unconstrained = (theta.sum() - n * a) / ((n + 1) * b);
  if (total_unconstrained >= q) {
    out.x = (theta.array() - a) / b - total_unconstrained;
    out.lambda = Eigen::VectorXd::Zero(1);
  } else {
    // Demand floor binds: shared multiplier from summing the stationarity
    // conditions over companies at sum(x) = q.
    const double lambda = (theta.sum() - n * a - (n + 1) * b * q) / n;
    out.x = (theta.array() - a - b * q - lambda) / b;
    out.lambda = Eigen::VectorXd::Constant(1, lambda);
  }

  const double h = q - out.x.sum();
  const Eigen::VectorXd stat =
      theta.array() - a - b * out.x.sum() - b * out.x.array() - out.lambda[0];
  out.kkt_residual = std::max({stat.cwiseAbs().maxCoeff(),
                               std::abs(out.lambda[0] * h), std::max(h, 0.0)});
  return out;
}

Observation observe(const EquilibriumResult& eq, const Signal& u, int round, Rng& rng,
                    double noise_scale) {
  Observation obs;
  obs.round = round;
  obs.u = u;
  obs.y = eq.x + noise_scale * rng.normal_vector(eq.x.size());
  return obs;
}

}  // namespace gncg
