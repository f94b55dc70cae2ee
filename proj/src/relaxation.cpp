#include "relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lqdeceive::detail {

namespace {

DeceptionIterate make_iterate(const RelaxationPoint& p, int index,
                              double step_norm, double omega, bool snapshot) {
  DeceptionIterate it;
  it.index = index;
  it.gain = p.gain;
  it.cost = p.cost;
  it.grad_norm = p.grad_norm;
  it.step_norm = step_norm;
  it.omega = omega;
  it.closed_loop_abscissa = p.closed_loop_abscissa;
  it.value_residual = p.value_residual;
  it.adjoint_residual = p.adjoint_residual;
  it.lyapunov_bound_ok = p.lyapunov_bound_ok;
  if (snapshot) {
    it.value = p.value;
    it.adjoint = p.adjoint;
  }
  return it;
}

void finish(DeceptionResult& result, const RelaxationPoint& p) {
  result.gain_hat = p.gain;
  result.value_hat = p.value;
  result.adjoint_hat = p.adjoint;
  result.stationarity.value_equation = p.value_residual;
  result.stationarity.adjoint_equation = p.adjoint_residual;
  result.stationarity.gain_equation = (p.gain - p.gs_gain).norm();
  if (!result.trace.empty()) {
    result.trace.back().value = p.value;
    result.trace.back().adjoint = p.adjoint;
  }
}

// Largest omega allowed by a known Lipschitz constant L of the gradient:
// (2 / L) lambda_min(Gamma^-1) / lambda_max(Gamma^-1)^2.
double lipschitz_omega_bound(const Matrix& Gamma, double L) {
  const double gmin = min_eigenvalue(Gamma);
  const double gmax = max_eigenvalue(Gamma);
  return (2.0 / L) * (1.0 / gmax) * gmin * gmin;
}

}  // namespace

DeceptionResult run_relaxation(const Evaluator& evaluate, const Matrix& start,
                               const Matrix& Gamma, const BsorConfig& config,
                               std::optional<double> cost_cap) {
  config.validate();
  DeceptionResult result;
  double omega = config.omega;
  if (config.lipschitz_hint) {
    result.omega_exceeds_lipschitz_bound =
        omega >= lipschitz_omega_bound(Gamma, *config.lipschitz_hint);
  }

  RelaxationPoint current;
  try {
    current = evaluate(start);
  } catch (const Error& e) {
    result.status = BsorStatus::kInfeasibleStart;
    result.gain_hat = start;
    result.offending_gain = start;
    result.final_omega = omega;
    result.message = std::string("initial gain outside the domain: ") + e.what();
    return result;
  }
  if (cost_cap && current.cost > *cost_cap + 1e-12 * std::max(1.0, *cost_cap)) {
    std::ostringstream os;
    os << "initial cost " << current.cost << " exceeds the zero-gain cost "
       << *cost_cap;
    result.status = BsorStatus::kInfeasibleStart;
    result.trace.push_back(make_iterate(current, 0, 0.0, omega, true));
    finish(result, current);
    result.final_omega = omega;
    result.message = os.str();
    return result;
  }

  const int every = std::max(1, config.snapshot_every);
  result.trace.push_back(make_iterate(current, 0, 0.0, omega, true));

  int i = 0;
  while (true) {
    if (current.grad_norm <= config.grad_floor) {
      result.status = BsorStatus::kConverged;
      break;
    }
    if (i >= config.max_iter) {
      result.status = BsorStatus::kMaxIterations;
      break;
    }

    // Relaxed update, rolled back with omega halved on a domain exit or a
    // cost increase.
    std::optional<RelaxationPoint> next;
    Matrix candidate;
    int halvings = 0;
    bool domain_exit = false;
    std::string last_error;
    while (!next) {
      candidate = current.gain + omega * (current.gs_gain - current.gain);
      try {
        RelaxationPoint trial = evaluate(candidate);
        const double slack = 1e-14 * std::max(1.0, std::abs(current.cost));
        if (trial.cost > current.cost + slack) {
          result.step_size_bound_exceeded = true;
        } else {
          next = std::move(trial);
          break;
        }
      } catch (const Error& e) {
        domain_exit = true;
        last_error = e.what();
      }
      if (++halvings > config.max_halvings) break;
      omega *= 0.5;
    }
    if (!next) {
      if (domain_exit) {
        result.status = BsorStatus::kDomainExit;
        result.offending_gain = candidate;
        result.message = last_error;
      } else {
        // Cost cannot be decreased along the relaxation direction at any
        // representable step; the current point is stationary to roundoff.
        result.status = BsorStatus::kConverged;
        result.message = "no descent step found after omega halvings";
      }
      break;
    }

    const double step_norm = (next->gain - current.gain).norm();
    ++i;
    current = std::move(*next);
    result.trace.push_back(
        make_iterate(current, i, step_norm, omega, i % every == 0));
    if (step_norm < config.tol * omega) {
      result.status = BsorStatus::kConverged;
      break;
    }
  }

  finish(result, current);
  result.final_omega = omega;
  return result;
}

}  // namespace lqdeceive::detail
