#include "vibeam/updating.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace vibeam {

namespace {

void check_problem(const UpdateProblem& p) {
  const auto n = p.params0.size();
  if (p.lower.size() != n || p.upper.size() != n)
    throw ValidationError("parameter bounds must match params0 length");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.lower[i] > p.upper[i]) throw ValidationError("lower bound exceeds upper bound");
    if (p.params0[i] < p.lower[i] || p.params0[i] > p.upper[i])
      throw ValidationError("params0 outside bounds");
  }
  if (p.targets_hz.size() == 0) throw ValidationError("no target frequencies given");
  if (p.weights.size() != 0 && p.weights.size() != p.targets_hz.size())
    throw ValidationError("weights must match targets length");
}

Vec mode_residuals(const UpdateProblem& p, const Vec& params) {
  FEModel model = p.factory(params);
  int n_targets = static_cast<int>(p.targets_hz.size());
  ModalData modal = solve_modes(model, n_targets);
  Vec res(n_targets);
  for (int i = 0; i < n_targets; ++i)
    res[i] = (modal.frequencies_hz[i] - p.targets_hz[i]) / p.targets_hz[i];
  return res;
}

}  // namespace

double frequency_objective(const UpdateProblem& p, const Vec& params) {
  Vec res = mode_residuals(p, params);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < res.size(); ++i) {
    double w = p.weights.size() ? p.weights[i] : 1.0;
    obj += w * res[i] * res[i];
  }
  if (!std::isfinite(obj)) throw NumericalError("non-finite updating objective");
  return obj;
}

UpdateResult update_parameters(const UpdateProblem& p, const UpdateOptions& opts) {
  check_problem(p);
  const int dim = static_cast<int>(p.params0.size());
  const int np = std::max(opts.population, 4);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto clip = [&](Vec v) {
    for (int i = 0; i < dim; ++i) v[i] = std::clamp(v[i], p.lower[i], p.upper[i]);
    return v;
  };

  int evals = 0;
  auto evaluate = [&](const Vec& params) {
    ++evals;
    return frequency_objective(p, params);
  };

  std::vector<Vec> pop(np);
  std::vector<double> cost(np);
  pop[0] = p.params0;
  for (int i = 1; i < np; ++i) {
    Vec v(dim);
    for (int d = 0; d < dim; ++d) v[d] = p.lower[d] + unit(rng) * (p.upper[d] - p.lower[d]);
    pop[i] = v;
  }
  cost[0] = evaluate(pop[0]);  // params0 must be feasible
  for (int i = 1; i < np; ++i) {
    try {
      cost[i] = evaluate(pop[i]);
    } catch (const std::runtime_error&) {
      cost[i] = std::numeric_limits<double>::infinity();
    }
  }

  std::uniform_int_distribution<int> pick(0, np - 1);
  std::uniform_int_distribution<int> pick_dim(0, dim - 1);
  for (int gen = 0; gen < opts.generations; ++gen) {
    for (int i = 0; i < np; ++i) {
      int a, b, c;
      do a = pick(rng); while (a == i);
      do b = pick(rng); while (b == i || b == a);
      do c = pick(rng); while (c == i || c == a || c == b);
      Vec trial = pop[i];
      int forced = pick_dim(rng);
      for (int d = 0; d < dim; ++d)
        if (d == forced || unit(rng) < opts.crossover)
          trial[d] = pop[a][d] + opts.diff_weight * (pop[b][d] - pop[c][d]);
      trial = clip(trial);
      double trial_cost;
      try {
        trial_cost = evaluate(trial);
      } catch (const std::runtime_error&) {
        continue;  // infeasible candidate, keep the incumbent
      }
      if (trial_cost <= cost[i]) {
        pop[i] = trial;
        cost[i] = trial_cost;
      }
    }
  }

  int best = 0;
  for (int i = 1; i < np; ++i)
    if (cost[i] < cost[best]) best = i;

  UpdateResult out;
  out.params = pop[best];
  out.objective = cost[best];
  out.residuals = mode_residuals(p, pop[best]);
  out.evaluations = evals;
  out.seed = opts.seed;
  return out;
}

}  // namespace vibeam
