#pragma once

#include <cstdint>
#include <functional>

#include "vibeam/modal.hpp"

namespace vibeam {

/// Frequency-matching parameter identification: minimize the weighted sum of
/// squared relative deviations between model and target natural frequencies.
struct UpdateProblem {
  std::function<FEModel(const Vec&)> factory;
  Vec params0;
  Vec lower;
  Vec upper;
  Vec targets_hz;     // lowest modes, ascending
  Vec weights;        // same length as targets_hz (empty = uniform)
};

struct UpdateOptions {
  int population = 32;
  int generations = 200;
  double diff_weight = 0.7;
  double crossover = 0.9;
  std::uint64_t seed = 42;
};

struct UpdateResult {
  Vec params;
  double objective = 0.0;
  Vec residuals;      // per-mode relative frequency deviation at the optimum
  int evaluations = 0;
  std::uint64_t seed = 0;
};

double frequency_objective(const UpdateProblem& problem, const Vec& params);

/// Seeded differential evolution (rand/1/bin) with bound clipping; params0 is
/// injected into the initial population so the result never regresses.
UpdateResult update_parameters(const UpdateProblem& problem, const UpdateOptions& opts = {});

}  // namespace vibeam
