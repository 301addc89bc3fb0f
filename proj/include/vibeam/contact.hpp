#pragma once

#include "vibeam/rom.hpp"

namespace vibeam {

struct ContactConfig {
  double mu = 0.4;
  Vec g0;                  // physical clearance per pair (m)
  double tol_rel = 1e-8;
  int max_iter = 500;
  double relaxation = 0.8; // Jacobi under-relaxation factor
  bool trace_residuals = false;
};

/// The one-step boundary problem gamma = G*lambda + c on the active pairs.
/// `shift` moves the normal complementarity from the gap rate to the
/// end-of-step physical gap, so closed contacts settle at zero penetration
/// instead of freezing whatever overlap the activation step produced.
struct InclusionProblem {
  Mat G;                       // active block, m x m
  Mat G_cols;                  // full rows x active columns, for gamma recovery
  Vec c;                       // full offset, one entry per gap component
  Vec shift;                   // active size; normal entries (gap_prev + g0)/dt
  std::vector<int> active;     // active pair indices
  std::vector<int> active_comp;// active component indices into the gap vector
  int dims = 0;                // components per pair
  int n_pairs = 0;
};

struct SolveDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
  double relaxation_used = 0.0;
  std::vector<double> residual_history;  // filled when config.trace_residuals
};

struct ContactSolution {
  Vec lambda;  // full size, zero on inactive pairs
  Vec gamma;   // full size
};

/// Pairs whose physical normal gap g_n + g0 is non-positive (closed set
/// convention: touching counts as active).
std::vector<int> active_set(const Vec& g_current, const Vec& g0, int dims);

/// Projection onto R0+ x disk(mu * lambda_n) for one pair block.
Vec project_admissible(const Vec& lambda_pair, double mu);

/// Builds the inclusion problem from the reduced blocks. The active set is
/// taken from the trial gap (the boundary equilibrium with zero contact
/// force), so pairs that would penetrate this step are caught before they do.
/// Pass `G_full` = (dt*K_gg)^-1 to reuse a cached inverse.
InclusionProblem assemble_delassus(const ReducedModel& rom, double dt, const Vec& g_prev,
                                   const Vec& eta_now, const ContactConfig& config,
                                   const Mat* G_full = nullptr);

/// Projected Jacobi iteration with per-pair diagonal scaling. Non-convergence
/// is flagged in the diagnostics, not thrown.
ContactSolution solve_inclusion(const InclusionProblem& problem, const Vec& lambda_init,
                                const ContactConfig& config, SolveDiagnostics* diag = nullptr);

/// Static contact equilibrium at eta = 0: K_gg g = lambda with the contact
/// laws on the physical gap. Used for fresh-run initial conditions.
ContactSolution solve_static_contact(const ReducedModel& rom, const ContactConfig& config,
                                     SolveDiagnostics* diag = nullptr);

}  // namespace vibeam
