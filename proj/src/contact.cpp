#include "vibeam/contact.hpp"

#include <cmath>
#include <limits>

namespace vibeam {

std::vector<int> active_set(const Vec& g_current, const Vec& g0, int dims) {
  if (dims < 1) throw ValidationError("gap dimension must be at least 1");
  int n_pairs = static_cast<int>(g_current.size()) / dims;
  if (g0.size() != n_pairs) throw ValidationError("clearance vector length mismatch");
  std::vector<int> active;
  for (int p = 0; p < n_pairs; ++p)
    if (g_current[p * dims] + g0[p] <= 0.0) active.push_back(p);
  return active;
}

Vec project_admissible(const Vec& lambda_pair, double mu) {
  Vec out = lambda_pair;
  double ln = std::max(0.0, out[0]);
  out[0] = ln;
  if (out.size() > 1) {
    double lt = out.tail(out.size() - 1).norm();
    double radius = mu * ln;
    if (lt > radius) {
      double scale = lt > 0.0 ? radius / lt : 0.0;
      out.tail(out.size() - 1) *= scale;
    }
  }
  return out;
}

InclusionProblem assemble_delassus(const ReducedModel& rom, double dt, const Vec& g_prev,
                                   const Vec& eta_now, const ContactConfig& config,
                                   const Mat* G_full_in) {
  if (dt <= 0.0) throw ValidationError("time step must be positive");
  const int n_g = rom.n_g();
  const int dims = rom.dims_per_pair;
  if (g_prev.size() != n_g) throw ValidationError("gap vector length mismatch");
  if (config.g0.size() != rom.n_pairs) throw ValidationError("clearance vector length mismatch");

  Mat G_full_local;
  const Mat* G_full = G_full_in;
  if (!G_full) {
    Eigen::LLT<Mat> llt(dt * rom.K_gg);
    if (llt.info() != Eigen::Success) throw NumericalError("boundary stiffness not SPD");
    G_full_local = llt.solve(Mat::Identity(n_g, n_g));
    G_full = &G_full_local;
  }

  Vec coupling = rom.K_ge * eta_now;
  Vec g_trial = -dt * (*G_full * coupling);  // boundary equilibrium at lambda = 0

  InclusionProblem prob;
  prob.dims = dims;
  prob.n_pairs = rom.n_pairs;
  prob.active = active_set(g_trial, config.g0, dims);
  prob.c = -g_prev / dt - *G_full * coupling;

  const int m = static_cast<int>(prob.active.size()) * dims;
  prob.active_comp.reserve(m);
  for (int p : prob.active)
    for (int d = 0; d < dims; ++d) prob.active_comp.push_back(p * dims + d);
  prob.G.resize(m, m);
  prob.G_cols.resize(n_g, m);
  prob.shift = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    prob.G_cols.col(i) = G_full->col(prob.active_comp[i]);
    for (int j = 0; j < m; ++j) prob.G(i, j) = (*G_full)(prob.active_comp[i], prob.active_comp[j]);
  }
  for (std::size_t a = 0; a < prob.active.size(); ++a) {
    int p = prob.active[a];
    prob.shift[a * dims] = (g_prev[p * dims] + config.g0[p]) / dt;
  }
  return prob;
}

ContactSolution solve_inclusion(const InclusionProblem& prob, const Vec& lambda_init,
                                const ContactConfig& config, SolveDiagnostics* diag) {
  const int n_g = static_cast<int>(prob.c.size());
  const int dims = prob.dims;
  const int m = static_cast<int>(prob.active_comp.size());

  SolveDiagnostics local;
  SolveDiagnostics& d = diag ? *diag : local;
  d = SolveDiagnostics{};
  d.relaxation_used = config.relaxation;

  ContactSolution sol;
  sol.lambda = Vec::Zero(n_g);
  if (m == 0) {
    sol.gamma = prob.c;
    return sol;
  }

  Vec c_act(m);
  for (int i = 0; i < m; ++i) c_act[i] = prob.c[prob.active_comp[i]];

  Vec lam = Vec::Zero(m);
  if (lambda_init.size() == n_g)
    for (int i = 0; i < m; ++i) lam[i] = lambda_init[prob.active_comp[i]];
  for (int p = 0; p < m / dims; ++p)
    lam.segment(p * dims, dims) = project_admissible(lam.segment(p * dims, dims), config.mu);
  d.converged = false;

  const int n_active_pairs = m / dims;
  double rho = config.relaxation;
  auto scaling = [&](double rho_now) {
    Vec r(m);
    for (int p = 0; p < n_active_pairs; ++p) {
      double dmax = 0.0;
      for (int i = 0; i < dims; ++i) dmax = std::max(dmax, prob.G(p * dims + i, p * dims + i));
      for (int i = 0; i < dims; ++i) r[p * dims + i] = rho_now / dmax;
    }
    return r;
  };
  Vec r = scaling(rho);

  double prev_res = std::numeric_limits<double>::infinity();
  int grow_count = 0;
  const double rho_floor = config.relaxation / 1024.0;

  for (int it = 1; it <= config.max_iter; ++it) {
    Vec arg = lam - r.cwiseProduct(prob.G * lam + c_act + prob.shift);
    Vec lam_next(m);
    double res = 0.0;
    for (int p = 0; p < n_active_pairs; ++p) {
      Vec proj = project_admissible(arg.segment(p * dims, dims), config.mu);
      lam_next.segment(p * dims, dims) = proj;
      double change = (proj - lam.segment(p * dims, dims)).norm() /
                      (1.0 + lam.segment(p * dims, dims).norm());
      res = std::max(res, change);
    }
    lam = lam_next;
    d.iterations = it;
    d.residual = res;
    if (config.trace_residuals) d.residual_history.push_back(res);
    if (res < config.tol_rel) {
      d.converged = true;
      for (int i = 0; i < m; ++i) sol.lambda[prob.active_comp[i]] = lam[i];
      sol.gamma = prob.G_cols * lam + prob.c;
      return sol;
    }
    // divergence guard for strongly coupled pairs
    if (res > prev_res) {
      if (++grow_count >= 3 && rho > rho_floor) {
        rho *= 0.5;
        r = scaling(rho);
        d.relaxation_used = rho;
        grow_count = 0;
      }
    } else {
      grow_count = 0;
    }
    prev_res = res;
  }

  d.converged = false;
  for (int i = 0; i < m; ++i) sol.lambda[prob.active_comp[i]] = lam[i];
  sol.gamma = prob.G_cols * lam + prob.c;
  return sol;
}

ContactSolution solve_static_contact(const ReducedModel& rom, const ContactConfig& config,
                                     SolveDiagnostics* diag) {
  const int n_g = rom.n_g();
  const int dims = rom.dims_per_pair;
  if (config.g0.size() != rom.n_pairs) throw ValidationError("clearance vector length mismatch");

  Eigen::LLT<Mat> llt(rom.K_gg);
  if (llt.info() != Eigen::Success) throw NumericalError("boundary stiffness not SPD");
  Mat flex = llt.solve(Mat::Identity(n_g, n_g));

  // same fixed point with "rate" read as the static gap itself
  InclusionProblem prob;
  prob.dims = dims;
  prob.n_pairs = rom.n_pairs;
  prob.c = Vec::Zero(n_g);
  for (int p = 0; p < rom.n_pairs; ++p)
    if (config.g0[p] <= 0.0) prob.active.push_back(p);
  const int m = static_cast<int>(prob.active.size()) * dims;
  prob.active_comp.reserve(m);
  for (int p : prob.active)
    for (int d = 0; d < dims; ++d) prob.active_comp.push_back(p * dims + d);
  prob.G.resize(m, m);
  prob.G_cols.resize(n_g, m);
  prob.shift = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    prob.G_cols.col(i) = flex.col(prob.active_comp[i]);
    for (int j = 0; j < m; ++j) prob.G(i, j) = flex(prob.active_comp[i], prob.active_comp[j]);
  }
  for (std::size_t a = 0; a < prob.active.size(); ++a)
    prob.shift[a * dims] = config.g0[prob.active[a]];

  ContactSolution sol = solve_inclusion(prob, Vec::Zero(n_g), config, diag);
  if (diag && !diag->converged) throw NumericalError("static contact equilibrium did not converge");
  // gamma from solve_inclusion is the static gap here
  return sol;
}

}  // namespace vibeam
