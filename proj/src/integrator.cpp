#include "vibeam/integrator.hpp"

#include <cmath>

#include "vibeam/util.hpp"

namespace vibeam {

double base_acceleration(const Excitation& exc, double t) {
  return -exc.omega * exc.omega * exc.amplitude * std::sin(exc.omega * t + exc.phase);
}

namespace {

Mat invert_spd(const Mat& A, const char* what) {
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " not SPD");
  return llt.solve(Mat::Identity(A.rows(), A.cols()));
}

}  // namespace

void InvariantStats::merge(const InvariantStats& other) {
  min_lambda_n = std::min(min_lambda_n, other.min_lambda_n);
  min_physical_gap = std::min(min_physical_gap, other.min_physical_gap);
  max_friction_excess = std::max(max_friction_excess, other.max_friction_excess);
  max_stick_slip = std::max(max_stick_slip, other.max_stick_slip);
  max_abs_gamma = std::max(max_abs_gamma, other.max_abs_gamma);
  steps += other.steps;
}

Integrator::Integrator(const ReducedModel& rom, const ContactConfig& config, double dt)
    : rom_(rom), config_(config), dt_(dt) {
  if (dt <= 0.0) throw ValidationError("time step must be positive");
  if (config.g0.size() != rom.n_pairs) throw ValidationError("clearance vector length mismatch");
  G_full_ = invert_spd(dt * rom.K_gg, "boundary stiffness");
  K_ge_t_ = rom.K_ge.transpose();
  coef_old_ = Vec::Constant(rom.n_modes(), 1.0 / dt) - 0.5 * rom.D_ee;
  coef_new_inv_ = (Vec::Constant(rom.n_modes(), 1.0 / dt) + 0.5 * rom.D_ee).cwiseInverse();
  last_gamma_ = Vec::Zero(rom.n_g());
}

void Integrator::substep(IntegratorState& state, const Excitation& exc, double dt,
                         const Mat& G_full, StepDiagnostics* diag) {
  // implicit boundary solve: forces and gap rates from the inclusion
  InclusionProblem prob = assemble_delassus(rom_, dt, state.g, state.eta, config_, &G_full);
  SolveDiagnostics sd;
  ContactSolution sol = solve_inclusion(prob, state.lambda, config_, &sd);
  if (diag) {
    diag->inclusion_iterations = std::max(diag->inclusion_iterations, sd.iterations);
    diag->inclusion_residual = sd.residual;
    diag->active_pairs = static_cast<int>(prob.active.size());
  }
  if (!sd.converged) throw NumericalError("contact inclusion did not converge");

  // boundary update, then the explicit modal half-kick pair
  state.g += sol.gamma * dt;
  last_gamma_ = sol.gamma;
  state.lambda = sol.lambda;

  const int dims = rom_.dims_per_pair;
  for (int p = 0; p < rom_.n_pairs; ++p) {
    double lam_n = state.lambda[p * dims];
    invariants_.min_lambda_n = std::min(invariants_.min_lambda_n, lam_n);
    invariants_.min_physical_gap =
        std::min(invariants_.min_physical_gap, state.g[p * dims] + config_.g0[p]);
    if (dims > 1) {
      double lam_t = state.lambda.segment(p * dims + 1, dims - 1).norm();
      double gam_t = sol.gamma.segment(p * dims + 1, dims - 1).norm();
      double bound = config_.mu * lam_n;
      invariants_.max_friction_excess =
          std::max(invariants_.max_friction_excess, (lam_t - bound) / std::max(bound, 1e-300));
      if (lam_n > 0.0 && lam_t < bound * (1.0 - 1e-6))
        invariants_.max_stick_slip = std::max(invariants_.max_stick_slip, gam_t);
    }
  }
  invariants_.max_abs_gamma =
      std::max(invariants_.max_abs_gamma, sol.gamma.cwiseAbs().maxCoeff());
  invariants_.steps += 1;

  Vec rhs_static = K_ge_t_ * state.g + rom_.K_ee * state.eta +
                   rom_.beta * base_acceleration(exc, state.t);
  Vec coef_old = dt == dt_ ? coef_old_ : Vec(Vec::Constant(rom_.n_modes(), 1.0 / dt) - 0.5 * rom_.D_ee);
  Vec coef_new_inv = dt == dt_ ? coef_new_inv_
                               : Vec((Vec::Constant(rom_.n_modes(), 1.0 / dt) + 0.5 * rom_.D_ee).cwiseInverse());
  state.eta_dot_half =
      (coef_old.cwiseProduct(state.eta_dot_half) - rhs_static).cwiseProduct(coef_new_inv);
  state.eta += state.eta_dot_half * dt;
  state.t += dt;
}

void Integrator::step(IntegratorState& state, const Excitation& exc, StepDiagnostics* diag) {
  IntegratorState saved = state;
  try {
    substep(state, exc, dt_, G_full_, diag);
  } catch (const NumericalError&) {
    // single bounded retry: two half steps on the same outer grid
    state = saved;
    if (!have_half_) {
      G_full_half_ = invert_spd(0.5 * dt_ * rom_.K_gg, "boundary stiffness");
      have_half_ = true;
    }
    if (diag) diag->retried = true;
    substep(state, exc, 0.5 * dt_, G_full_half_, diag);
    substep(state, exc, 0.5 * dt_, G_full_half_, diag);
  }
  state.j += 1;
  if (!state.eta.allFinite() || !state.g.allFinite() || !state.eta_dot_half.allFinite())
    throw NumericalError("non-finite integrator state");
}

IntegratorState make_initial_state(const ReducedModel& rom, const ContactConfig& config,
                                   const Excitation& exc, double dt) {
  IntegratorState s;
  ContactSolution eq = solve_static_contact(rom, config);
  s.g = eq.gamma;  // static gap
  s.lambda = eq.lambda;
  s.eta = Vec::Zero(rom.n_modes());
  // backward half kick for a second-order consistent velocity grid
  Vec accel0 = -(rom.K_ge.transpose() * s.g + rom.K_ee * s.eta +
                 rom.beta * base_acceleration(exc, 0.0));
  s.eta_dot_half = -0.5 * dt * accel0;
  s.j = 0;
  s.t = 0.0;
  return s;
}

IntegratorState step(const IntegratorState& state, const ReducedModel& rom,
                     const ContactConfig& config, const Excitation& exc, double dt) {
  Integrator integ(rom, config, dt);
  IntegratorState out = state;
  integ.step(out, exc);
  return out;
}

namespace {

Vec modal_acceleration(const ReducedModel& rom, const IntegratorState& state,
                       const Excitation& exc, const Vec& eta_dot) {
  return -(rom.D_ee.cwiseProduct(eta_dot) + rom.K_ge.transpose() * state.g +
           rom.K_ee * state.eta + rom.beta * base_acceleration(exc, state.t));
}

}  // namespace

Vec synchronized_velocity(const ReducedModel& rom, const IntegratorState& state,
                          const Excitation& exc, double dt_old) {
  Vec accel = modal_acceleration(rom, state, exc, state.eta_dot_half);
  return state.eta_dot_half + 0.5 * dt_old * accel;
}

void restagger_velocity(IntegratorState& state, const ReducedModel& rom, const Excitation& exc,
                        double dt_new, const Vec& eta_dot_sync) {
  Vec accel = modal_acceleration(rom, state, exc, eta_dot_sync);
  state.eta_dot_half = eta_dot_sync - 0.5 * dt_new * accel;
}

std::string state_hash(const IntegratorState& state) {
  Hasher h;
  h.update(state.g);
  h.update(state.eta);
  h.update(state.eta_dot_half);
  h.update(state.lambda);
  h.update(&state.j, sizeof(state.j));
  h.update(state.t);
  return h.hex();
}

SimResult simulate(const ReducedModel& rom, const ContactConfig& config, const Excitation& exc,
                   double t_end, double dt, const IntegratorState& state0,
                   const SimOptions& options) {
  if (t_end <= 0.0) throw ValidationError("simulation horizon must be positive");
  if (options.decimate < 1) throw ValidationError("decimation factor must be at least 1");
  const long n_steps = std::lround(t_end / dt);
  const int dims = rom.dims_per_pair;
  const int n_obs = static_cast<int>(rom.observer_names.size());

  std::vector<std::string> names;
  for (const auto& name : rom.observer_names) names.push_back(name);
  for (const auto& name : rom.observer_names) names.push_back(name + "_vel");
  for (int p = 0; p < rom.n_pairs; ++p) {
    names.push_back("gap_n_" + std::to_string(p));
    for (int d = 1; d < dims; ++d)
      names.push_back("gap_t" + std::to_string(d) + "_" + std::to_string(p));
    names.push_back("lam_n_" + std::to_string(p));
    for (int d = 1; d < dims; ++d)
      names.push_back("lam_t" + std::to_string(d) + "_" + std::to_string(p));
  }
  names.push_back("active");
  int energy_base = static_cast<int>(names.size());
  if (options.record_energy)
    for (const char* n : {"E_kin", "E_pot", "W_ext", "W_damp", "W_contact"})
      names.push_back(n);

  const long n_rows = (n_steps + options.decimate - 1) / options.decimate;
  TimeSeries ts;
  ts.names = names;
  ts.t.resize(n_rows);
  ts.data.resize(n_rows, static_cast<int>(names.size()));

  Integrator integ(rom, config, dt);
  IntegratorState state = state0;
  SimDiagnostics diag;

  Mat K_full;
  if (options.record_energy) {
    K_full.resize(rom.n_g() + rom.n_modes(), rom.n_g() + rom.n_modes());
    K_full << rom.K_gg, rom.K_ge, rom.K_ge.transpose(), rom.K_ee;
  }
  Vec z(rom.n_g() + rom.n_modes());

  double w_ext = 0.0, w_damp = 0.0, w_contact = 0.0;
  long row = 0;
  for (long jstep = 0; jstep < n_steps; ++jstep) {
    // the synchronized sample (g^j, eta^j) is formed inside the step: eta is
    // taken at entry, g right after its advance
    Vec eta_j = state.eta;
    Vec v_old = state.eta_dot_half;
    double t_j = state.t;
    double qdd = base_acceleration(exc, t_j);

    StepDiagnostics sdiag;
    integ.step(state, exc, &sdiag);
    diag.steps += 1;
    if (sdiag.retried) diag.retries += 1;
    diag.max_inclusion_iterations =
        std::max(diag.max_inclusion_iterations, sdiag.inclusion_iterations);

    const Vec& g_j = state.g;
    const Vec& gamma = integ.last_gamma();
    Vec v_mid = 0.5 * (v_old + state.eta_dot_half);

    if (options.record_energy) {
      w_ext += (-qdd) * rom.beta.dot(state.eta_dot_half) * dt;
      w_damp += v_mid.dot(rom.D_ee.cwiseProduct(v_mid)) * dt;
      w_contact += state.lambda.dot(gamma) * dt;
    }

    if (jstep % options.decimate == 0) {
      ts.t[row] = t_j;
      int col = 0;
      Vec obs = recover_outputs(rom, g_j, eta_j);
      for (int o = 0; o < n_obs; ++o) ts.data(row, col++) = obs[o];
      z << gamma, v_old;
      Vec obs_vel = rom.R * z;
      for (int o = 0; o < n_obs; ++o) ts.data(row, col++) = obs_vel[o];
      bool any_active = false;
      for (int p = 0; p < rom.n_pairs; ++p) {
        for (int d = 0; d < dims; ++d) ts.data(row, col++) = g_j[p * dims + d];
        for (int d = 0; d < dims; ++d) ts.data(row, col++) = state.lambda[p * dims + d];
        if (g_j[p * dims] + config.g0[p] <= 0.0) any_active = true;
      }
      ts.data(row, col++) = any_active ? 1.0 : 0.0;
      if (options.record_energy) {
        z << g_j, eta_j;
        ts.data(row, energy_base + 0) = 0.5 * v_mid.squaredNorm();
        ts.data(row, energy_base + 1) = 0.5 * z.dot(K_full * z);
        ts.data(row, energy_base + 2) = w_ext;
        ts.data(row, energy_base + 3) = w_damp;
        ts.data(row, energy_base + 4) = w_contact;
      }
      ++row;
    }
  }

  ts.meta["dt"] = dt;
  ts.meta["omega"] = exc.omega;
  ts.meta["amplitude"] = exc.amplitude;
  ts.meta["phase"] = exc.phase;
  ts.meta["decimate"] = options.decimate;
  ts.meta["n_modes"] = rom.n_modes();

  diag.invariants = integ.invariants();
  SimResult out;
  out.series = std::move(ts);
  out.final_state = std::move(state);
  out.diag = diag;
  return out;
}

}  // namespace vibeam
