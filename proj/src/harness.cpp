#include "vibeam/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "vibeam/modal.hpp"
#include "vibeam/postproc.hpp"
#include "vibeam/util.hpp"

namespace vibeam {

namespace {

void validate_plan(const SweepPlan& plan) {
  if (plan.omegas.empty()) throw ValidationError("sweep grid is empty");
  for (std::size_t i = 1; i < plan.omegas.size(); ++i)
    if (plan.omegas[i] <= plan.omegas[i - 1])
      throw ValidationError("sweep grid must be strictly ascending");
  if (plan.omegas.front() <= 0.0) throw ValidationError("sweep frequencies must be positive");
  if (plan.record_periods < 2) throw ValidationError("record_periods must be at least 2");
  if (plan.wait_periods < plan.record_periods)
    throw ValidationError("wait_periods must cover at least one record block");
  if (plan.level < 0.0) throw ValidationError("excitation level must be non-negative");
  if (plan.steps_per_period < 16) throw ValidationError("steps_per_period too coarse");
}

std::vector<std::string> velocity_channels(const ReducedModel& rom) {
  std::vector<std::string> out;
  for (const auto& name : rom.observer_names) out.push_back(name + "_vel");
  return out;
}

// Largest relative block-RMS change over the velocity channels, guarded
// against channels that barely respond.
double block_change(const std::map<std::string, double>& a,
                    const std::map<std::string, double>& b) {
  double rmax = 0.0;
  for (const auto& [name, v] : a) rmax = std::max(rmax, v);
  double change = 0.0;
  for (const auto& [name, v] : a) {
    double denom = std::max({v, 1e-3 * rmax, 1e-300});
    change = std::max(change, std::abs(b.at(name) - v) / denom);
  }
  return change;
}

std::map<std::string, double> block_rms(const TimeSeries& ts,
                                        const std::vector<std::string>& channels) {
  std::map<std::string, double> out;
  for (const auto& name : channels) out[name] = rms(ts, name);
  return out;
}

}  // namespace

SweepResult stepped_sine(const ReducedModel& rom, const ContactConfig& config0,
                         const SweepPlan& plan) {
  validate_plan(plan);
  ContactConfig config = config0;
  config.g0 = Vec::Constant(rom.n_pairs, plan.clearance);

  std::vector<double> order = plan.omegas;
  if (plan.direction == SweepDirection::Down) std::reverse(order.begin(), order.end());

  const auto vel_channels = velocity_channels(rom);
  if (!plan.output_dir.empty()) std::filesystem::create_directories(plan.output_dir);

  SweepResult result;
  result.plan = plan;

  IntegratorState state;
  Excitation prev_exc;
  double prev_dt = 0.0;
  bool first = true;

  for (std::size_t i = 0; i < order.size(); ++i) {
    const double omega = order[i];
    const double period = 2.0 * M_PI / omega;
    const double dt = period / plan.steps_per_period;
    const Excitation exc{omega, plan.level, 0.0};

    SweepRecord rec;
    rec.omega = omega;
    rec.omega_norm = plan.omega_ref > 0.0 ? omega / plan.omega_ref : omega;

    if (first) {
      state = make_initial_state(rom, config, exc, dt);
      first = false;
    } else {
      // carry the state across the grid point, then re-seed the half grid
      Vec sync = synchronized_velocity(rom, state, prev_exc, prev_dt);
      state.t = 0.0;
      state.j = 0;
      restagger_velocity(state, rom, exc, dt, sync);
    }
    rec.state_hash_in = state_hash(state);

    SimOptions quiet;
    quiet.decimate = std::numeric_limits<int>::max();

    // settle, keeping the trailing block as the steady-state reference
    const int lead_periods = plan.wait_periods - plan.record_periods;
    if (lead_periods > 0) {
      SimResult lead = simulate(rom, config, exc, lead_periods * period, dt, state, quiet);
      state = lead.final_state;
      result.invariants.merge(lead.diag.invariants);
    }
    SimOptions rec_opts;
    rec_opts.decimate = plan.decimate;
    SimResult pre = simulate(rom, config, exc, plan.record_periods * period, dt, state, rec_opts);
    state = pre.final_state;
    result.invariants.merge(pre.diag.invariants);
    auto rms_pre = block_rms(pre.series, vel_channels);

    SimResult block = simulate(rom, config, exc, plan.record_periods * period, dt, state, rec_opts);
    state = block.final_state;
    result.invariants.merge(block.diag.invariants);
    auto rms_block = block_rms(block.series, vel_channels);

    rec.wait_extensions = 0;
    rec.steady = block_change(rms_pre, rms_block) <= 0.02;
    while (!rec.steady && rec.wait_extensions < plan.max_wait_extensions) {
      rms_pre = rms_block;
      block = simulate(rom, config, exc, plan.record_periods * period, dt, state, rec_opts);
      state = block.final_state;
      result.invariants.merge(block.diag.invariants);
      rms_block = block_rms(block.series, vel_channels);
      rec.wait_extensions += 1;
      rec.steady = block_change(rms_pre, rms_block) <= 0.02;
    }

    rec.rms_vel = rms_block;
    for (const auto& name : vel_channels) {
      PeriodAmplitudes amps = per_period_amplitudes(block.series, name, omega);
      rec.amp_min[name] = amps.min;
      rec.amp_max[name] = amps.max;
      rec.amp_mean[name] = amps.mean;
    }
    rec.contact_fraction = block.series.column("active").mean();

    if (!plan.output_dir.empty()) {
      TimeSeries ts = block.series;
      ts.meta["omega_norm"] = rec.omega_norm;
      ts.meta["level"] = plan.level;
      ts.meta["steps_per_period"] = plan.steps_per_period;
      for (int p = 0; p < rom.n_pairs; ++p) ts.meta["g0_" + std::to_string(p)] = config.g0[p];
      char name[64];
      std::snprintf(name, sizeof(name), "%s_step%03zu.csv", plan.tag.c_str(), i);
      rec.series_path = (std::filesystem::path(plan.output_dir) / name).string();
      write_time_series(rec.series_path, ts);
    }

    rec.state_hash_out = state_hash(state);
    result.records.push_back(std::move(rec));
    prev_exc = exc;
    prev_dt = dt;
  }
  return result;
}

double eps_rms(const Vec& u, const Vec& u_ref) {
  if (u.size() != u_ref.size()) throw ValidationError("eps_rms length mismatch");
  if (u.size() == 0) throw ValidationError("eps_rms on empty series");
  double denom = u_ref.squaredNorm();
  if (denom == 0.0) throw ValidationError("eps_rms reference has zero norm");
  return std::sqrt((u - u_ref).squaredNorm() / denom);
}

namespace {

// Centered-difference velocity of the first observer displacement channel,
// defined on the interior of the integer time grid.
Vec centered_velocity(const TimeSeries& ts, const std::string& channel) {
  Vec u = ts.column(channel);
  double dt = ts.dt();
  int n = static_cast<int>(u.size());
  if (n < 3) throw ValidationError("series too short for centered differences");
  Vec v(n - 2);
  for (int k = 1; k + 1 < n; ++k) v[k - 1] = (u[k + 1] - u[k - 1]) / (2.0 * dt);
  return v;
}

}  // namespace

ConvergenceStudy convergence_time_study(const ReducedModel& rom, const ContactConfig& config,
                                        const Excitation& exc,
                                        const std::vector<int>& steps_per_period,
                                        int horizon_periods, int settle_periods) {
  if (steps_per_period.size() < 2)
    throw ValidationError("time-step study needs at least two resolutions");
  for (std::size_t i = 1; i < steps_per_period.size(); ++i) {
    if (steps_per_period[i] <= steps_per_period[i - 1])
      throw ValidationError("resolution list must be ascending");
  }
  const int ref_steps = steps_per_period.back();
  for (int s : steps_per_period)
    if (ref_steps % s != 0)
      throw ValidationError("every resolution must divide the reference resolution");
  if (horizon_periods < 1) throw ValidationError("horizon must be at least one period");

  const double period = 2.0 * M_PI / exc.omega;
  const int settle_steps = 1000;
  const double dt_settle = period / settle_steps;

  IntegratorState shared = make_initial_state(rom, config, exc, dt_settle);
  if (settle_periods > 0) {
    SimOptions quiet;
    quiet.decimate = std::numeric_limits<int>::max();
    shared = simulate(rom, config, exc, settle_periods * period, dt_settle, shared, quiet).final_state;
  }
  Vec sync = synchronized_velocity(rom, shared, exc, dt_settle);

  const std::string channel = rom.observer_names.at(0);
  std::vector<Vec> velocities(steps_per_period.size());
  std::vector<bool> diverged(steps_per_period.size(), false);

  for (std::size_t i = 0; i < steps_per_period.size(); ++i) {
    double dt = period / steps_per_period[i];
    IntegratorState state = shared;
    restagger_velocity(state, rom, exc, dt, sync);
    try {
      SimResult res = simulate(rom, config, exc, horizon_periods * period, dt, state);
      velocities[i] = centered_velocity(res.series, channel);
    } catch (const NumericalError&) {
      diverged[i] = true;
    }
  }

  ConvergenceStudy study;
  study.key_ref = ref_steps;
  const Vec& v_ref = velocities.back();
  if (diverged.back()) throw NumericalError("reference resolution diverged");

  for (std::size_t i = 0; i < steps_per_period.size(); ++i) {
    ConvergenceEntry e;
    e.key = steps_per_period[i];
    if (diverged[i]) {
      e.diverged = true;
      e.eps = std::numeric_limits<double>::infinity();
      e.rms = std::numeric_limits<double>::quiet_NaN();
    } else {
      int stride = ref_steps / steps_per_period[i];
      int n = static_cast<int>(velocities[i].size());
      // sample k of grid i sits at index k*stride of the reference grid
      int n_common = std::min(n, static_cast<int>(v_ref.size() / stride));
      Vec ref_sub(n_common), own(n_common);
      for (int k = 0; k < n_common; ++k) {
        own[k] = velocities[i][k];
        ref_sub[k] = v_ref[(k + 1) * stride - 1];
      }
      e.eps = eps_rms(own, ref_sub);
      e.rms = rms(own);
    }
    study.entries.push_back(e);
  }
  return study;
}

ConvergenceStudy convergence_modes_study(const TransformedModel& tm,
                                         const std::vector<double>& damping_ratios,
                                         const ContactConfig& config, const Excitation& exc,
                                         const std::vector<int>& n_modes_list,
                                         int horizon_periods, int settle_periods,
                                         int steps_per_period) {
  if (n_modes_list.size() < 2)
    throw ValidationError("mode-count study needs at least two basis sizes");
  for (std::size_t i = 1; i < n_modes_list.size(); ++i)
    if (n_modes_list[i] <= n_modes_list[i - 1])
      throw ValidationError("basis size list must be ascending");

  const double period = 2.0 * M_PI / exc.omega;
  const double dt = period / steps_per_period;

  std::vector<Vec> velocities(n_modes_list.size());
  std::vector<bool> failed(n_modes_list.size(), false);
  std::string channel;

  for (std::size_t i = 0; i < n_modes_list.size(); ++i) {
    try {
      ReducedModel rom = macneal_reduce(tm, n_modes_list[i]);
      Vec zeta = damping_ratios_filled(rom.n_modes(), damping_ratios);
      rom.D_ee = 2.0 * zeta.cwiseProduct(rom.omega);
      if (channel.empty()) channel = rom.observer_names.at(0);
      IntegratorState state = make_initial_state(rom, config, exc, dt);
      SimOptions quiet;
      quiet.decimate = std::numeric_limits<int>::max();
      if (settle_periods > 0)
        state = simulate(rom, config, exc, settle_periods * period, dt, state, quiet).final_state;
      SimResult res = simulate(rom, config, exc, horizon_periods * period, dt, state);
      velocities[i] = centered_velocity(res.series, channel);
    } catch (const std::runtime_error&) {
      failed[i] = true;
    }
  }
  if (failed.back()) throw NumericalError("reference basis size failed");

  ConvergenceStudy study;
  study.key_ref = n_modes_list.back();
  const Vec& v_ref = velocities.back();
  for (std::size_t i = 0; i < n_modes_list.size(); ++i) {
    ConvergenceEntry e;
    e.key = n_modes_list[i];
    if (failed[i]) {
      e.diverged = true;
      e.eps = std::numeric_limits<double>::infinity();
      e.rms = std::numeric_limits<double>::quiet_NaN();
    } else {
      int n_common = static_cast<int>(std::min(velocities[i].size(), v_ref.size()));
      e.eps = eps_rms(velocities[i].head(n_common), v_ref.head(n_common));
      e.rms = rms(Vec(velocities[i].head(n_common)));
    }
    study.entries.push_back(e);
  }
  return study;
}

}  // namespace vibeam
