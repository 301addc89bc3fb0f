#pragma once

#include <limits>

#include "vibeam/contact.hpp"
#include "vibeam/time_series.hpp"

namespace vibeam {

/// Harmonic base motion q_base(t) = amplitude * sin(omega t + phase).
struct Excitation {
  double omega = 0.0;      // rad/s
  double amplitude = 0.0;  // m
  double phase = 0.0;      // rad
};

/// Second time derivative of the base displacement.
double base_acceleration(const Excitation& exc, double t);

/// Staggered-grid snapshot. After j completed steps: eta holds the modal
/// coordinates at t = j*dt (= state.t), eta_dot_half the modal velocities at
/// t - dt/2, g the boundary coordinates at t - dt (they are advanced inside
/// the next step, together with lambda), lambda the forces of that advance.
struct IntegratorState {
  Vec g;
  Vec eta;
  Vec eta_dot_half;
  Vec lambda;
  long j = 0;
  double t = 0.0;
};

struct StepDiagnostics {
  int inclusion_iterations = 0;
  double inclusion_residual = 0.0;
  int active_pairs = 0;
  bool retried = false;
};

/// Running extremes of the contact-law invariants over accepted steps.
struct InvariantStats {
  double min_lambda_n = std::numeric_limits<double>::infinity();
  double min_physical_gap = std::numeric_limits<double>::infinity();
  double max_friction_excess = 0.0;  // (|lam_t| - mu*lam_n) / max(lam_n, eps)
  double max_stick_slip = 0.0;       // |gamma_t| while strictly inside the disk
  double max_abs_gamma = 0.0;
  long steps = 0;

  void merge(const InvariantStats& other);
};

struct SimOptions {
  int decimate = 1;         // record every k-th step
  bool record_energy = false;
};

struct SimDiagnostics {
  long steps = 0;
  long retries = 0;
  int max_inclusion_iterations = 0;
  InvariantStats invariants;
};

struct SimResult {
  TimeSeries series;
  IntegratorState final_state;
  SimDiagnostics diag;
};

/// One-step operator with the per-dt factorizations cached.
class Integrator {
 public:
  Integrator(const ReducedModel& rom, const ContactConfig& config, double dt);

  void step(IntegratorState& state, const Excitation& exc, StepDiagnostics* diag = nullptr);
  double dt() const { return dt_; }
  const ReducedModel& rom() const { return rom_; }

  /// Gap velocity and forces of the last executed step (half-grid values).
  const Vec& last_gamma() const { return last_gamma_; }

  const InvariantStats& invariants() const { return invariants_; }

 private:
  void substep(IntegratorState& state, const Excitation& exc, double dt, const Mat& G_full,
               StepDiagnostics* diag);

  const ReducedModel& rom_;
  ContactConfig config_;
  double dt_;
  Mat G_full_;       // (dt K_gg)^-1
  Mat G_full_half_;  // lazily built for the dt/2 retry
  bool have_half_ = false;
  Mat K_ge_t_;
  Vec coef_old_;     // 1/dt - D/2
  Vec coef_new_inv_; // 1 / (1/dt + D/2)
  Vec last_gamma_;
  InvariantStats invariants_;
};

/// Fresh-run initial state: zero modal motion, boundary at the static contact
/// equilibrium, velocity half-grid seeded with a consistent backward half step.
IntegratorState make_initial_state(const ReducedModel& rom, const ContactConfig& config,
                                   const Excitation& exc, double dt);

/// Contract-shaped single step (builds the cached operator internally).
IntegratorState step(const IntegratorState& state, const ReducedModel& rom,
                     const ContactConfig& config, const Excitation& exc, double dt);

/// Modal velocity at the integer grid time state.t, reconstructed from the
/// half-grid value of a run with step dt_old.
Vec synchronized_velocity(const ReducedModel& rom, const IntegratorState& state,
                          const Excitation& exc, double dt_old);

/// Re-seeds eta_dot_half for a new step size (and possibly new excitation)
/// from a synchronized velocity, preserving second-order consistency.
void restagger_velocity(IntegratorState& state, const ReducedModel& rom, const Excitation& exc,
                        double dt_new, const Vec& eta_dot_sync);

/// Content hash of the full state, for carry-over and determinism checks.
std::string state_hash(const IntegratorState& state);

SimResult simulate(const ReducedModel& rom, const ContactConfig& config, const Excitation& exc,
                   double t_end, double dt, const IntegratorState& state0,
                   const SimOptions& options = {});

}  // namespace vibeam
