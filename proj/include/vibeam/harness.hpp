#pragma once

#include <map>
#include <optional>

#include "vibeam/integrator.hpp"
#include "vibeam/rom.hpp"

namespace vibeam {

enum class SweepDirection { Up, Down };

struct SweepPlan {
  std::vector<double> omegas;   // ascending grid (rad/s); traversal follows direction
  SweepDirection direction = SweepDirection::Up;
  double level = 0.0;           // base displacement amplitude (m)
  double clearance = 0.0;       // pair clearance applied for this sweep (m)
  int wait_periods = 200;
  int record_periods = 100;
  int steps_per_period = 1000;
  int max_wait_extensions = 5;
  int decimate = 1;             // decimation of persisted series
  double omega_ref = 0.0;       // normalization frequency for reporting
  std::string output_dir;       // per-step series CSVs; empty = do not persist
  std::string tag;              // file name prefix
};

struct SweepRecord {
  double omega = 0.0;
  double omega_norm = 0.0;
  std::map<std::string, double> rms_vel;       // per velocity channel
  std::map<std::string, double> amp_min;
  std::map<std::string, double> amp_max;
  std::map<std::string, double> amp_mean;
  double contact_fraction = 0.0;
  bool steady = false;
  int wait_extensions = 0;
  std::string state_hash_in;
  std::string state_hash_out;
  std::string series_path;
};

struct SweepResult {
  SweepPlan plan;
  std::vector<SweepRecord> records;  // ordered in sweep direction
  InvariantStats invariants;         // extremes over every accepted step
};

SweepResult stepped_sine(const ReducedModel& rom, const ContactConfig& config,
                         const SweepPlan& plan);

/// Relative root-mean-square deviation of u against u_ref.
double eps_rms(const Vec& u, const Vec& u_ref);

struct ConvergenceEntry {
  double key = 0.0;    // steps per period, or retained mode count
  double eps = 0.0;    // vs the finest/reference entry
  double rms = 0.0;    // RMS of the compared velocity signal
  bool diverged = false;
};

struct ConvergenceStudy {
  std::vector<ConvergenceEntry> entries;
  double key_ref = 0.0;
};

/// Time-step refinement at fixed excitation. All runs start from one shared
/// settled state; the compared signal is the centered-difference velocity of
/// the first observer on the common (coarse) time grid. Entries must divide
/// the finest resolution. Divergence at coarse steps is recorded, not fatal.
ConvergenceStudy convergence_time_study(const ReducedModel& rom, const ContactConfig& config,
                                        const Excitation& exc,
                                        const std::vector<int>& steps_per_period,
                                        int horizon_periods, int settle_periods);

/// Mode-count refinement: each basis size is reduced and settled separately
/// (initial conditions must be consistent with its own history), then the
/// observer velocity over the horizon is compared against the largest basis.
ConvergenceStudy convergence_modes_study(const TransformedModel& tm,
                                         const std::vector<double>& damping_ratios,
                                         const ContactConfig& config, const Excitation& exc,
                                         const std::vector<int>& n_modes_list,
                                         int horizon_periods, int settle_periods,
                                         int steps_per_period);

}  // namespace vibeam
