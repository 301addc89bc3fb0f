#pragma once

#include <complex>
#include <string>
#include <vector>

#include "vibeam/fe_model.hpp"

namespace vibeam {

/// Constrained model in boundary/inner coordinates: the first n_g entries of
/// the coordinate vector are the relative (gap) displacements in the pair
/// frames, the rest are inner coordinates. `recovery` maps the new
/// coordinates back to free-DOF displacements of the parent model.
struct TransformedModel {
  Mat M;
  Mat K;
  int n_g = 0;
  int dims_per_pair = 0;
  int n_pairs = 0;
  Mat recovery;                 // n_free x (n_g + n_i), columns = new coords
  Vec b_inner;                  // selector restricted to inner coordinates
  Mat observer_rows;            // n_obs x (n_g + n_i)
  std::vector<std::string> observer_names;
  std::vector<Mat> frames;

  int n_inner() const { return static_cast<int>(K.rows()) - n_g; }
};

TransformedModel boundary_transform(const FEModel& model);

/// Massless-boundary reduced model. Mass is identity on the modal block and
/// zero on the boundary block by construction; only stiffness blocks are
/// stored. R maps (g, eta) to the named observer outputs.
struct ReducedModel {
  Mat K_gg;
  Mat K_ge;
  Mat K_ee;
  Vec D_ee;                     // diagonal modal damping 2*zeta_i*omega_i
  Vec beta;                     // modal excitation vector
  Mat R;                        // n_obs x (n_g + n_eta)
  std::vector<std::string> observer_names;
  int n_pairs = 0;
  int dims_per_pair = 0;
  std::vector<Mat> frames;
  Vec g0;                       // clearance per pair (m), normal direction
  Vec omega;                    // retained free-interface frequencies (rad/s)
  Mat phi_g;                    // boundary components of retained modes

  int n_g() const { return static_cast<int>(K_gg.rows()); }
  int n_modes() const { return static_cast<int>(K_ee.rows()); }
  Vec frequencies_hz() const { return omega / (2.0 * M_PI); }
};

ReducedModel macneal_reduce(const TransformedModel& tm, int n_modes);

/// Observer outputs for given boundary and modal coordinates.
Vec recover_outputs(const ReducedModel& rom, const Vec& g, const Vec& eta);

/// Steady-state complex observer amplitudes of the contact-free model under
/// harmonic base motion of unit displacement amplitude at `omega_exc`.
Eigen::VectorXcd linear_harmonic_response(const ReducedModel& rom, double omega_exc);

void save_reduced_model(const std::string& path, const ReducedModel& rom);
ReducedModel load_reduced_model(const std::string& path);

}  // namespace vibeam
