#pragma once

#include "vibeam/fe_model.hpp"

namespace vibeam {

/// Mass-normalized modes of the constrained model, ascending frequency.
struct ModalData {
  Vec frequencies_hz;
  Vec omega;      // rad/s
  Mat modes;      // full DOF count x n, zeros at constrained DOFs
  Vec damping_ratios;

  int count() const { return static_cast<int>(omega.size()); }
};

/// Lowest n generalized eigenpairs of (K, M) restricted to `free_idx`,
/// mass-normalized. Throws NumericalError if M is singular on the retained
/// DOFs or the eigensolver fails.
void eig_lowest(const Mat& M, const Mat& K, int n, Vec& omega_sq, Mat& phi);

ModalData solve_modes(const FEModel& model, int n);

/// Diagonal modal damping entries 2*zeta_i*omega_i. `ratios` covers a prefix
/// of modes; the last given value extends to all higher modes. Per-mode
/// overrides replace individual entries after the fill.
Vec damping_matrix(const ModalData& modal, const std::vector<double>& ratios,
                   const std::vector<std::pair<int, double>>& overrides = {});

/// Same fill rule, expressed on a plain frequency vector.
Vec damping_ratios_filled(int n, const std::vector<double>& ratios,
                          const std::vector<std::pair<int, double>>& overrides = {});

}  // namespace vibeam
