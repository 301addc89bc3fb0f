#include "vibeam/modal.hpp"

#include <cmath>

namespace vibeam {

void eig_lowest(const Mat& M, const Mat& K, int n, Vec& omega_sq, Mat& phi) {
  if (n < 1 || n > K.rows()) throw ValidationError("requested mode count out of range");
  Eigen::LLT<Mat> mass_chol(M);
  if (mass_chol.info() != Eigen::Success)
    throw NumericalError("mass matrix singular on retained DOFs");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(K, M,
                                                       Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  omega_sq = solver.eigenvalues().head(n);
  phi = solver.eigenvectors().leftCols(n);  // normalized so phi^T M phi = I

  // relative eigen-residual guard
  double kscale = K.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    Vec r = K * phi.col(i) - omega_sq[i] * (M * phi.col(i));
    if (r.cwiseAbs().maxCoeff() > 1e-10 * kscale)
      throw NumericalError("eigen residual beyond tolerance");
  }
}

ModalData solve_modes(const FEModel& model, int n) {
  auto free_idx = model.free_dofs();
  if (n > static_cast<int>(free_idx.size()))
    throw ValidationError("mode count exceeds number of unconstrained DOFs");

  Mat Mf(free_idx.size(), free_idx.size()), Kf(free_idx.size(), free_idx.size());
  Mat Md = Mat(model.M), Kd = Mat(model.K);
  for (std::size_t i = 0; i < free_idx.size(); ++i)
    for (std::size_t j = 0; j < free_idx.size(); ++j) {
      Mf(i, j) = Md(free_idx[i], free_idx[j]);
      Kf(i, j) = Kd(free_idx[i], free_idx[j]);
    }

  Vec omega_sq;
  Mat phi_free;
  eig_lowest(Mf, Kf, n, omega_sq, phi_free);

  ModalData out;
  out.omega = omega_sq.cwiseMax(0.0).cwiseSqrt();
  out.frequencies_hz = out.omega / (2.0 * M_PI);
  out.modes = Mat::Zero(model.n_dofs(), n);
  for (std::size_t i = 0; i < free_idx.size(); ++i) out.modes.row(free_idx[i]) = phi_free.row(i);
  out.damping_ratios = Vec::Zero(n);
  return out;
}

Vec damping_ratios_filled(int n, const std::vector<double>& ratios,
                          const std::vector<std::pair<int, double>>& overrides) {
  if (ratios.empty()) throw ValidationError("at least one damping ratio required");
  Vec zeta(n);
  for (int i = 0; i < n; ++i) {
    double z = i < static_cast<int>(ratios.size()) ? ratios[i] : ratios.back();
    zeta[i] = z;
  }
  for (const auto& [idx, z] : overrides) {
    if (idx < 0 || idx >= n) throw ValidationError("damping override index out of range");
    zeta[idx] = z;
  }
  for (int i = 0; i < n; ++i)
    if (zeta[i] < 0.0 || zeta[i] >= 1.0)
      throw ValidationError("damping ratios must lie in [0, 1)");
  return zeta;
}

Vec damping_matrix(const ModalData& modal, const std::vector<double>& ratios,
                   const std::vector<std::pair<int, double>>& overrides) {
  Vec zeta = damping_ratios_filled(modal.count(), ratios, overrides);
  return 2.0 * zeta.cwiseProduct(modal.omega);
}

}  // namespace vibeam
