#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace vibeam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr const char* kToolVersion = "vibeam 0.1.0";

/// Input/consistency problem (bad file, bad dimensions, contract violation).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime numerical failure (non-convergence, singular factorization, NaN state).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vibeam
