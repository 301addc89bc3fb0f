#pragma once

#include <string>

#include "vibeam/fe_model.hpp"

namespace vibeam {

/// Matrix Market coordinate format, real symmetric (lower triangle stored).
void write_matrix_market(const std::string& path, const SpMat& A);
SpMat read_matrix_market(const std::string& path);

/// Sidecar metadata: DOF map, constraints, contact pairs, selector, observers.
/// Line-oriented key layout, see docs/formats.md.
void write_model_metadata(const std::string& path, const FEModel& model);

/// Loads and validates a model from M/K Matrix Market files plus metadata.
/// Matrices are symmetrized on ingestion; relative asymmetry beyond 1e-8 is
/// rejected.
FEModel load_fe_matrices(const std::string& path_m, const std::string& path_k,
                         const std::string& metadata_path);

/// Writes the M/K/metadata triple produced by load_fe_matrices' counterpart.
void save_fe_matrices(const std::string& path_m, const std::string& path_k,
                      const std::string& metadata_path, const FEModel& model);

}  // namespace vibeam
