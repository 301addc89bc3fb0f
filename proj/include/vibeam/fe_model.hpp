#pragma once

#include <string>
#include <vector>

#include "vibeam/types.hpp"

namespace vibeam {

/// One term of a sparse linear functional on the full DOF vector.
struct SparseTerm {
  int dof = -1;
  double coeff = 0.0;
};

using SparseRow = std::vector<SparseTerm>;

double eval_row(const SparseRow& row, const Vec& q);

/// Node-to-node contact pair candidate. The gap rows express the relative
/// displacement components (normal first, then tangential) as linear
/// functionals of the full DOF vector; the abs rows are the complementary
/// combinations that stay in the inner coordinate set, one per gap row.
struct ContactPair {
  int node_a = -1;
  int node_b = -1;
  Mat frame;  // rows = directions (normal, tangent(s)) as global unit vectors
  std::vector<SparseRow> gap_rows;
  std::vector<SparseRow> abs_rows;
};

struct PointMass {
  int node = -1;
  double mass = 0.0;
};

/// Named output channel, a linear functional of the full DOF vector.
struct Observer {
  std::string name;
  SparseRow row;
};

struct DofInfo {
  int node = -1;
  std::string label;  // direction label, e.g. "w" or "theta"
};

/// Finite-element-level model: mass/stiffness, DOF map, ground constraints,
/// contact pair candidates and the base-motion selector. Immutable once
/// validated; mutating operations return a new model.
struct FEModel {
  SpMat M;
  SpMat K;
  std::vector<DofInfo> dofs;
  std::vector<int> constrained_dofs;
  std::vector<ContactPair> contact_pairs;
  Vec b;  // 1 where the DOF direction matches the base motion
  std::vector<PointMass> point_masses;
  std::vector<Observer> observers;

  int n_dofs() const { return static_cast<int>(dofs.size()); }
  int gap_dims() const;
  std::vector<int> free_dofs() const;
  std::vector<bool> constrained_mask() const;

  /// Enforces the structural invariants; throws ValidationError on violation.
  void validate() const;
};

/// Symmetrizes A in place; returns the max relative asymmetry found.
double symmetrize(SpMat& A);

/// Transversally isotropic elastic connection between node pairs (or node to
/// ground when node_b < 0). Acts on the DOFs matching normal_label with k_n
/// and on those matching tangential_label with k_t.
struct ElasticLayer {
  struct Attachment {
    int node_a = -1;
    int node_b = -1;  // -1 = ground
  };
  std::vector<Attachment> attachments;
  double k_n = 0.0;
  double k_t = 0.0;
  std::string normal_label = "w";
  std::string tangential_label = "theta";
};

FEModel attach_elastic_layers(const FEModel& model, const std::vector<ElasticLayer>& layers);
FEModel apply_point_masses(const FEModel& model, const std::vector<PointMass>& masses);

}  // namespace vibeam
