#include "vibeam/fe_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vibeam {

double eval_row(const SparseRow& row, const Vec& q) {
  double v = 0.0;
  for (const auto& t : row) v += t.coeff * q[t.dof];
  return v;
}

int FEModel::gap_dims() const {
  return contact_pairs.empty() ? 0 : static_cast<int>(contact_pairs.front().gap_rows.size());
}

std::vector<int> FEModel::free_dofs() const {
  auto mask = constrained_mask();
  std::vector<int> out;
  out.reserve(dofs.size());
  for (int i = 0; i < n_dofs(); ++i)
    if (!mask[i]) out.push_back(i);
  return out;
}

std::vector<bool> FEModel::constrained_mask() const {
  std::vector<bool> mask(dofs.size(), false);
  for (int c : constrained_dofs) {
    if (c < 0 || c >= n_dofs()) throw ValidationError("constrained DOF index out of range");
    mask[c] = true;
  }
  return mask;
}

namespace {

double max_abs(const SpMat& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

void check_symmetric(const SpMat& A, const char* name) {
  SpMat D = SpMat(A.transpose()) - A;
  double scale = max_abs(A);
  if (scale > 0.0 && max_abs(D) > 1e-8 * scale)
    throw ValidationError(std::string(name) + " is not symmetric");
}

}  // namespace

void FEModel::validate() const {
  const int n = n_dofs();
  if (M.rows() != n || M.cols() != n || K.rows() != n || K.cols() != n)
    throw ValidationError("matrix dimensions do not match DOF map");
  check_symmetric(M, "M");
  check_symmetric(K, "K");
  if (b.size() != n) throw ValidationError("selector vector b has wrong length");

  auto mask = constrained_mask();
  for (int i = 0; i < n; ++i) {
    if (b[i] != 0.0 && b[i] != 1.0) throw ValidationError("b must contain only 0/1 entries");
    if (b[i] != 0.0 && mask[i]) throw ValidationError("b selects a constrained DOF");
  }

  for (const auto& pair : contact_pairs) {
    if (pair.gap_rows.empty() || pair.gap_rows.size() != pair.abs_rows.size())
      throw ValidationError("contact pair must have matching gap/abs rows");
    for (const auto& rows : {pair.gap_rows, pair.abs_rows})
      for (const auto& row : rows)
        for (const auto& t : row) {
          if (t.dof < 0 || t.dof >= n) throw ValidationError("contact pair references unknown DOF");
          if (mask[t.dof]) throw ValidationError("contact pair references a constrained DOF");
        }
    if (pair.frame.size() > 0) {
      Mat G = pair.frame * pair.frame.transpose();
      if (!G.isIdentity(1e-10)) throw ValidationError("contact frame is not orthonormal");
    }
  }

  for (const auto& pm : point_masses)
    if (pm.mass < 0.0) throw ValidationError("negative point mass");
  for (const auto& obs : observers)
    for (const auto& t : obs.row)
      if (t.dof < 0 || t.dof >= n) throw ValidationError("observer references unknown DOF");
}

double symmetrize(SpMat& A) {
  SpMat At = SpMat(A.transpose());
  SpMat D = At - A;
  double scale = max_abs(A);
  double rel = scale > 0.0 ? max_abs(D) / scale : 0.0;
  A = 0.5 * (A + At);
  A.prune(0.0);
  return rel;
}

namespace {

// Collects DOFs of `node` whose label matches, keyed for layer assembly.
int labeled_dof(const FEModel& model, int node, const std::string& label) {
  for (int i = 0; i < model.n_dofs(); ++i)
    if (model.dofs[i].node == node && model.dofs[i].label == label) return i;
  return -1;
}

void add_spring(std::vector<Triplet>& trips, int a, int b, double k) {
  if (k == 0.0) return;
  if (b < 0) {
    trips.emplace_back(a, a, k);
    return;
  }
  trips.emplace_back(a, a, k);
  trips.emplace_back(b, b, k);
  trips.emplace_back(a, b, -k);
  trips.emplace_back(b, a, -k);
}

}  // namespace

FEModel attach_elastic_layers(const FEModel& model, const std::vector<ElasticLayer>& layers) {
  FEModel out = model;
  auto mask = model.constrained_mask();
  std::vector<Triplet> trips;
  for (const auto& layer : layers) {
    if (layer.k_n <= 0.0 || layer.k_t <= 0.0)
      throw ValidationError("elastic layer stiffness must be positive");
    for (const auto& at : layer.attachments) {
      struct Dir {
        const std::string* label;
        double k;
      };
      for (const Dir& d : {Dir{&layer.normal_label, layer.k_n}, Dir{&layer.tangential_label, layer.k_t}}) {
        int da = labeled_dof(model, at.node_a, *d.label);
        if (da < 0) throw ValidationError("layer node has no DOF labeled " + *d.label);
        int db = at.node_b >= 0 ? labeled_dof(model, at.node_b, *d.label) : -1;
        if (at.node_b >= 0 && db < 0) throw ValidationError("layer node has no DOF labeled " + *d.label);
        if (mask[da] || (db >= 0 && mask[db]))
          throw ValidationError("elastic layer attached to a constrained DOF");
        add_spring(trips, da, db, d.k);
      }
    }
  }
  SpMat dK(model.n_dofs(), model.n_dofs());
  dK.setFromTriplets(trips.begin(), trips.end());
  out.K = model.K + dK;
  out.validate();
  return out;
}

FEModel apply_point_masses(const FEModel& model, const std::vector<PointMass>& masses) {
  FEModel out = model;
  std::vector<Triplet> trips;
  for (const auto& pm : masses) {
    if (pm.mass < 0.0) throw ValidationError("negative point mass");
    if (pm.mass == 0.0) continue;
    bool found = false;
    for (int i = 0; i < model.n_dofs(); ++i) {
      // translational DOFs only; rotations keep zero added inertia
      if (model.dofs[i].node == pm.node && model.dofs[i].label != "theta") {
        trips.emplace_back(i, i, pm.mass);
        found = true;
      }
    }
    if (!found) throw ValidationError("point mass on unknown node");
  }
  SpMat dM(model.n_dofs(), model.n_dofs());
  dM.setFromTriplets(trips.begin(), trips.end());
  out.M = model.M + dM;
  out.point_masses.insert(out.point_masses.end(), masses.begin(), masses.end());
  out.validate();
  return out;
}

}  // namespace vibeam
