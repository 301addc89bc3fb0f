#include "vibeam/twin_beam.hpp"

#include <cmath>

namespace vibeam {

namespace {

void check_spec(const TwinBeamSpec& s) {
  if (s.length <= 0 || s.width <= 0 || s.thickness <= 0 || s.taper_ratio <= 0 ||
      s.youngs_modulus <= 0 || s.density <= 0)
    throw ValidationError("twin beam spec requires positive geometry/material values");
  if (s.n_elements < 4) throw ValidationError("twin beam spec requires at least 4 elements per beam");
  if (s.tip_mass < 0) throw ValidationError("twin beam tip mass must be non-negative");
}

// Hermite bending element, DOFs (w1, th1, w2, th2).
void element_matrices(double E, double I, double rhoA, double l, Mat& Ke, Mat& Me) {
  double l2 = l * l;
  Ke.resize(4, 4);
  Ke << 12, 6 * l, -12, 6 * l,
      6 * l, 4 * l2, -6 * l, 2 * l2,
      -12, -6 * l, 12, -6 * l,
      6 * l, 2 * l2, -6 * l, 4 * l2;
  Ke *= E * I / (l2 * l);
  Me.resize(4, 4);
  Me << 156, 22 * l, 54, -13 * l,
      22 * l, 4 * l2, 13 * l, -3 * l2,
      54, 13 * l, 156, -22 * l,
      -13 * l, -3 * l2, -22 * l, 4 * l2;
  Me *= rhoA * l / 420.0;
}

// Assembles one cantilever into the global triplet lists. Width varies
// linearly from root to tip, sampled at the element midpoint.
void assemble_beam(const TwinBeamSpec& s, double width_root, double width_tip, int dof_offset,
                   std::vector<Triplet>& mk, std::vector<Triplet>& mm) {
  double le = s.length / s.n_elements;
  Mat Ke, Me;
  for (int e = 0; e < s.n_elements; ++e) {
    double xm = (e + 0.5) / s.n_elements;
    double width = width_root + (width_tip - width_root) * xm;
    double I = width * std::pow(s.thickness, 3) / 12.0;
    double rhoA = s.density * width * s.thickness;
    element_matrices(s.youngs_modulus, I, rhoA, le, Ke, Me);
    int base = dof_offset + 2 * e;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        mk.emplace_back(base + i, base + j, Ke(i, j));
        mm.emplace_back(base + i, base + j, Me(i, j));
      }
  }
}

}  // namespace

FEModel build_twin_beam_model(const TwinBeamSpec& s) {
  check_spec(s);
  const int nodes_per_beam = s.n_elements + 1;
  const int dofs_per_beam = 2 * nodes_per_beam;
  const int n = 2 * dofs_per_beam;

  FEModel model;
  model.dofs.resize(n);
  for (int beam = 0; beam < 2; ++beam)
    for (int k = 0; k < nodes_per_beam; ++k) {
      int node = beam * nodes_per_beam + k;
      model.dofs[beam * dofs_per_beam + 2 * k] = {node, "w"};
      model.dofs[beam * dofs_per_beam + 2 * k + 1] = {node, "theta"};
    }

  std::vector<Triplet> mk, mm;
  // beam 0 = lower (uniform), beam 1 = upper (tapered root)
  assemble_beam(s, s.width, s.width, 0, mk, mm);
  assemble_beam(s, s.width * s.taper_ratio, s.width, dofs_per_beam, mk, mm);
  model.K.resize(n, n);
  model.K.setFromTriplets(mk.begin(), mk.end());
  model.M.resize(n, n);
  model.M.setFromTriplets(mm.begin(), mm.end());

  model.constrained_dofs = {0, 1, dofs_per_beam, dofs_per_beam + 1};

  model.b = Vec::Zero(n);
  auto mask = model.constrained_mask();
  for (int i = 0; i < n; ++i)
    if (model.dofs[i].label == "w" && !mask[i]) model.b[i] = 1.0;

  const int tip_lower_w = dofs_per_beam - 2;
  const int tip_lower_th = dofs_per_beam - 1;
  const int tip_upper_w = 2 * dofs_per_beam - 2;
  const int tip_upper_th = 2 * dofs_per_beam - 1;

  // Gap opens when the upper tip moves up relative to the lower tip. The
  // tangential component is the axial slip of the probe contact plane,
  // carried by the tip rotations through the probe offset.
  ContactPair pair;
  pair.node_a = 2 * nodes_per_beam - 1;  // upper tip
  pair.node_b = nodes_per_beam - 1;      // lower tip
  pair.frame.resize(2, 3);
  pair.frame << 0, 0, 1,  // normal, vertical
      1, 0, 0;            // tangent, axial
  pair.gap_rows = {
      {{tip_upper_w, 1.0}, {tip_lower_w, -1.0}},
      {{tip_upper_th, -s.probe_offset}, {tip_lower_th, -s.probe_offset}},
  };
  pair.abs_rows = {
      {{tip_upper_w, 0.5}, {tip_lower_w, 0.5}},
      {{tip_upper_th, 0.5}, {tip_lower_th, -0.5}},
  };
  model.contact_pairs.push_back(pair);

  model.observers = {
      {"tip_upper", {{tip_upper_w, 1.0}}},
      {"tip_lower", {{tip_lower_w, 1.0}}},
  };

  model.validate();
  if (s.tip_mass > 0.0)
    return apply_point_masses(model, {{pair.node_a, s.tip_mass}, {pair.node_b, s.tip_mass}});
  return model;
}

FEModel build_twin_beam_with_root_layers(const TwinBeamSpec& s, double k_n, double k_t) {
  FEModel clamped = build_twin_beam_model(s);
  FEModel model = clamped;
  // release the clamps, ground the root nodes through springs instead
  model.constrained_dofs.clear();
  for (int i = 0; i < model.n_dofs(); ++i)
    if (model.dofs[i].label == "w") model.b[i] = 1.0;
  ElasticLayer layer;
  layer.k_n = k_n;
  layer.k_t = k_t;
  int nodes_per_beam = s.n_elements + 1;
  layer.attachments = {{0, -1}, {nodes_per_beam, -1}};
  return attach_elastic_layers(model, {layer});
}

}  // namespace vibeam
