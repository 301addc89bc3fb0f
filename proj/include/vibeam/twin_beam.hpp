#pragma once

#include "vibeam/fe_model.hpp"

namespace vibeam {

/// Two cantilevers, clamped at the root, tips facing each other across a
/// small vertical clearance. Planar bending elements with (w, theta) per
/// node. The upper beam is wider at the clamping (linear width taper) so its
/// fundamental frequency sits about 10% above the lower beam's.
struct TwinBeamSpec {
  double length = 0.3;            // m, both beams
  double width = 0.02;            // m, lower beam and upper-beam tip
  double thickness = 0.003;       // m
  double taper_ratio = 1.38;      // upper root width / tip width
  double youngs_modulus = 2.1e11; // Pa
  double density = 7850.0;        // kg/m^3
  int n_elements = 32;            // per beam
  double probe_offset = 0.005;    // m, contact-plane distance from each axis
  double tip_mass = 0.0;          // kg, optional probe mass at each tip
};

FEModel build_twin_beam_model(const TwinBeamSpec& spec);

/// Variant with the root clamp replaced by grounding springs one node in
/// from the clamp, exposing (k_n, k_t) for model updating.
FEModel build_twin_beam_with_root_layers(const TwinBeamSpec& spec, double k_n, double k_t);

}  // namespace vibeam
