#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vibeam/twin_beam.hpp"
#include "vibeam/updating.hpp"

using namespace vibeam;

namespace {

FEModel single_dof(double mass, double k) {
  FEModel m;
  m.dofs = {{0, "w"}};
  std::vector<Triplet> mt = {{0, 0, mass}};
  std::vector<Triplet> kt = {{0, 0, k}};
  m.M.resize(1, 1);
  m.M.setFromTriplets(mt.begin(), mt.end());
  m.K.resize(1, 1);
  m.K.setFromTriplets(kt.begin(), kt.end());
  m.b = Vec::Zero(1);
  return m;
}

FEModel grounded_mass_model(double mass, double kn) {
  FEModel m;
  m.dofs = {{0, "w"}, {0, "theta"}};
  std::vector<Triplet> mt = {{0, 0, mass}, {1, 1, 1e-8}};
  m.M.resize(2, 2);
  m.M.setFromTriplets(mt.begin(), mt.end());
  m.K.resize(2, 2);
  m.b = Vec::Zero(2);
  ElasticLayer layer;
  layer.k_n = kn;
  layer.k_t = 1e10;
  layer.attachments = {{0, -1}};
  return attach_elastic_layers(m, {layer});
}

}  // namespace

TEST_CASE("one-DOF system has the exact spring-mass frequency") {
  FEModel m = single_dof(3.0, 48.0);
  ModalData modes = solve_modes(m, 1);
  CHECK(modes.frequencies_hz[0] == doctest::Approx(std::sqrt(48.0 / 3.0) / (2 * M_PI)).epsilon(1e-13));
}

TEST_CASE("twin-beam spectrum shows close fundamentals and a second-bending pair near 6x") {
  FEModel m = build_twin_beam_model({});
  ModalData modes = solve_modes(m, 7);
  Vec f = modes.frequencies_hz;
  // close fundamental pair
  CHECK(f[0] / f[1] > 0.85);
  CHECK(f[0] / f[1] < 0.95);
  // second-bending pair sits a factor ~6 above
  CHECK(f[2] / f[0] > 5.0);
  CHECK(f[2] / f[0] < 7.0);
  CHECK(f[3] / f[1] > 5.0);
  CHECK(f[3] / f[1] < 7.0);
  for (int i = 1; i < 7; ++i) CHECK(f[i] >= f[i - 1]);
}

TEST_CASE("modes are mass-orthonormal and diagonalize the stiffness") {
  TwinBeamSpec spec;
  spec.n_elements = 12;
  FEModel m = build_twin_beam_model(spec);
  ModalData modes = solve_modes(m, 10);
  Mat phi = modes.modes;
  Mat gram = phi.transpose() * Mat(m.M) * phi;
  CHECK((gram - Mat::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);
  Mat kmod = phi.transpose() * Mat(m.K) * phi;
  Vec omega_sq = modes.omega.cwiseProduct(modes.omega);
  double wmax2 = omega_sq.maxCoeff();
  CHECK((kmod - Mat(omega_sq.asDiagonal())).cwiseAbs().maxCoeff() / wmax2 < 1e-8);
}

TEST_CASE("mode count beyond the free DOFs is rejected") {
  FEModel m = single_dof(1.0, 1.0);
  CHECK_THROWS_AS(solve_modes(m, 2), ValidationError);
}

TEST_CASE("damping assembly: zeros, pinned first mode, fill rule") {
  FEModel m = build_twin_beam_model({});
  ModalData modes = solve_modes(m, 12);

  Vec zero = damping_matrix(modes, {0.0});
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  Vec d = damping_matrix(modes, {0.00153});
  CHECK(d[0] == doctest::Approx(2.0 * 0.00153 * modes.omega[0]).epsilon(1e-14));

  std::vector<double> seven = {0.00153, 0.00183, 0.00236, 0.00236, 0.00748, 0.00186, 0.00143};
  Vec filled = damping_matrix(modes, seven);
  for (int i = 7; i < 12; ++i)
    CHECK(filled[i] == doctest::Approx(2.0 * 0.00143 * modes.omega[i]).epsilon(1e-14));
  for (int i = 0; i < 12; ++i) CHECK(filled[i] >= 0.0);

  Vec overridden = damping_matrix(modes, seven, {{8, 0.01}});
  CHECK(overridden[8] == doctest::Approx(2.0 * 0.01 * modes.omega[8]).epsilon(1e-14));

  CHECK_THROWS_AS(damping_matrix(modes, {-0.1}), ValidationError);
  CHECK_THROWS_AS(damping_matrix(modes, {1.5}), ValidationError);
}

TEST_CASE("updating returns the fixed point when targets match the initial model") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  UpdateProblem prob;
  prob.factory = [spec](const Vec& p) {
    return build_twin_beam_with_root_layers(spec, p[0], p[1]);
  };
  Vec p0(2);
  p0 << 1e6, 1e4;
  prob.params0 = p0;
  prob.lower = Vec::Constant(2, 1e3);
  prob.upper = Vec::Constant(2, 1e8);
  ModalData start = solve_modes(prob.factory(p0), 2);
  prob.targets_hz = start.frequencies_hz;
  UpdateOptions opts;
  opts.population = 12;
  opts.generations = 20;
  UpdateResult res = update_parameters(prob, opts);
  CHECK(res.objective <= 1e-12);
  for (int i = 0; i < 2; ++i) {
    CHECK(res.params[i] >= prob.lower[i]);
    CHECK(res.params[i] <= prob.upper[i]);
  }
}

TEST_CASE("updating inverts the closed-form single-DOF spring") {
  double mass = 0.5;
  UpdateProblem prob;
  prob.factory = [mass](const Vec& p) { return grounded_mass_model(mass, p[0]); };
  Vec p0(1);
  p0 << 5e3;
  prob.params0 = p0;
  prob.lower = Vec::Constant(1, 1e2);
  prob.upper = Vec::Constant(1, 1e6);
  double f_target = 42.0;
  prob.targets_hz = Vec::Constant(1, f_target);
  UpdateOptions opts;
  opts.population = 16;
  opts.generations = 60;
  UpdateResult res = update_parameters(prob, opts);
  double k_expected = mass * std::pow(2.0 * M_PI * f_target, 2);
  CHECK(res.params[0] == doctest::Approx(k_expected).epsilon(1e-3));
}

TEST_CASE("updating recovers a reference root-layer stiffness pair") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  auto factory = [spec](const Vec& p) {
    return build_twin_beam_with_root_layers(spec, p[0], p[1]);
  };
  Vec truth(2);
  truth << 4.0e5, 2.5e3;
  ModalData ref = solve_modes(factory(truth), 4);

  UpdateProblem prob;
  prob.factory = factory;
  Vec p0(2);
  p0 << 1e5, 1e3;
  prob.params0 = p0;
  prob.lower = Vec::Constant(2, 1e2);
  prob.upper = Vec::Constant(2, 1e7);
  prob.targets_hz = ref.frequencies_hz;
  UpdateOptions opts;
  opts.population = 24;
  opts.generations = 120;
  UpdateResult res = update_parameters(prob, opts);
  CHECK(res.params[0] == doctest::Approx(truth[0]).epsilon(0.01));
  CHECK(res.params[1] == doctest::Approx(truth[1]).epsilon(0.01));
  CHECK(res.objective < 1e-10);
}

TEST_CASE("updating is deterministic for a fixed seed and monotone vs the start") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  auto factory = [spec](const Vec& p) {
    return build_twin_beam_with_root_layers(spec, p[0], p[1]);
  };
  UpdateProblem prob;
  prob.factory = factory;
  Vec p0(2);
  p0 << 2e5, 2e3;
  prob.params0 = p0;
  prob.lower = Vec::Constant(2, 1e2);
  prob.upper = Vec::Constant(2, 1e7);
  Vec targets(2);
  targets << 25.0, 29.0;
  prob.targets_hz = targets;
  UpdateOptions opts;
  opts.population = 8;
  opts.generations = 10;
  UpdateResult a = update_parameters(prob, opts);
  UpdateResult b = update_parameters(prob, opts);
  CHECK(a.params == b.params);
  CHECK(a.objective <= frequency_objective(prob, p0));
}
