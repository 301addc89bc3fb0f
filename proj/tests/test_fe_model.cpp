#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vibeam/matrix_io.hpp"
#include "vibeam/modal.hpp"
#include "vibeam/twin_beam.hpp"
#include "vibeam/util.hpp"

using namespace vibeam;
namespace fs = std::filesystem;

namespace {

FEModel tiny_two_dof_model() {
  FEModel m;
  m.dofs = {{0, "w"}, {1, "w"}};
  std::vector<Triplet> mt = {{0, 0, 1.0}, {1, 1, 1.0}};
  std::vector<Triplet> kt = {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}};
  m.M.resize(2, 2);
  m.M.setFromTriplets(mt.begin(), mt.end());
  m.K.resize(2, 2);
  m.K.setFromTriplets(kt.begin(), kt.end());
  m.b = Vec::Zero(2);
  return m;
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("vibeam_test_" + tag);
  fs::create_directories(dir);
  return dir;
}

double max_asymmetry(const SpMat& A) {
  Mat d = Mat(A) - Mat(A).transpose();
  return d.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("smallest well-posed system loads and validates") {
  auto dir = temp_dir("load_tiny");
  FEModel m = tiny_two_dof_model();
  save_fe_matrices((dir / "M.mtx").string(), (dir / "K.mtx").string(),
                   (dir / "meta.txt").string(), m);
  FEModel loaded = load_fe_matrices((dir / "M.mtx").string(), (dir / "K.mtx").string(),
                                    (dir / "meta.txt").string());
  CHECK(loaded.n_dofs() == 2);
  CHECK(Mat(loaded.K)(0, 1) == -1.0);
  CHECK(Mat(loaded.M)(0, 0) == 1.0);
}

TEST_CASE("asymmetric stiffness beyond tolerance is rejected") {
  auto dir = temp_dir("asym");
  FEModel m = tiny_two_dof_model();
  save_fe_matrices((dir / "M.mtx").string(), (dir / "K.mtx").string(),
                   (dir / "meta.txt").string(), m);
  {
    std::ofstream bad(dir / "K_bad.mtx");
    bad << "%%MatrixMarket matrix coordinate real general\n";
    bad << "2 2 4\n";
    bad << "1 1 2.0\n1 2 -1.001\n2 1 -1.0\n2 2 2.0\n";  // relative asymmetry ~5e-4
  }
  CHECK_THROWS_AS(load_fe_matrices((dir / "M.mtx").string(), (dir / "K_bad.mtx").string(),
                                   (dir / "meta.txt").string()),
                  ValidationError);
}

TEST_CASE("twin-beam file set round-trips bit-identically") {
  auto dir = temp_dir("roundtrip");
  TwinBeamSpec spec;
  spec.n_elements = 8;
  FEModel m = build_twin_beam_model(spec);
  auto pm = (dir / "M.mtx").string(), pk = (dir / "K.mtx").string(),
       pmeta = (dir / "meta.txt").string();
  save_fe_matrices(pm, pk, pmeta, m);
  FEModel loaded = load_fe_matrices(pm, pk, pmeta);
  auto pm2 = (dir / "M2.mtx").string(), pk2 = (dir / "K2.mtx").string(),
       pmeta2 = (dir / "meta2.txt").string();
  save_fe_matrices(pm2, pk2, pmeta2, loaded);
  CHECK(hash_file_hex(pm) == hash_file_hex(pm2));
  CHECK(hash_file_hex(pk) == hash_file_hex(pk2));
  CHECK(hash_file_hex(pmeta) == hash_file_hex(pmeta2));
}

TEST_CASE("default twin beam puts the upper fundamental about 10% high") {
  FEModel m = build_twin_beam_model({});
  ModalData modes = solve_modes(m, 2);
  double ratio = modes.frequencies_hz[1] / modes.frequencies_hz[0];
  CHECK(ratio > 1.08);
  CHECK(ratio < 1.12);
}

TEST_CASE("taper ratio one gives identical beams") {
  TwinBeamSpec spec;
  spec.taper_ratio = 1.0;
  spec.n_elements = 16;
  FEModel m = build_twin_beam_model(spec);
  ModalData modes = solve_modes(m, 2);
  CHECK(modes.frequencies_hz[1] / modes.frequencies_hz[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("uniform cantilever fundamental matches the closed-form value") {
  TwinBeamSpec spec;  // lower beam is uniform
  FEModel m = build_twin_beam_model(spec);
  ModalData modes = solve_modes(m, 1);
  double I = spec.width * std::pow(spec.thickness, 3) / 12.0;
  double rhoA = spec.density * spec.width * spec.thickness;
  double lam = 1.875104068711961;
  double f_exact = lam * lam *
                   std::sqrt(spec.youngs_modulus * I / (rhoA * std::pow(spec.length, 4))) /
                   (2.0 * M_PI);
  CHECK(modes.frequencies_hz[0] == doctest::Approx(f_exact).epsilon(0.01));
}

TEST_CASE("vanishing layer stiffness leaves frequencies unchanged") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  FEModel m = build_twin_beam_model(spec);
  ModalData before = solve_modes(m, 4);
  ElasticLayer layer;
  layer.k_n = 1e-12;
  layer.k_t = 1e-12;
  layer.attachments = {{4, -1}};
  FEModel m2 = attach_elastic_layers(m, {layer});
  ModalData after = solve_modes(m2, 4);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(after.frequencies_hz[i] - before.frequencies_hz[i]) /
              before.frequencies_hz[i] <
          1e-9);
}

TEST_CASE("stiff grounding layer pins the DOF") {
  // one node carrying (w, theta), unit base stiffness, huge grounding springs
  FEModel m;
  m.dofs = {{0, "w"}, {0, "theta"}};
  std::vector<Triplet> kt = {{0, 0, 1.0}, {1, 1, 1.0}};
  std::vector<Triplet> mt = {{0, 0, 1.0}, {1, 1, 1.0}};
  m.K.resize(2, 2);
  m.K.setFromTriplets(kt.begin(), kt.end());
  m.M.resize(2, 2);
  m.M.setFromTriplets(mt.begin(), mt.end());
  m.b = Vec::Zero(2);
  ElasticLayer layer;
  layer.k_n = 1e12;
  layer.k_t = 1e12;
  layer.attachments = {{0, -1}};
  FEModel stiffened = attach_elastic_layers(m, {layer});
  // static deflection under unit load
  Mat K = Mat(stiffened.K);
  Vec u = K.ldlt().solve(Vec::Ones(2));
  CHECK(std::abs(u[0]) < 1e-11);
}

TEST_CASE("single DOF grounded by a layer has the exact spring frequency") {
  double mass = 2.5, kn = 3.7e4;
  FEModel m;
  m.dofs = {{0, "w"}, {0, "theta"}};
  std::vector<Triplet> mt = {{0, 0, mass}, {1, 1, 1e-6}};
  m.M.resize(2, 2);
  m.M.setFromTriplets(mt.begin(), mt.end());
  m.K.resize(2, 2);
  m.K.setZero();
  m.b = Vec::Zero(2);
  ElasticLayer layer;
  layer.k_n = kn;
  layer.k_t = 1e9;  // parks the rotation far above
  layer.attachments = {{0, -1}};
  FEModel grounded = attach_elastic_layers(m, {layer});
  ModalData modes = solve_modes(grounded, 1);
  CHECK(modes.frequencies_hz[0] ==
        doctest::Approx(std::sqrt(kn / mass) / (2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("point masses: zero mass is a no-op, tip mass lowers the fundamental") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  FEModel m = build_twin_beam_model(spec);
  FEModel same = apply_point_masses(m, {{3, 0.0}});
  CHECK(max_asymmetry(same.M) == 0.0);
  CHECK((Mat(same.M) - Mat(m.M)).cwiseAbs().maxCoeff() == 0.0);

  ModalData before = solve_modes(m, 1);
  FEModel heavier = apply_point_masses(m, {{spec.n_elements, 0.05}});  // lower beam tip node
  ModalData after = solve_modes(heavier, 1);
  CHECK(after.frequencies_hz[0] < before.frequencies_hz[0]);
}

TEST_CASE("tip mass frequency matches the effective-mass formula") {
  TwinBeamSpec spec;
  spec.n_elements = 64;
  spec.taper_ratio = 1.0;
  double tip_mass = 0.08;
  spec.tip_mass = tip_mass;
  FEModel m = build_twin_beam_model(spec);
  ModalData modes = solve_modes(m, 1);
  double I = spec.width * std::pow(spec.thickness, 3) / 12.0;
  double rhoA = spec.density * spec.width * spec.thickness;
  double f_formula = std::sqrt(3.0 * spec.youngs_modulus * I /
                               ((tip_mass + 0.2357 * rhoA * spec.length) *
                                std::pow(spec.length, 3))) /
                     (2.0 * M_PI);
  CHECK(modes.frequencies_hz[0] == doctest::Approx(f_formula).epsilon(0.02));
}

TEST_CASE("mutations preserve exact symmetry and the selector stays clean") {
  TwinBeamSpec spec;
  spec.n_elements = 8;
  FEModel m = build_twin_beam_model(spec);
  ElasticLayer layer;
  layer.k_n = 1e5;
  layer.k_t = 1e3;
  layer.attachments = {{2, -1}, {4, 11}};
  FEModel m2 = attach_elastic_layers(m, {layer});
  FEModel m3 = apply_point_masses(m2, {{5, 0.01}});
  CHECK(max_asymmetry(m3.K) == 0.0);
  CHECK(max_asymmetry(m3.M) == 0.0);
  auto mask = m3.constrained_mask();
  for (int i = 0; i < m3.n_dofs(); ++i)
    if (m3.b[i] != 0.0) CHECK_FALSE(mask[i]);
}

TEST_CASE("degenerate geometry and bad layers are rejected") {
  TwinBeamSpec spec;
  spec.width = 0.0;
  CHECK_THROWS_AS(build_twin_beam_model(spec), ValidationError);
  TwinBeamSpec spec2;
  spec2.n_elements = 2;
  CHECK_THROWS_AS(build_twin_beam_model(spec2), ValidationError);

  FEModel m = build_twin_beam_model({});
  ElasticLayer on_clamp;
  on_clamp.k_n = 1.0;
  on_clamp.k_t = 1.0;
  on_clamp.attachments = {{0, -1}};  // root node is constrained
  CHECK_THROWS_AS(attach_elastic_layers(m, {on_clamp}), ValidationError);
  CHECK_THROWS_AS(apply_point_masses(m, {{3, -1.0}}), ValidationError);
}
