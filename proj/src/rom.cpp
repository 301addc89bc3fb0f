#include "vibeam/rom.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "vibeam/modal.hpp"
#include "vibeam/util.hpp"

namespace vibeam {

namespace {

// Dense row over the free-DOF ordering from a sparse full-DOF functional.
Vec dense_free_row(const SparseRow& row, const std::vector<int>& full_to_free, int n_free) {
  Vec r = Vec::Zero(n_free);
  for (const auto& t : row) {
    int f = full_to_free[t.dof];
    if (f < 0) throw ValidationError("row references a constrained DOF");
    r[f] += t.coeff;
  }
  return r;
}

}  // namespace

TransformedModel boundary_transform(const FEModel& model) {
  model.validate();
  const auto free_idx = model.free_dofs();
  const int n_free = static_cast<int>(free_idx.size());
  std::vector<int> full_to_free(model.n_dofs(), -1);
  for (int i = 0; i < n_free; ++i) full_to_free[free_idx[i]] = i;

  int dims = model.gap_dims();
  for (const auto& pair : model.contact_pairs)
    if (static_cast<int>(pair.gap_rows.size()) != dims)
      throw ValidationError("all contact pairs must share the gap dimension count");
  const int n_pairs = static_cast<int>(model.contact_pairs.size());
  const int n_g = n_pairs * dims;

  // W maps free displacements to [g; abs; untouched]; it must be square.
  std::set<int> touched;
  for (const auto& pair : model.contact_pairs)
    for (const auto& rows : {pair.gap_rows, pair.abs_rows})
      for (const auto& row : rows)
        for (const auto& t : row) {
          int f = full_to_free[t.dof];
          if (f < 0) throw ValidationError("contact pair references a constrained DOF");
          touched.insert(f);
        }
  if (static_cast<int>(touched.size()) != 2 * n_g)
    throw ValidationError("contact pair rows must consume two DOFs per direction "
                          "(duplicate pair usage?)");

  Mat W = Mat::Zero(n_free, n_free);
  int r = 0;
  for (const auto& pair : model.contact_pairs)
    for (const auto& row : pair.gap_rows) W.row(r++) = dense_free_row(row, full_to_free, n_free);
  for (const auto& pair : model.contact_pairs)
    for (const auto& row : pair.abs_rows) W.row(r++) = dense_free_row(row, full_to_free, n_free);
  for (int f = 0; f < n_free; ++f)
    if (!touched.count(f)) W(r++, f) = 1.0;
  if (r != n_free) throw ValidationError("boundary transform is not square");

  Eigen::FullPivLU<Mat> lu(W);
  if (!lu.isInvertible())
    throw ValidationError("boundary transform singular (duplicate pair usage?)");
  Mat T = lu.inverse();

  Mat Mfull = Mat(model.M), Kfull = Mat(model.K);
  Mat Mf(n_free, n_free), Kf(n_free, n_free);
  Vec bf(n_free);
  for (int i = 0; i < n_free; ++i) {
    bf[i] = model.b[free_idx[i]];
    for (int j = 0; j < n_free; ++j) {
      Mf(i, j) = Mfull(free_idx[i], free_idx[j]);
      Kf(i, j) = Kfull(free_idx[i], free_idx[j]);
    }
  }

  TransformedModel tm;
  tm.M = T.transpose() * Mf * T;
  tm.K = T.transpose() * Kf * T;
  tm.M = 0.5 * (tm.M + tm.M.transpose()).eval();
  tm.K = 0.5 * (tm.K + tm.K.transpose()).eval();
  tm.n_g = n_g;
  tm.dims_per_pair = dims;
  tm.n_pairs = n_pairs;
  tm.recovery = T;
  Vec b_new = W * bf;  // displacement patterns transform with W
  tm.b_inner = b_new.tail(n_free - n_g);

  tm.observer_names.reserve(model.observers.size());
  tm.observer_rows = Mat::Zero(model.observers.size(), n_free);
  for (std::size_t o = 0; o < model.observers.size(); ++o) {
    tm.observer_names.push_back(model.observers[o].name);
    tm.observer_rows.row(o) =
        dense_free_row(model.observers[o].row, full_to_free, n_free).transpose() * T;
  }
  for (const auto& pair : model.contact_pairs) tm.frames.push_back(pair.frame);
  return tm;
}

ReducedModel macneal_reduce(const TransformedModel& tm, int n_modes) {
  const int n_free = static_cast<int>(tm.K.rows());
  const int n_g = tm.n_g;
  if (n_g < 1) throw ValidationError("model has no contact pairs to retain as boundary");
  if (n_modes < 1 || n_modes > n_free - n_g)
    throw ValidationError("retained mode count must lie in [1, n_free - n_g]");

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(tm.K, tm.M,
                                                    Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (eig.info() != Eigen::Success) throw NumericalError("free-interface eigensolve failed");
  Vec all_omega_sq = eig.eigenvalues();
  if (all_omega_sq[0] <= 1e-12 * all_omega_sq[n_free - 1])
    throw NumericalError("rigid-body modes present; the model must be grounded");
  Vec omega_sq = all_omega_sq.head(n_modes);
  Mat phi = eig.eigenvectors().leftCols(n_modes);

  // static flexibility at the boundary
  Eigen::LLT<Mat> kchol(tm.K);
  if (kchol.info() != Eigen::Success)
    throw NumericalError("constrained stiffness not positive definite");
  Mat rhs = Mat::Zero(n_free, n_g);
  rhs.topRows(n_g).setIdentity();
  Mat X = kchol.solve(rhs);

  Mat phi_g = phi.topRows(n_g);
  Mat lam_inv = omega_sq.cwiseInverse().asDiagonal();
  Mat G_res = X.topRows(n_g) - phi_g * lam_inv * phi_g.transpose();
  G_res = 0.5 * (G_res + G_res.transpose()).eval();

  Eigen::LLT<Mat> gchol(G_res);
  if (gchol.info() != Eigen::Success)
    throw NumericalError("ill-conditioned residual flexibility; retain fewer modes");

  ReducedModel rom;
  rom.K_gg = gchol.solve(Mat::Identity(n_g, n_g));
  rom.K_gg = 0.5 * (rom.K_gg + rom.K_gg.transpose()).eval();
  rom.K_ge = -gchol.solve(phi_g);
  rom.K_ee = Mat(omega_sq.asDiagonal()) + phi_g.transpose() * (-rom.K_ge);
  rom.K_ee = 0.5 * (rom.K_ee + rom.K_ee.transpose()).eval();
  rom.D_ee = Vec::Zero(n_modes);
  rom.omega = omega_sq.cwiseSqrt();
  rom.phi_g = phi_g;

  // modal excitation from the inner mass distribution
  const int n_i = n_free - n_g;
  Mat M_ii = tm.M.bottomRightCorner(n_i, n_i);
  Mat phi_i = phi.bottomRows(n_i);
  rom.beta = phi_i.transpose() * (M_ii * tm.b_inner);

  // component-mode recovery: residual flexibility columns for g, mode shapes
  // corrected by their residual content for eta
  Mat psi_res = X - phi * lam_inv * phi_g.transpose();
  Mat Wg = psi_res * rom.K_gg;
  Mat Pe = phi - psi_res * gchol.solve(phi_g);
  Mat R_cms(n_free, n_g + n_modes);
  R_cms << Wg, Pe;
  rom.R = tm.observer_rows * R_cms;
  rom.observer_names = tm.observer_names;

  rom.n_pairs = tm.n_pairs;
  rom.dims_per_pair = tm.dims_per_pair;
  rom.frames = tm.frames;
  rom.g0 = Vec::Zero(tm.n_pairs);
  return rom;
}

Vec recover_outputs(const ReducedModel& rom, const Vec& g, const Vec& eta) {
  if (g.size() != rom.n_g() || eta.size() != rom.n_modes())
    throw ValidationError("recover_outputs dimension mismatch");
  Vec z(g.size() + eta.size());
  z << g, eta;
  return rom.R * z;
}

Eigen::VectorXcd linear_harmonic_response(const ReducedModel& rom, double omega_exc) {
  using Cplx = std::complex<double>;
  const int ne = rom.n_modes();
  Eigen::LLT<Mat> kgg(rom.K_gg);
  Mat slave = -kgg.solve(rom.K_ge);  // g = slave * eta when no contact force acts
  Mat k_cond = rom.K_ee + rom.K_ge.transpose() * slave;
  Eigen::MatrixXcd A = (-omega_exc * omega_exc) * Mat::Identity(ne, ne) + k_cond;
  A += Cplx(0.0, omega_exc) * Mat(rom.D_ee.asDiagonal());
  // base acceleration -Omega^2 sin(Omega t) forces +beta*Omega^2 sin(Omega t)
  Eigen::VectorXcd eta_hat = A.lu().solve((omega_exc * omega_exc * rom.beta).cast<Cplx>());
  Eigen::VectorXcd z(rom.n_g() + ne);
  z << slave.cast<Cplx>() * eta_hat, eta_hat;
  return rom.R.cast<Cplx>() * z;
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
  if (j.empty()) return Mat(0, 0);
  Mat m(j.size(), j[0].size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void save_reduced_model(const std::string& path, const ReducedModel& rom) {
  nlohmann::json j;
  j["format"] = "vibeam-rom";
  j["version"] = 1;
  j["n_pairs"] = rom.n_pairs;
  j["dims_per_pair"] = rom.dims_per_pair;
  j["observer_names"] = rom.observer_names;
  j["K_gg"] = mat_to_json(rom.K_gg);
  j["K_ge"] = mat_to_json(rom.K_ge);
  j["K_ee"] = mat_to_json(rom.K_ee);
  j["D_ee"] = vec_to_json(rom.D_ee);
  j["beta"] = vec_to_json(rom.beta);
  j["R"] = mat_to_json(rom.R);
  j["omega"] = vec_to_json(rom.omega);
  j["phi_g"] = mat_to_json(rom.phi_g);
  j["g0"] = vec_to_json(rom.g0);
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : rom.frames) frames.push_back(mat_to_json(f));
  j["frames"] = frames;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(1) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

ReducedModel load_reduced_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "vibeam-rom" || j.value("version", 0) != 1)
    throw ValidationError("unsupported reduced model archive: " + path);
  ReducedModel rom;
  rom.n_pairs = j["n_pairs"].get<int>();
  rom.dims_per_pair = j["dims_per_pair"].get<int>();
  rom.observer_names = j["observer_names"].get<std::vector<std::string>>();
  rom.K_gg = mat_from_json(j["K_gg"]);
  rom.K_ge = mat_from_json(j["K_ge"]);
  rom.K_ee = mat_from_json(j["K_ee"]);
  rom.D_ee = vec_from_json(j["D_ee"]);
  rom.beta = vec_from_json(j["beta"]);
  rom.R = mat_from_json(j["R"]);
  rom.omega = vec_from_json(j["omega"]);
  rom.phi_g = mat_from_json(j["phi_g"]);
  rom.g0 = vec_from_json(j["g0"]);
  for (const auto& f : j["frames"]) rom.frames.push_back(mat_from_json(f));
  return rom;
}

}  // namespace vibeam
