#include "vibeam/matrix_io.hpp"

#include <fstream>
#include <sstream>

#include "vibeam/util.hpp"

namespace vibeam {

void write_matrix_market(const std::string& path, const SpMat& A) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  std::vector<Triplet> lower;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (it.row() >= it.col() && it.value() != 0.0)
        lower.emplace_back(it.row(), it.col(), it.value());
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << A.rows() << " " << A.cols() << " " << lower.size() << "\n";
  for (const auto& t : lower)
    out << t.row() + 1 << " " << t.col() + 1 << " " << format_double(t.value()) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

SpMat read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  bool symmetric = false;
  if (!std::getline(in, line)) throw ValidationError("empty matrix file: " + path);
  if (line.rfind("%%MatrixMarket", 0) == 0) {
    if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
      throw ValidationError("unsupported Matrix Market flavor in " + path);
    symmetric = line.find("symmetric") != std::string::npos;
    while (in.peek() == '%') std::getline(in, line);
    std::getline(in, line);
  }
  std::istringstream head(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(head >> rows >> cols >> nnz)) throw ValidationError("bad size line in " + path);
  if (rows <= 0 || cols <= 0 || rows != cols)
    throw ValidationError("matrix must be square: " + path);
  std::vector<Triplet> trips;
  trips.reserve(symmetric ? 2 * nnz : nnz);
  for (long i = 0; i < nnz; ++i) {
    long r, c;
    double v;
    if (!(in >> r >> c >> v)) throw ValidationError("truncated matrix data in " + path);
    trips.emplace_back(r - 1, c - 1, v);
    if (symmetric && r != c) trips.emplace_back(c - 1, r - 1, v);
  }
  SpMat A(rows, cols);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

namespace {

void write_row(std::ostream& out, const SparseRow& row) {
  for (const auto& t : row) out << " " << t.dof << ":" << format_double(t.coeff);
}

SparseRow parse_row(std::istringstream& in, const std::string& path) {
  SparseRow row;
  std::string item;
  while (in >> item) {
    auto pos = item.find(':');
    if (pos == std::string::npos) throw ValidationError("bad dof:coeff term in " + path);
    row.push_back({std::stoi(item.substr(0, pos)), std::stod(item.substr(pos + 1))});
  }
  return row;
}

}  // namespace

void write_model_metadata(const std::string& path, const FEModel& model) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "format = vibeam-model 1\n";
  out << "ndof = " << model.n_dofs() << "\n";
  for (int i = 0; i < model.n_dofs(); ++i)
    out << "dof " << i << " " << model.dofs[i].node << " " << model.dofs[i].label << "\n";
  out << "constrained =";
  for (int c : model.constrained_dofs) out << " " << c;
  out << "\n";
  out << "b =";
  for (int i = 0; i < model.n_dofs(); ++i)
    if (model.b[i] == 1.0) out << " " << i;
  out << "\n";
  for (std::size_t p = 0; p < model.contact_pairs.size(); ++p) {
    const auto& pair = model.contact_pairs[p];
    out << "pair " << p << " " << pair.node_a << " " << pair.node_b << " "
        << pair.gap_rows.size() << "\n";
    for (int d = 0; d < static_cast<int>(pair.gap_rows.size()); ++d) {
      out << "frame " << p << " " << d;
      for (int j = 0; j < pair.frame.cols(); ++j) out << " " << format_double(pair.frame(d, j));
      out << "\n";
      out << "gap_row " << p << " " << d;
      write_row(out, pair.gap_rows[d]);
      out << "\n";
      out << "abs_row " << p << " " << d;
      write_row(out, pair.abs_rows[d]);
      out << "\n";
    }
  }
  for (const auto& pm : model.point_masses)
    out << "point_mass " << pm.node << " " << format_double(pm.mass) << "\n";
  for (const auto& obs : model.observers) {
    out << "observer " << obs.name;
    write_row(out, obs.row);
    out << "\n";
  }
  if (!out) throw ValidationError("write failed: " + path);
}

namespace {

FEModel read_model_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  FEModel model;
  std::string line;
  int ndof = -1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      std::string eq, name, ver;
      ss >> eq >> name >> ver;
      if (name != "vibeam-model" || ver != "1")
        throw ValidationError("unsupported metadata format in " + path);
    } else if (key == "ndof") {
      std::string eq;
      ss >> eq >> ndof;
      model.dofs.resize(ndof);
      model.b = Vec::Zero(ndof);
    } else if (key == "dof") {
      int i, node;
      std::string label;
      ss >> i >> node >> label;
      if (i < 0 || i >= ndof) throw ValidationError("dof index out of range in " + path);
      model.dofs[i] = {node, label};
    } else if (key == "constrained") {
      std::string eq;
      ss >> eq;
      int c;
      while (ss >> c) model.constrained_dofs.push_back(c);
    } else if (key == "b") {
      std::string eq;
      ss >> eq;
      int i;
      while (ss >> i) {
        if (i < 0 || i >= ndof) throw ValidationError("b index out of range in " + path);
        model.b[i] = 1.0;
      }
    } else if (key == "pair") {
      std::size_t p;
      int na, nb, dims;
      ss >> p >> na >> nb >> dims;
      if (p != model.contact_pairs.size()) throw ValidationError("pair indices must be sequential");
      ContactPair pair;
      pair.node_a = na;
      pair.node_b = nb;
      pair.frame = Mat::Zero(dims, 3);
      pair.gap_rows.resize(dims);
      pair.abs_rows.resize(dims);
      model.contact_pairs.push_back(pair);
    } else if (key == "frame") {
      std::size_t p;
      int d;
      ss >> p >> d;
      auto& pair = model.contact_pairs.at(p);
      for (int j = 0; j < 3; ++j) ss >> pair.frame(d, j);
    } else if (key == "gap_row") {
      std::size_t p;
      int d;
      ss >> p >> d;
      model.contact_pairs.at(p).gap_rows.at(d) = parse_row(ss, path);
    } else if (key == "abs_row") {
      std::size_t p;
      int d;
      ss >> p >> d;
      model.contact_pairs.at(p).abs_rows.at(d) = parse_row(ss, path);
    } else if (key == "point_mass") {
      PointMass pm;
      ss >> pm.node >> pm.mass;
      model.point_masses.push_back(pm);
    } else if (key == "observer") {
      Observer obs;
      ss >> obs.name;
      obs.row = parse_row(ss, path);
      model.observers.push_back(obs);
    } else {
      throw ValidationError("unknown metadata key '" + key + "' in " + path);
    }
  }
  if (ndof < 0) throw ValidationError("metadata missing ndof: " + path);
  return model;
}

}  // namespace

FEModel load_fe_matrices(const std::string& path_m, const std::string& path_k,
                         const std::string& metadata_path) {
  FEModel model = read_model_metadata(metadata_path);
  model.M = read_matrix_market(path_m);
  model.K = read_matrix_market(path_k);
  if (model.M.rows() != model.K.rows())
    throw ValidationError("M and K dimensions differ");
  if (model.M.rows() != model.n_dofs())
    throw ValidationError("matrix dimension does not match metadata ndof");
  double asym_m = symmetrize(model.M);
  double asym_k = symmetrize(model.K);
  if (asym_m > 1e-8 || asym_k > 1e-8) {
    std::ostringstream msg;
    msg << "matrix asymmetry beyond tolerance (M: " << asym_m << ", K: " << asym_k << ")";
    throw ValidationError(msg.str());
  }
  model.validate();
  return model;
}

void save_fe_matrices(const std::string& path_m, const std::string& path_k,
                      const std::string& metadata_path, const FEModel& model) {
  write_matrix_market(path_m, model.M);
  write_matrix_market(path_k, model.K);
  write_model_metadata(metadata_path, model);
}

}  // namespace vibeam
