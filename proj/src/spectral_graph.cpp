#include "mrn/spectral_graph.hpp"

#include "mrn/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mrn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

struct ComplementSpectrum {
  MatrixXd basis;       // n x (n-1)
  VectorXd values;      // ascending
  MatrixXd vectors;     // (n-1) x (n-1), columns match values
};

ComplementSpectrum complement_spectrum(const MatrixXd& M) {
  const auto n = static_cast<std::size_t>(M.rows());
  ComplementSpectrum out;
  out.basis = ones_complement_basis(n);
  MatrixXd reduced = out.basis.transpose() * M * out.basis;
  reduced = 0.5 * (reduced + reduced.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(reduced);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge");
  }
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

void require_square(const MatrixXd& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw ShapeMismatch(std::string(what) + ": matrix is not square");
  }
}

}  // namespace

WeightedGraph::WeightedGraph(std::size_t node_count, std::vector<Edge> edges)
    : n_(node_count), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i == e.j) {
      throw InvalidGraph("self-loop at node " + std::to_string(e.i));
    }
    if (e.i >= n_ || e.j >= n_) {
      throw InvalidGraph("edge endpoint out of range");
    }
    if (!(e.w >= 0.0 && e.w <= 1.0)) {
      throw InvalidGraph("edge weight outside [0, 1]");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j) {
      throw InvalidGraph("duplicate edge (" + std::to_string(edges_[k].i) + ", " +
                         std::to_string(edges_[k].j) + ")");
    }
  }
}

std::optional<double> WeightedGraph::weight(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                             [](const Edge& e, const std::pair<std::size_t, std::size_t>& key) {
                               return std::tie(e.i, e.j) < std::tie(key.first, key.second);
                             });
  if (it != edges_.end() && it->i == i && it->j == j) return it->w;
  return std::nullopt;
}

std::vector<std::pair<std::size_t, double>> WeightedGraph::incident(std::size_t i) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& e : edges_) {
    if (e.i == i) out.emplace_back(e.j, e.w);
    if (e.j == i) out.emplace_back(e.i, e.w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double WeightedGraph::weighted_degree(std::size_t i) const {
  double d = 0.0;
  for (const auto& [j, w] : incident(i)) d += w;
  return d;
}

WeightedGraph WeightedGraph::without_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  std::vector<Edge> kept;
  kept.reserve(edges_.size());
  bool found = false;
  for (const auto& e : edges_) {
    if (e.i == i && e.j == j) {
      found = true;
      continue;
    }
    kept.push_back(e);
  }
  if (!found) {
    throw NoSuchEdge("no edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return WeightedGraph(n_, std::move(kept));
}

WeightedGraph WeightedGraph::without_node_links(std::size_t i) const {
  if (i >= n_) throw NoSuchNode("node " + std::to_string(i) + " out of range");
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (e.i != i && e.j != i) kept.push_back(e);
  }
  return WeightedGraph(n_, std::move(kept));
}

WeightedGraph WeightedGraph::induced(std::span<const std::size_t> nodes) const {
  std::vector<std::size_t> relabel(n_, n_);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= n_) throw NoSuchNode("node " + std::to_string(nodes[k]) + " out of range");
    relabel[nodes[k]] = k;
  }
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (relabel[e.i] != n_ && relabel[e.j] != n_) {
      kept.push_back({relabel[e.i], relabel[e.j], e.w});
    }
  }
  return WeightedGraph(nodes.size(), std::move(kept));
}

std::vector<std::vector<std::size_t>> WeightedGraph::components() const {
  UnionFind uf(n_);
  for (const auto& e : edges_) {
    if (e.w > 0.0) uf.unite(e.i, e.j);
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n_, n_);
  for (std::size_t v = 0; v < n_; ++v) {
    const auto root = uf.find(v);
    if (slot[root] == n_) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(v);
  }
  return groups;
}

LaplacianMatrix::LaplacianMatrix(MatrixXd entries) : m_(std::move(entries)) {
  require_square(m_, "LaplacianMatrix");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (Index r = 0; r < m_.rows(); ++r) {
    if (std::abs(m_.row(r).sum()) > 1e-9 * scale) {
      throw ShapeMismatch("LaplacianMatrix: row sums must vanish");
    }
    for (Index c = 0; c < m_.cols(); ++c) {
      if (std::abs(m_(r, c) - m_(c, r)) > 1e-12 * scale) {
        throw ShapeMismatch("LaplacianMatrix: matrix is not symmetric");
      }
      if (r != c && m_(r, c) > 0.0) {
        throw ShapeMismatch("LaplacianMatrix: positive off-diagonal entry");
      }
    }
  }
}

LaplacianMatrix build_laplacian(const WeightedGraph& g) {
  const auto n = idx(g.node_count());
  MatrixXd L = MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    L(idx(e.i), idx(e.j)) -= e.w;
    L(idx(e.j), idx(e.i)) -= e.w;
    L(idx(e.i), idx(e.i)) += e.w;
    L(idx(e.j), idx(e.j)) += e.w;
  }
  return LaplacianMatrix(std::move(L), LaplacianMatrix::Unchecked{});
}

MatrixXd ones_complement_basis(std::size_t n) {
  if (n < 2) throw ShapeMismatch("complement of the ones vector needs n >= 2");
  const auto N = idx(n);
  // Householder reflector H with H e_1 = 1/sqrt(n); its other columns span 1-perp.
  VectorXd v = VectorXd::Constant(N, 1.0 / std::sqrt(static_cast<double>(n)));
  v(0) -= 1.0;
  const double vv = v.squaredNorm();
  MatrixXd H = MatrixXd::Identity(N, N);
  if (vv > 0.0) H -= (2.0 / vv) * v * v.transpose();
  return H.rightCols(N - 1);
}

MatrixXd centering_matrix(std::size_t n) {
  const auto N = idx(n);
  return MatrixXd::Identity(N, N) - MatrixXd::Constant(N, N, 1.0 / static_cast<double>(n));
}

double min_eigenvalue_on_complement(const MatrixXd& M) {
  require_square(M, "min_eigenvalue_on_complement");
  return complement_spectrum(M).values(0);
}

namespace {

// Columns: orthonormal basis (in R^n) of the eigenspace for the smallest
// eigenvalue on 1-perp.
MatrixXd lowest_cluster(const ComplementSpectrum& cs, double cluster_tol) {
  const double lo = cs.values(0);
  Index k = 1;
  while (k < cs.values.size() &&
         cs.values(k) - lo <= cluster_tol * std::max(1.0, std::abs(lo))) {
    ++k;
  }
  return cs.basis * cs.vectors.leftCols(k);
}

VectorXd canonical_vector(const MatrixXd& space) {
  if (space.cols() == 1) {
    VectorXd u = space.col(0).normalized();
    for (Index r = 0; r < u.size(); ++r) {
      if (std::abs(u(r)) > 1e-12) {
        if (u(r) < 0.0) u = -u;
        break;
      }
    }
    return u;
  }
  for (Index r = 0; r < space.rows(); ++r) {
    VectorXd proj = space * space.row(r).transpose();
    if (proj.norm() > 1e-8) return proj.normalized();
  }
  return space.col(0).normalized();
}

}  // namespace

SpectralResult algebraic_connectivity(const LaplacianMatrix& L) {
  if (L.size() < 2) {
    throw ShapeMismatch("algebraic connectivity needs at least two nodes");
  }
  const auto cs = complement_spectrum(L.matrix());
  SpectralResult out;
  out.lambda2 = std::max(0.0, cs.values(0));
  out.fiedler = canonical_vector(lowest_cluster(cs, 1e-8));
  out.spectrum.resize(cs.values.size() + 1);
  out.spectrum(0) = 0.0;
  out.spectrum.tail(cs.values.size()) = cs.values;
  std::sort(out.spectrum.begin(), out.spectrum.end());
  out.full_spectrum_available = true;
  return out;
}

SpectralResult algebraic_connectivity(const WeightedGraph& g) {
  return algebraic_connectivity(build_laplacian(g));
}

MatrixXd fiedler_eigenspace(const LaplacianMatrix& L, double cluster_tol) {
  if (L.size() < 2) {
    throw ShapeMismatch("algebraic connectivity needs at least two nodes");
  }
  return lowest_cluster(complement_spectrum(L.matrix()), cluster_tol);
}

bool edm_validity(const MatrixXd& D) {
  require_square(D, "edm_validity");
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ShapeMismatch("edm_validity: matrix is not symmetric");
  }
  if (D.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ShapeMismatch("edm_validity: matrix is not hollow");
  }
  if (D.rows() < 2) return true;
  const auto n = static_cast<std::size_t>(D.rows());
  const MatrixXd C = centering_matrix(n);
  MatrixXd G = -C * D * C;
  G = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(G, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge");
  }
  return es.eigenvalues()(0) >= -kPsdTolerance;
}

LaplacianMatrix perturbed_laplacian_link(const LaplacianMatrix& L, std::size_t i,
                                         std::size_t j, double w) {
  const auto n = L.size();
  if (i >= n || j >= n || i == j) {
    throw NoSuchEdge("no edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  const double stored = -L(i, j);
  if (!(stored > 0.0) || std::abs(stored - w) > 1e-12) {
    throw NoSuchEdge("no edge (" + std::to_string(i) + ", " + std::to_string(j) +
                     ") with the given weight");
  }
  VectorXd a = VectorXd::Zero(idx(n));
  a(idx(i)) = 1.0;
  a(idx(j)) = -1.0;
  MatrixXd out = L.matrix() - w * a * a.transpose();
  // Cancel the rounding residue so the removed entries are exactly zero.
  out(idx(i), idx(j)) = 0.0;
  out(idx(j), idx(i)) = 0.0;
  return LaplacianMatrix(std::move(out), LaplacianMatrix::Unchecked{});
}

LaplacianMatrix perturbed_laplacian_node(
    const LaplacianMatrix& L, std::size_t i,
    std::span<const std::pair<std::size_t, double>> incident_weights) {
  const auto n = L.size();
  if (i >= n) throw NoSuchNode("node " + std::to_string(i) + " out of range");
  LaplacianMatrix out = L;
  for (const auto& [j, w] : incident_weights) {
    out = perturbed_laplacian_link(out, i, j, w);
  }
  out.m_(idx(i), idx(i)) = 0.0;
  return out;
}

LaplacianMatrix perturbed_laplacian_node(const LaplacianMatrix& L, const WeightedGraph& g,
                                         std::size_t i) {
  if (i >= g.node_count()) throw NoSuchNode("node " + std::to_string(i) + " out of range");
  std::vector<std::pair<std::size_t, double>> inc;
  for (const auto& [j, w] : g.incident(i)) {
    if (w > 0.0) inc.emplace_back(j, w);
  }
  return perturbed_laplacian_node(L, i, inc);
}

WeightedGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Edge> edges;
  std::optional<std::size_t> declared;
  std::size_t max_index = 0;
  bool any = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "n") {
      std::size_t count = 0;
      if (!(ls >> count)) {
        throw ParseError("line " + std::to_string(lineno) + ": expected node count after 'n'");
      }
      declared = count;
      continue;
    }
    Edge e;
    std::istringstream fs(first);
    if (!(fs >> e.i) || !(ls >> e.j >> e.w)) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'i j w'");
    }
    std::string extra;
    if (ls >> extra) {
      throw ParseError("line " + std::to_string(lineno) + ": trailing tokens");
    }
    max_index = std::max({max_index, e.i, e.j});
    any = true;
    edges.push_back(e);
  }
  const std::size_t n = declared ? *declared : (any ? max_index + 1 : 0);
  return WeightedGraph(n, std::move(edges));
}

std::string format_edge_list(const WeightedGraph& g) {
  std::ostringstream out;
  out.precision(17);
  out << "n " << g.node_count() << "\n";
  for (const auto& e : g.edges()) out << e.i << ' ' << e.j << ' ' << e.w << "\n";
  return out.str();
}

WeightedGraph parse_graph_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& row : j.at("edges")) {
      if (!row.is_array() || row.size() != 3) {
        throw ParseError("graph JSON: each edge must be [i, j, w]");
      }
      edges.push_back({row[0].get<std::size_t>(), row[1].get<std::size_t>(),
                       row[2].get<double>()});
    }
    return WeightedGraph(n, std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

std::string format_graph_json(const WeightedGraph& g) {
  nlohmann::json j;
  j["n"] = g.node_count();
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) j["edges"].push_back({e.i, e.j, e.w});
  return j.dump();
}

WeightedGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_graph_json(text);
  return parse_edge_list(text);
}

}  // namespace mrn
