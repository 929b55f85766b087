// Weighted undirected graphs and their Laplacian spectra.
//
// Everything here is a value type or a pure function. Graphs are small
// (tens of nodes), so every spectral query goes through a dense symmetric
// eigendecomposition.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mrn {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph with link strengths in [0, 1].
///
/// Edges are stored once with i < j, sorted lexicographically. Construction
/// normalizes (j, i) to (i, j) and throws InvalidGraph on self-loops,
/// duplicates, out-of-range endpoints or weights outside [0, 1].
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t node_count, std::vector<Edge> edges = {});

  std::size_t node_count() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<double> weight(std::size_t i, std::size_t j) const;
  bool has_edge(std::size_t i, std::size_t j) const { return weight(i, j).has_value(); }

  // Neighbours of i paired with the link weight, ascending by index.
  std::vector<std::pair<std::size_t, double>> incident(std::size_t i) const;
  double weighted_degree(std::size_t i) const;

  WeightedGraph without_edge(std::size_t i, std::size_t j) const;
  // Drops every link touching i; i stays as an isolated node.
  WeightedGraph without_node_links(std::size_t i) const;
  // Subgraph on `nodes` (relabeled 0..k-1 in the given order).
  WeightedGraph induced(std::span<const std::size_t> nodes) const;

  // Connected components, each sorted ascending, ordered by smallest member.
  std::vector<std::vector<std::size_t>> components() const;

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

/// Symmetric matrix with zero row sums and non-positive off-diagonals.
class LaplacianMatrix {
 public:
  LaplacianMatrix() = default;
  // Validates the Laplacian invariants; throws ShapeMismatch otherwise.
  explicit LaplacianMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const { return m_; }
  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  struct Unchecked {};
  LaplacianMatrix(Eigen::MatrixXd entries, Unchecked) : m_(std::move(entries)) {}
  friend LaplacianMatrix build_laplacian(const WeightedGraph&);
  friend LaplacianMatrix perturbed_laplacian_link(const LaplacianMatrix&, std::size_t,
                                                  std::size_t, double);
  friend LaplacianMatrix perturbed_laplacian_node(
      const LaplacianMatrix&, std::size_t,
      std::span<const std::pair<std::size_t, double>>);

  Eigen::MatrixXd m_;
};

struct SpectralResult {
  double lambda2 = 0.0;
  Eigen::VectorXd fiedler;   // unit norm, orthogonal to the all-ones vector
  Eigen::VectorXd spectrum;  // all eigenvalues, ascending
  bool full_spectrum_available = false;
};

LaplacianMatrix build_laplacian(const WeightedGraph& g);

// Second-smallest Laplacian eigenvalue and a Fiedler vector. When the
// eigenvalue is repeated the returned vector is the normalized projection of
// the first unit vector e_k with a non-negligible component in the
// eigenspace, so its first nonzero entry is positive.
SpectralResult algebraic_connectivity(const LaplacianMatrix& L);
SpectralResult algebraic_connectivity(const WeightedGraph& g);

// Orthonormal basis (n x k) of the eigenspace of lambda2, restricted to 1-perp.
Eigen::MatrixXd fiedler_eigenspace(const LaplacianMatrix& L, double cluster_tol = 1e-8);

// Smallest eigenvalue of M restricted to the orthogonal complement of the
// all-ones vector, i.e. min z'Mz over unit z with z.1 = 0. For zero row sums
// this is lambda2, and it stays meaningful for linearized Laplacians whose
// weights leave [0, 1].
double min_eigenvalue_on_complement(const Eigen::MatrixXd& M);

// Orthonormal basis (n x (n-1)) of the complement of the all-ones vector,
// built from a Householder reflector so it is deterministic.
Eigen::MatrixXd ones_complement_basis(std::size_t n);

// Centering matrix I - 11'/n.
Eigen::MatrixXd centering_matrix(std::size_t n);

inline constexpr double kPsdTolerance = 1e-9;

// True iff -C D C is PSD (min eigenvalue >= -kPsdTolerance). Throws
// ShapeMismatch if D is not square, symmetric and hollow.
bool edm_validity(const Eigen::MatrixXd& D);

// Laplacian with link (i, j) of weight w removed, via the rank-one update
// L - w (e_i - e_j)(e_i - e_j)'. Throws NoSuchEdge when L has no such link.
LaplacianMatrix perturbed_laplacian_link(const LaplacianMatrix& L, std::size_t i,
                                         std::size_t j, double w);

// Laplacian with every link incident to i removed; the dimension is kept and
// i becomes isolated. Throws NoSuchNode / NoSuchEdge on bad input.
LaplacianMatrix perturbed_laplacian_node(
    const LaplacianMatrix& L, std::size_t i,
    std::span<const std::pair<std::size_t, double>> incident_weights);
LaplacianMatrix perturbed_laplacian_node(const LaplacianMatrix& L, const WeightedGraph& g,
                                         std::size_t i);

// Graph text formats. Edge lists hold one "i j w" triple per line (0-based,
// '#' starts a comment); an optional "n <count>" line fixes the node count,
// otherwise it is the largest index plus one.
WeightedGraph parse_edge_list(const std::string& text);
std::string format_edge_list(const WeightedGraph& g);
WeightedGraph parse_graph_json(const std::string& text);
std::string format_graph_json(const WeightedGraph& g);
// Picks the parser by content: a leading '{' means JSON.
WeightedGraph load_graph_file(const std::string& path);

}  // namespace mrn
