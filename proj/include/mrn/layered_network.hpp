// Two-layer mobile robot network: positions, distance-decaying link weights
// per link class, and assembly of the global weighted graph.

#pragma once

#include "mrn/spectral_graph.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace mrn {

using Point = Eigen::Vector3d;

/// Link strength law: 1 below rho1, exponential decay on [rho1, rho2], 0 beyond.
struct WeightModel {
  double rho1 = 1.0;
  double rho2 = 3.0;
  double decay_alpha = 5.0;

  // Throws ValidationError unless 0 < rho1 < rho2 and decay_alpha > 0.
  void validate() const;

  friend bool operator==(const WeightModel&, const WeightModel&) = default;
};

enum class LinkClass { Inter1, Inter2, Intra };

const char* to_string(LinkClass c);

struct LinkModels {
  WeightModel inter1;
  WeightModel inter2;
  WeightModel intra;

  const WeightModel& of(LinkClass c) const;

  friend bool operator==(const LinkModels&, const LinkModels&) = default;
};

/// Positions of both layers plus the link models and the squared minimum
/// distances. Global node indices are 0-based: layer 1 first, then layer 2.
class LayeredConfiguration {
 public:
  LayeredConfiguration() = default;
  LayeredConfiguration(std::vector<Point> layer1, std::vector<Point> layer2, LinkModels models,
                       double min_sq_distance1, double min_sq_distance2);

  std::size_t n1() const { return layer1_.size(); }
  std::size_t n2() const { return layer2_.size(); }
  std::size_t size() const { return layer1_.size() + layer2_.size(); }

  const std::vector<Point>& layer1() const { return layer1_; }
  const std::vector<Point>& layer2() const { return layer2_; }
  const Point& position(std::size_t i) const;
  std::vector<Point> positions() const;

  // 1 or 2.
  int layer_of(std::size_t i) const;
  LinkClass link_class(std::size_t i, std::size_t j) const;
  // Global indices owned by layer 1 or 2.
  std::vector<std::size_t> layer_nodes(int layer) const;

  const LinkModels& models() const { return models_; }
  double min_sq_distance(int layer) const { return layer == 1 ? d1_ : d2_; }

  // Same models and thresholds, new positions of one layer.
  LayeredConfiguration with_layer(int layer, std::vector<Point> positions) const;
  LayeredConfiguration with_positions(std::vector<Point> all) const;

  double squared_distance(std::size_t i, std::size_t j) const {
    return (position(i) - position(j)).squaredNorm();
  }
  // Smallest (squared distance - threshold) over same-layer pairs; +inf if none.
  double min_distance_margin() const;
  // Throws ValidationError if any same-layer pair is closer than its
  // threshold (minus tol), or the thresholds/models are invalid.
  void validate(double tol = 1e-9) const;

  friend bool operator==(const LayeredConfiguration&, const LayeredConfiguration&) = default;

 private:
  std::vector<Point> layer1_;
  std::vector<Point> layer2_;
  LinkModels models_;
  double d1_ = 0.0;
  double d2_ = 0.0;
};

/// Links and robots knocked out by jamming or denial of service.
struct LinkMask {
  std::set<std::pair<std::size_t, std::size_t>> jammed;  // stored with first < second
  std::set<std::size_t> removed;

  void jam(std::size_t i, std::size_t j);
  void remove(std::size_t i) { removed.insert(i); }
  bool blocks(std::size_t i, std::size_t j) const;
  bool empty() const { return jammed.empty() && removed.empty(); }
};

inline constexpr double kEdgePruneThreshold = 1e-9;

double link_weight(const WeightModel& model, double distance);

// Gradient of link_weight(|x_ij|) with respect to x_ij = xi - xj. Zero outside
// the open interval (rho1, rho2). Throws DegenerateDistance if xi == xj.
Eigen::Vector3d link_weight_gradient(const WeightModel& model, const Point& xi,
                                     const Point& xj);

// Weight of the pair under its class model (no masking).
double pair_weight(const LayeredConfiguration& cfg, std::size_t i, std::size_t j);

// All pairs with weight above kEdgePruneThreshold and not blocked by the mask.
WeightedGraph assemble_global_graph(const LayeredConfiguration& cfg, const LinkMask& mask = {});

// Algebraic connectivity of the full global graph (fixed dimension; a robot
// removed by the mask is an isolated node, so lambda2 is 0 while it is out).
SpectralResult true_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask = {});

// Nodes that take part in the connectivity objective: all robots not removed.
std::vector<std::size_t> surviving_nodes(const LayeredConfiguration& cfg, const LinkMask& mask);

// Connectivity of the network formed by the surviving robots. Equal to
// true_connectivity(cfg).lambda2 when nothing is removed; 0 when fewer than
// two robots survive.
double surviving_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask = {});

}  // namespace mrn
