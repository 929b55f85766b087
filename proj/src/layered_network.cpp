#include "mrn/layered_network.hpp"

#include "mrn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mrn {

void WeightModel::validate() const {
  if (!(rho1 > 0.0) || !(rho2 > rho1)) {
    throw ValidationError("weight model needs 0 < rho1 < rho2");
  }
  if (!(decay_alpha > 0.0)) {
    throw ValidationError("weight model needs a positive decay rate");
  }
}

const char* to_string(LinkClass c) {
  switch (c) {
    case LinkClass::Inter1:
      return "inter1";
    case LinkClass::Inter2:
      return "inter2";
    case LinkClass::Intra:
      return "intra";
  }
  return "?";
}

const WeightModel& LinkModels::of(LinkClass c) const {
  switch (c) {
    case LinkClass::Inter1:
      return inter1;
    case LinkClass::Inter2:
      return inter2;
    case LinkClass::Intra:
      break;
  }
  return intra;
}

LayeredConfiguration::LayeredConfiguration(std::vector<Point> layer1, std::vector<Point> layer2,
                                           LinkModels models, double min_sq_distance1,
                                           double min_sq_distance2)
    : layer1_(std::move(layer1)),
      layer2_(std::move(layer2)),
      models_(models),
      d1_(min_sq_distance1),
      d2_(min_sq_distance2) {}

const Point& LayeredConfiguration::position(std::size_t i) const {
  if (i < layer1_.size()) return layer1_[i];
  if (i < size()) return layer2_[i - layer1_.size()];
  throw NoSuchNode("robot " + std::to_string(i) + " out of range");
}

std::vector<Point> LayeredConfiguration::positions() const {
  std::vector<Point> all = layer1_;
  all.insert(all.end(), layer2_.begin(), layer2_.end());
  return all;
}

int LayeredConfiguration::layer_of(std::size_t i) const {
  if (i >= size()) throw NoSuchNode("robot " + std::to_string(i) + " out of range");
  return i < layer1_.size() ? 1 : 2;
}

LinkClass LayeredConfiguration::link_class(std::size_t i, std::size_t j) const {
  const int a = layer_of(i);
  const int b = layer_of(j);
  if (a != b) return LinkClass::Intra;
  return a == 1 ? LinkClass::Inter1 : LinkClass::Inter2;
}

std::vector<std::size_t> LayeredConfiguration::layer_nodes(int layer) const {
  std::vector<std::size_t> out;
  const std::size_t begin = layer == 1 ? 0 : n1();
  const std::size_t end = layer == 1 ? n1() : size();
  for (std::size_t i = begin; i < end; ++i) out.push_back(i);
  return out;
}

LayeredConfiguration LayeredConfiguration::with_layer(int layer,
                                                      std::vector<Point> positions) const {
  LayeredConfiguration out = *this;
  auto& target = layer == 1 ? out.layer1_ : out.layer2_;
  if (positions.size() != target.size()) {
    throw ShapeMismatch("with_layer: robot count mismatch");
  }
  target = std::move(positions);
  return out;
}

LayeredConfiguration LayeredConfiguration::with_positions(std::vector<Point> all) const {
  if (all.size() != size()) throw ShapeMismatch("with_positions: robot count mismatch");
  LayeredConfiguration out = *this;
  std::copy(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n1()), out.layer1_.begin());
  std::copy(all.begin() + static_cast<std::ptrdiff_t>(n1()), all.end(), out.layer2_.begin());
  return out;
}

double LayeredConfiguration::min_distance_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (int layer : {1, 2}) {
    const auto nodes = layer_nodes(layer);
    const double d = min_sq_distance(layer);
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        margin = std::min(margin, squared_distance(nodes[a], nodes[b]) - d);
      }
    }
  }
  return margin;
}

void LayeredConfiguration::validate(double tol) const {
  models_.inter1.validate();
  models_.inter2.validate();
  models_.intra.validate();
  if (!(d1_ >= 0.0) || !(d2_ >= 0.0)) {
    throw ValidationError("minimum squared distances must be non-negative");
  }
  for (const auto& p : positions()) {
    if (!p.allFinite()) throw ValidationError("robot position is not finite");
  }
  for (int layer : {1, 2}) {
    const auto nodes = layer_nodes(layer);
    const double d = min_sq_distance(layer);
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        const double sq = squared_distance(nodes[a], nodes[b]);
        if (sq < d - tol) {
          throw ValidationError("minimum distance violated in layer " + std::to_string(layer) +
                                " between robots " + std::to_string(nodes[a]) + " and " +
                                std::to_string(nodes[b]) + " (squared distance " +
                                std::to_string(sq) + " < " + std::to_string(d) + ")");
        }
      }
    }
  }
}

void LinkMask::jam(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  jammed.emplace(i, j);
}

bool LinkMask::blocks(std::size_t i, std::size_t j) const {
  if (removed.contains(i) || removed.contains(j)) return true;
  if (i > j) std::swap(i, j);
  return jammed.contains({i, j});
}

double link_weight(const WeightModel& model, double distance) {
  if (distance < model.rho1) return 1.0;
  if (distance <= model.rho2) {
    return std::exp(-model.decay_alpha * (distance - model.rho1) / (model.rho2 - model.rho1));
  }
  return 0.0;
}

Eigen::Vector3d link_weight_gradient(const WeightModel& model, const Point& xi, const Point& xj) {
  const Eigen::Vector3d diff = xi - xj;
  const double dist = diff.norm();
  if (dist < 1e-12) {
    throw DegenerateDistance("weight gradient undefined for coincident robots");
  }
  if (dist <= model.rho1 || dist >= model.rho2) return Eigen::Vector3d::Zero();
  const double slope = -model.decay_alpha / (model.rho2 - model.rho1) * link_weight(model, dist);
  return slope * diff / dist;
}

double pair_weight(const LayeredConfiguration& cfg, std::size_t i, std::size_t j) {
  const auto& model = cfg.models().of(cfg.link_class(i, j));
  return link_weight(model, (cfg.position(i) - cfg.position(j)).norm());
}

WeightedGraph assemble_global_graph(const LayeredConfiguration& cfg, const LinkMask& mask) {
  std::vector<Edge> edges;
  const std::size_t n = cfg.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (mask.blocks(i, j)) continue;
      const double w = pair_weight(cfg, i, j);
      if (w > kEdgePruneThreshold) edges.push_back({i, j, w});
    }
  }
  return WeightedGraph(n, std::move(edges));
}

SpectralResult true_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask) {
  return algebraic_connectivity(assemble_global_graph(cfg, mask));
}

std::vector<std::size_t> surviving_nodes(const LayeredConfiguration& cfg, const LinkMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    if (!mask.removed.contains(i)) out.push_back(i);
  }
  return out;
}

double surviving_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask) {
  const auto graph = assemble_global_graph(cfg, mask);
  if (mask.removed.empty()) return algebraic_connectivity(graph).lambda2;
  const auto nodes = surviving_nodes(cfg, mask);
  if (nodes.size() < 2) return 0.0;
  return algebraic_connectivity(graph.induced(nodes)).lambda2;
}

}  // namespace mrn
