#include "mrn/attacks.hpp"

#include "mrn/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <random>

namespace mrn {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Network the scores are computed on, with indices mapped back to g and the
// nodes that may be selected.
struct ScoringView {
  WeightedGraph graph;
  std::vector<std::size_t> to_global;
  std::vector<bool> allowed;
  SpectralResult spectral;
};

ScoringView scoring_view(const WeightedGraph& g, const SpectralResult* spectral, AttackScope scope,
                         std::size_t n1, ScopeScoring scoring, bool need_spectral) {
  ScoringView v;
  const auto nodes = scope_nodes(g.node_count(), n1, scope);
  if (nodes.empty()) throw EmptyScope(std::string("no robots in scope ") + to_string(scope));
  if (scope == AttackScope::Global || scoring == ScopeScoring::Restricted) {
    v.graph = g;
    v.to_global.resize(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) v.to_global[i] = i;
    v.allowed.assign(g.node_count(), false);
    for (auto i : nodes) v.allowed[i] = true;
    if (need_spectral) v.spectral = spectral ? *spectral : algebraic_connectivity(g);
    return v;
  }
  v.graph = g.induced(nodes);
  v.to_global = nodes;
  v.allowed.assign(nodes.size(), true);
  if (need_spectral) {
    if (v.graph.node_count() < 2) {
      v.spectral.lambda2 = 0.0;
      v.spectral.fiedler = VectorXd::Zero(1);
    } else {
      v.spectral = algebraic_connectivity(v.graph);
    }
  }
  return v;
}

std::size_t argmax_degree(const ScoringView& v) {
  std::size_t best = 0;
  double best_deg = -1.0;
  for (std::size_t i = 0; i < v.graph.node_count(); ++i) {
    if (!v.allowed[i]) continue;
    const double d = v.graph.weighted_degree(i);
    if (d > best_deg) {
      best_deg = d;
      best = i;
    }
  }
  return best;
}

bool link_allowed(const ScoringView& v, const Edge& e) { return v.allowed[e.i] && v.allowed[e.j]; }

// Edges come sorted lexicographically, so the first strict maximum wins ties.
// Returns edge_count() when no edge is allowed.
std::size_t argmax_link(const ScoringView& v, const VectorXd& u) {
  std::size_t best = v.graph.edge_count();
  double best_score = -1.0;
  for (std::size_t k = 0; k < v.graph.edge_count(); ++k) {
    const auto& e = v.graph.edges()[k];
    if (!link_allowed(v, e)) continue;
    const double s = link_score(v.graph, u, e.i, e.j);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

std::size_t argmax_node(const ScoringView& v, const VectorXd& u) {
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < v.graph.node_count(); ++i) {
    if (!v.allowed[i]) continue;
    const double s = node_score(v.graph, u, i);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

}  // namespace

const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::Spoof:
      return "spoof";
    case AttackKind::Jam:
      return "jam";
    case AttackKind::Dos:
      return "dos";
  }
  return "?";
}

const char* to_string(AttackScope s) {
  switch (s) {
    case AttackScope::Global:
      return "global";
    case AttackScope::Layer1Only:
      return "layer1";
    case AttackScope::Layer2Only:
      return "layer2";
  }
  return "?";
}

AttackKind parse_attack_kind(const std::string& s) {
  if (s == "spoof") return AttackKind::Spoof;
  if (s == "jam") return AttackKind::Jam;
  if (s == "dos") return AttackKind::Dos;
  throw ParseError("unknown attack kind '" + s + "'");
}

const char* to_string(ScopeScoring s) { return s == ScopeScoring::Induced ? "induced" : "restricted"; }

ScopeScoring parse_scope_scoring(const std::string& s) {
  if (s == "induced") return ScopeScoring::Induced;
  if (s == "restricted") return ScopeScoring::Restricted;
  throw ParseError("unknown scope scoring '" + s + "'");
}

AttackScope parse_attack_scope(const std::string& s) {
  if (s == "global") return AttackScope::Global;
  if (s == "layer1") return AttackScope::Layer1Only;
  if (s == "layer2") return AttackScope::Layer2Only;
  throw ParseError("unknown attack scope '" + s + "'");
}

void AttackEvent::validate(std::size_t n) const {
  if (start_step < 0) throw ValidationError("attack start step must be nonnegative");
  if (duration < 1) throw ValidationError("attack duration must be at least 1");
  if (node && *node >= n) throw ValidationError("attack target robot " + std::to_string(*node) + " does not exist");
  if (link) {
    const auto [i, j] = *link;
    if (i >= n || j >= n || i == j) {
      throw ValidationError("attack target link (" + std::to_string(i) + "," + std::to_string(j) + ") is invalid");
    }
  }
  if (!worst_case && !resolved()) throw ValidationError(std::string(to_string(kind)) + " attack has no target");
  if (kind == AttackKind::Jam && node) throw ValidationError("jam attacks target a link, not a robot");
  if (kind != AttackKind::Jam && link) throw ValidationError("spoof and dos attacks target a robot");
}

std::vector<std::size_t> scope_nodes(std::size_t n, std::size_t n1, AttackScope scope) {
  std::size_t lo = 0, hi = n;
  if (scope != AttackScope::Global && n1 > n) throw ShapeMismatch("layer split beyond node count");
  if (scope == AttackScope::Layer1Only) hi = n1;
  if (scope == AttackScope::Layer2Only) lo = n1;
  std::vector<std::size_t> out;
  for (std::size_t i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

double link_score(const WeightedGraph& g, const VectorXd& u, std::size_t i, std::size_t j) {
  const auto w = g.weight(i, j);
  if (!w) throw NoSuchEdge("no edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  const double du = u(idx(i)) - u(idx(j));
  return *w * du * du;
}

double node_score(const WeightedGraph& g, const VectorXd& u, std::size_t i) {
  if (i >= g.node_count()) throw NoSuchNode("no robot " + std::to_string(i));
  double s = 0.0;
  for (const auto& [j, w] : g.incident(i)) {
    const double du = u(idx(i)) - u(idx(j));
    s += w * du * du;
  }
  return s;
}

std::size_t select_spoof_target(const WeightedGraph& g, AttackScope scope, std::size_t n1,
                                ScopeScoring scoring) {
  const auto v = scoring_view(g, nullptr, scope, n1, scoring, false);
  return v.to_global[argmax_degree(v)];
}

std::pair<std::size_t, std::size_t> select_jam_target(const WeightedGraph& g,
                                                      const SpectralResult& spectral,
                                                      AttackScope scope, std::size_t n1,
                                                      ScopeScoring scoring) {
  const auto v = scoring_view(g, &spectral, scope, n1, scoring, true);
  const auto k = argmax_link(v, v.spectral.fiedler);
  if (k == v.graph.edge_count()) throw EmptyScope(std::string("no links in scope ") + to_string(scope));
  const auto& e = v.graph.edges()[k];
  return {v.to_global[e.i], v.to_global[e.j]};
}

std::size_t select_dos_target(const WeightedGraph& g, const SpectralResult& spectral,
                              AttackScope scope, std::size_t n1, ScopeScoring scoring) {
  const auto v = scoring_view(g, &spectral, scope, n1, scoring, true);
  return v.to_global[argmax_node(v, v.spectral.fiedler)];
}

double drop_bound_link(const WeightedGraph& g, const SpectralResult& spectral, std::size_t i,
                       std::size_t j) {
  return spectral.lambda2 - link_score(g, spectral.fiedler, i, j);
}

double drop_bound_node(const WeightedGraph& g, const SpectralResult& spectral, std::size_t i) {
  return spectral.lambda2 - node_score(g, spectral.fiedler, i);
}

double largest_component_lambda2(const WeightedGraph& g, std::size_t removed) {
  if (removed >= g.node_count()) throw NoSuchNode("no robot " + std::to_string(removed));
  const auto rest = g.without_node_links(removed);
  std::vector<std::size_t> best;
  for (const auto& comp : rest.components()) {
    if (comp.size() == 1 && comp[0] == removed) continue;
    if (comp.size() > best.size()) best = comp;
  }
  if (best.size() < 2) return 0.0;
  return algebraic_connectivity(rest.induced(best)).lambda2;
}

AttackEvent resolve_target(const LayeredConfiguration& cfg, const AttackEvent& event,
                           const LinkMask& mask) {
  if (!event.worst_case || event.resolved()) return event;
  AttackEvent out = event;
  const auto g = assemble_global_graph(cfg, mask);
  switch (event.kind) {
    case AttackKind::Spoof:
      out.node = select_spoof_target(g, event.scope, cfg.n1(), event.scoring);
      break;
    case AttackKind::Jam:
      out.link = select_jam_target(g, algebraic_connectivity(g), event.scope, cfg.n1(), event.scoring);
      break;
    case AttackKind::Dos:
      out.node = select_dos_target(g, algebraic_connectivity(g), event.scope, cfg.n1(), event.scoring);
      break;
  }
  return out;
}

AttackImpact attack_impact(const LayeredConfiguration& cfg, const AttackEvent& event) {
  AttackImpact r;
  r.kind = event.kind;
  r.event = resolve_target(cfg, event);
  r.event.validate(cfg.size());
  const auto g = assemble_global_graph(cfg);
  r.pre_lambda2 = algebraic_connectivity(g).lambda2;
  switch (event.kind) {
    case AttackKind::Spoof:
      // Spoofing pins a robot's position; its links are untouched.
      r.post_lambda2 = r.pre_lambda2;
      break;
    case AttackKind::Jam: {
      const auto [i, j] = *r.event.link;
      r.post_lambda2 = g.has_edge(i, j) ? algebraic_connectivity(g.without_edge(i, j)).lambda2 : r.pre_lambda2;
      break;
    }
    case AttackKind::Dos:
      r.post_lambda2 = algebraic_connectivity(g.without_node_links(*r.event.node)).lambda2;
      r.largest_component_lambda2 = largest_component_lambda2(g, *r.event.node);
      break;
  }
  r.drop = r.pre_lambda2 - r.post_lambda2;
  return r;
}

AttackPlan plan_attack(const WeightedGraph& g, std::size_t n1, AttackKind kind, AttackScope scope,
                       std::uint64_t seed, int rotations, ScopeScoring scoring) {
  AttackPlan plan;
  plan.kind = kind;
  plan.scope = scope;
  plan.scoring = scoring;
  if (g.node_count() >= 2) plan.lambda2 = algebraic_connectivity(g).lambda2;
  const bool spectral = kind != AttackKind::Spoof;
  const auto v = scoring_view(g, nullptr, scope, n1, scoring, spectral);
  plan.scoring_lambda2 = spectral ? v.spectral.lambda2 : 0.0;

  Eigen::MatrixXd space;
  if (spectral && v.graph.node_count() >= 2) {
    space = fiedler_eigenspace(build_laplacian(v.graph));
    plan.eigenspace_dim = static_cast<std::size_t>(space.cols());
  }

  // Maps a view-level selection to its position in plan.candidates.
  std::vector<std::size_t> slot(kind == AttackKind::Jam ? v.graph.edge_count() : v.graph.node_count(),
                                std::numeric_limits<std::size_t>::max());
  switch (kind) {
    case AttackKind::Spoof:
      for (std::size_t i = 0; i < v.graph.node_count(); ++i) {
        if (!v.allowed[i]) continue;
        CandidateScore c;
        c.i = c.j = v.to_global[i];
        c.score = v.graph.weighted_degree(i);
        c.post_lambda2 = plan.lambda2;
        slot[i] = plan.candidates.size();
        plan.candidates.push_back(c);
      }
      plan.selected = slot[argmax_degree(v)];
      break;
    case AttackKind::Jam: {
      for (std::size_t k = 0; k < v.graph.edge_count(); ++k) {
        const auto& e = v.graph.edges()[k];
        if (!link_allowed(v, e)) continue;
        CandidateScore c;
        c.i = v.to_global[e.i];
        c.j = v.to_global[e.j];
        c.score = link_score(v.graph, v.spectral.fiedler, e.i, e.j);
        c.bound = v.spectral.lambda2 - c.score;
        c.post_lambda2 = algebraic_connectivity(g.without_edge(c.i, c.j)).lambda2;
        slot[k] = plan.candidates.size();
        plan.candidates.push_back(c);
      }
      if (plan.candidates.empty()) throw EmptyScope(std::string("no links in scope ") + to_string(scope));
      plan.selected = slot[argmax_link(v, v.spectral.fiedler)];
      break;
    }
    case AttackKind::Dos:
      for (std::size_t i = 0; i < v.graph.node_count(); ++i) {
        if (!v.allowed[i]) continue;
        CandidateScore c;
        c.i = c.j = v.to_global[i];
        c.score = node_score(v.graph, v.spectral.fiedler, i);
        c.bound = v.spectral.lambda2 - c.score;
        c.post_lambda2 = g.node_count() < 2 ? 0.0 : algebraic_connectivity(g.without_node_links(c.i)).lambda2;
        c.largest_component_lambda2 = largest_component_lambda2(g, c.i);
        slot[i] = plan.candidates.size();
        plan.candidates.push_back(c);
      }
      plan.selected = slot[argmax_node(v, v.spectral.fiedler)];
      break;
  }

  const auto exact_key = [&](const CandidateScore& c) {
    return c.largest_component_lambda2 ? *c.largest_component_lambda2 : c.post_lambda2;
  };
  for (std::size_t k = 1; k < plan.candidates.size(); ++k) {
    if (exact_key(plan.candidates[k]) < exact_key(plan.candidates[plan.exact_optimal])) plan.exact_optimal = k;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int r = 0; r < rotations; ++r) {
    if (!spectral || space.cols() == 0) {
      plan.rotation_selections.push_back(plan.selected);
      continue;
    }
    VectorXd coeff(space.cols());
    for (Index k = 0; k < coeff.size(); ++k) coeff(k) = gauss(rng);
    VectorXd u = space * coeff;
    u /= u.norm();
    plan.rotation_selections.push_back(slot[kind == AttackKind::Jam ? argmax_link(v, u) : argmax_node(v, u)]);
  }
  return plan;
}

std::string attack_plan_json(const AttackPlan& plan) {
  nlohmann::json j;
  j["kind"] = to_string(plan.kind);
  j["scope"] = to_string(plan.scope);
  j["scoring"] = to_string(plan.scoring);
  j["lambda2"] = plan.lambda2;
  j["scoring_lambda2"] = plan.scoring_lambda2;
  j["eigenspace_dim"] = plan.eigenspace_dim;
  const auto target = [&](const CandidateScore& c) {
    return plan.kind == AttackKind::Jam ? nlohmann::json::array({c.i, c.j}) : nlohmann::json(c.i);
  };
  j["candidates"] = nlohmann::json::array();
  for (const auto& c : plan.candidates) {
    nlohmann::json e;
    e["target"] = target(c);
    e["score"] = c.score;
    e["bound"] = c.bound ? nlohmann::json(*c.bound) : nlohmann::json(nullptr);
    e["post_lambda2"] = c.post_lambda2;
    e["drop"] = plan.lambda2 - c.post_lambda2;
    if (c.largest_component_lambda2) e["largest_component_lambda2"] = *c.largest_component_lambda2;
    j["candidates"].push_back(std::move(e));
  }
  j["selected"] = target(plan.candidates[plan.selected]);
  j["exact_optimal"] = target(plan.candidates[plan.exact_optimal]);
  j["rotation_selections"] = nlohmann::json::array();
  for (auto k : plan.rotation_selections) j["rotation_selections"].push_back(target(plan.candidates[k]));
  return j.dump(2);
}

}  // namespace mrn
