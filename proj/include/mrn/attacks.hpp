// GPS spoofing, targeted jamming and denial of service: attack events,
// worst-case target selection from the Fiedler vector, removal bounds and
// exact impact.

#pragma once

#include "mrn/layered_network.hpp"
#include "mrn/spectral_graph.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mrn {

enum class AttackKind { Spoof, Jam, Dos };
enum class AttackScope { Global, Layer1Only, Layer2Only };
// How a layer scope scores its candidates: on the induced sub-network with its
// own spectrum (default), or on the whole network with only the candidate set
// restricted to the layer.
enum class ScopeScoring { Induced, Restricted };

const char* to_string(AttackKind k);
const char* to_string(AttackScope s);
const char* to_string(ScopeScoring s);
// Accept "spoof"/"jam"/"dos" and "global"/"layer1"/"layer2". Throw ParseError.
AttackKind parse_attack_kind(const std::string& s);
AttackScope parse_attack_scope(const std::string& s);
ScopeScoring parse_scope_scoring(const std::string& s);

inline constexpr int kPersistent = std::numeric_limits<int>::max();

struct AttackEvent {
  AttackKind kind = AttackKind::Spoof;
  // Explicit target: a robot for Spoof/Dos, a link for Jam. When worst_case
  // is set the target is chosen when the attack starts.
  std::optional<std::size_t> node;
  std::optional<std::pair<std::size_t, std::size_t>> link;
  bool worst_case = false;
  AttackScope scope = AttackScope::Global;
  ScopeScoring scoring = ScopeScoring::Induced;
  int start_step = 0;
  int duration = 1;  // kPersistent lasts until the run ends

  // Active on [start, start + duration - 1].
  bool active_at(int step) const {
    return step >= start_step && step - start_step < duration;
  }
  bool persistent() const { return duration == kPersistent; }
  bool resolved() const { return kind == AttackKind::Jam ? link.has_value() : node.has_value(); }

  // Throws ValidationError on a bad duration/start or an index outside [0, n).
  void validate(std::size_t n) const;

  friend bool operator==(const AttackEvent&, const AttackEvent&) = default;
};

// Candidate nodes of a scope: layer 1 is [0, n1), layer 2 is [n1, n).
std::vector<std::size_t> scope_nodes(std::size_t n, std::size_t n1, AttackScope scope);

// Weighted-degree argmax within the scope; ties go to the lowest index.
// Throws EmptyScope.
std::size_t select_spoof_target(const WeightedGraph& g, AttackScope scope = AttackScope::Global,
                                std::size_t n1 = 0, ScopeScoring scoring = ScopeScoring::Induced);

// Argmax of w_ij (u_i - u_j)^2 over edges in scope; ties go to the first edge
// in lexicographic order. With Induced scoring a layer scope uses the
// sub-network's own Fiedler vector and `spectral` is ignored. Throws EmptyScope.
std::pair<std::size_t, std::size_t> select_jam_target(const WeightedGraph& g,
                                                      const SpectralResult& spectral,
                                                      AttackScope scope = AttackScope::Global,
                                                      std::size_t n1 = 0,
                                                      ScopeScoring scoring = ScopeScoring::Induced);

// Argmax of sum_j w_ij (u_i - u_j)^2 over nodes in scope; ties go to the
// lowest index. Layer scopes as above. Throws EmptyScope.
std::size_t select_dos_target(const WeightedGraph& g, const SpectralResult& spectral,
                              AttackScope scope = AttackScope::Global, std::size_t n1 = 0,
                              ScopeScoring scoring = ScopeScoring::Induced);

double link_score(const WeightedGraph& g, const Eigen::VectorXd& u, std::size_t i, std::size_t j);
double node_score(const WeightedGraph& g, const Eigen::VectorXd& u, std::size_t i);

// lambda2 - w_ij (u_i - u_j)^2. Throws NoSuchEdge.
double drop_bound_link(const WeightedGraph& g, const SpectralResult& spectral, std::size_t i,
                       std::size_t j);
// lambda2 - sum_j w_ij (u_i - u_j)^2, not clamped. Throws NoSuchNode.
double drop_bound_node(const WeightedGraph& g, const SpectralResult& spectral, std::size_t i);

// lambda2 of the largest connected component of g without node i's links,
// ignoring i itself. Ties between components go to the one with the smallest
// member; a single-robot component gives 0.
double largest_component_lambda2(const WeightedGraph& g, std::size_t removed);

struct AttackImpact {
  AttackKind kind = AttackKind::Spoof;
  AttackEvent event;  // with the target resolved
  double pre_lambda2 = 0.0;
  double post_lambda2 = 0.0;  // fixed dimension
  double drop = 0.0;
  std::optional<double> largest_component_lambda2;  // Dos only
};

// Resolves a worst-case target on the current (unmasked) network, then
// recomputes lambda2 with the attack applied.
AttackEvent resolve_target(const LayeredConfiguration& cfg, const AttackEvent& event,
                           const LinkMask& mask = {});
AttackImpact attack_impact(const LayeredConfiguration& cfg, const AttackEvent& event);

struct CandidateScore {
  std::size_t i = 0;
  std::size_t j = 0;  // equal to i for node candidates
  double score = 0.0;
  std::optional<double> bound;  // on the scoring network's lambda2
  double post_lambda2 = 0.0;    // exact, whole network, fixed dimension
  std::optional<double> largest_component_lambda2;
};

struct AttackPlan {
  AttackKind kind = AttackKind::Spoof;
  AttackScope scope = AttackScope::Global;
  ScopeScoring scoring = ScopeScoring::Induced;
  double lambda2 = 0.0;          // whole network
  double scoring_lambda2 = 0.0;  // network the scores are computed on
  std::size_t eigenspace_dim = 1;
  std::vector<CandidateScore> candidates;
  std::size_t selected = 0;       // into candidates
  std::size_t exact_optimal = 0;  // candidate with the lowest exact post lambda2
  // Selected candidate under random unit vectors of the lambda2 eigenspace.
  std::vector<std::size_t> rotation_selections;
};

AttackPlan plan_attack(const WeightedGraph& g, std::size_t n1, AttackKind kind,
                       AttackScope scope = AttackScope::Global, std::uint64_t seed = 0,
                       int rotations = 5, ScopeScoring scoring = ScopeScoring::Induced);
std::string attack_plan_json(const AttackPlan& plan);

}  // namespace mrn
