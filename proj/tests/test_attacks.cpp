#include "mrn/attacks.hpp"
#include "mrn/errors.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include "json.hpp"

#include <cmath>

using namespace mrn;
using Eigen::VectorXd;

namespace {

WeightedGraph path3() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

WeightedGraph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (std::size_t k = 1; k <= leaves; ++k) e.push_back({0, k, 1.0});
  return WeightedGraph(leaves + 1, e);
}

// Plain loops over the raw edge list; no calls into the selection code.
double brute_link_score(const Edge& e, const VectorXd& u) {
  const double d = u(static_cast<Eigen::Index>(e.i)) - u(static_cast<Eigen::Index>(e.j));
  return e.w * d * d;
}

std::vector<double> brute_node_scores(const WeightedGraph& g, const VectorXd& u) {
  std::vector<double> s(g.node_count(), 0.0);
  for (const auto& e : g.edges()) {
    s[e.i] += brute_link_score(e, u);
    s[e.j] += brute_link_score(e, u);
  }
  return s;
}

std::vector<double> brute_degrees(const WeightedGraph& g) {
  std::vector<double> s(g.node_count(), 0.0);
  for (const auto& e : g.edges()) {
    s[e.i] += e.w;
    s[e.j] += e.w;
  }
  return s;
}

std::size_t first_argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

}  // namespace

TEST_CASE("spoof selection") {
  CHECK(select_spoof_target(star(5)) == 0);
  CHECK(select_spoof_target(path3()) == 1);
  CHECK_THROWS_AS(select_spoof_target(path3(), AttackScope::Layer2Only, 3), EmptyScope);

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_graph(rng, 2 + trial % 11, 0.5, true);
    CHECK(select_spoof_target(g) == first_argmax(brute_degrees(g)));
  }
}

TEST_CASE("jam selection") {
  const auto g = path3();
  const auto s = algebraic_connectivity(g);
  CHECK(link_score(g, s.fiedler, 0, 1) == doctest::Approx(0.5));
  CHECK(link_score(g, s.fiedler, 1, 2) == doctest::Approx(0.5));
  CHECK(select_jam_target(g, s) == std::pair<std::size_t, std::size_t>{0, 1});

  // Two triangles joined by the bridge (2, 3).
  const WeightedGraph bridge(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}});
  const auto sb = algebraic_connectivity(bridge);
  CHECK(select_jam_target(bridge, sb) == std::pair<std::size_t, std::size_t>{2, 3});
  for (const auto& e : bridge.edges()) {
    if (e.i != 2 || e.j != 3) CHECK(brute_link_score(e, sb.fiedler) < link_score(bridge, sb.fiedler, 2, 3));
  }
  CHECK_THROWS_AS(select_jam_target(WeightedGraph(3), algebraic_connectivity(WeightedGraph(3))), EmptyScope);

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = testing::random_graph(rng, 2 + trial % 11, 0.5, true);
    const auto sp = algebraic_connectivity(r);
    std::vector<double> scores;
    for (const auto& e : r.edges()) scores.push_back(brute_link_score(e, sp.fiedler));
    const auto& best = r.edges()[first_argmax(scores)];
    CHECK(select_jam_target(r, sp) == std::pair<std::size_t, std::size_t>{best.i, best.j});
  }
}

TEST_CASE("dos selection") {
  const auto g = path3();
  const auto s = algebraic_connectivity(g);
  CHECK(node_score(g, s.fiedler, 1) == doctest::Approx(1.0));
  CHECK(node_score(g, s.fiedler, 0) == doctest::Approx(0.5));
  CHECK(select_dos_target(g, s) == 1);

  const WeightedGraph isolated(4, {{0, 1, 0.9}, {1, 2, 0.4}});
  const auto si = algebraic_connectivity(isolated);
  CHECK(select_dos_target(isolated, si) != 3);
  CHECK(node_score(isolated, si.fiedler, 3) == 0.0);

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = testing::random_graph(rng, 2 + trial % 11, 0.5, true);
    const auto sp = algebraic_connectivity(r);
    CHECK(select_dos_target(r, sp) == first_argmax(brute_node_scores(r, sp.fiedler)));
  }
}

TEST_CASE("removal bounds") {
  const auto g = path3();
  const auto s = algebraic_connectivity(g);
  CHECK(drop_bound_link(g, s, 0, 1) == doctest::Approx(0.5));
  CHECK(algebraic_connectivity(g.without_edge(0, 1)).lambda2 <= 0.5);
  CHECK(drop_bound_node(g, s, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(drop_bound_link(g, s, 0, 2), NoSuchEdge);
  CHECK_THROWS_AS(drop_bound_node(g, s, 3), NoSuchNode);

  // Equal Fiedler entries across an edge: no guaranteed drop.
  const WeightedGraph sym(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}, {1, 3, 1}});
  const auto ss = algebraic_connectivity(sym);
  for (const auto& e : sym.edges()) {
    if (std::abs(ss.fiedler(static_cast<Eigen::Index>(e.i)) - ss.fiedler(static_cast<Eigen::Index>(e.j))) < 1e-12)
      CHECK(drop_bound_link(sym, ss, e.i, e.j) == doctest::Approx(ss.lambda2));
  }

  const WeightedGraph iso(4, {{0, 1, 0.9}, {1, 2, 0.4}});
  CHECK(drop_bound_node(iso, algebraic_connectivity(iso), 3) == doctest::Approx(0.0));

  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = testing::random_graph(rng, 2 + trial % 11, 0.5, true);
    const auto sp = algebraic_connectivity(r);
    for (const auto& e : r.edges()) {
      const double actual = testing::lambda2_bruteforce(testing::dense_laplacian(
          r.node_count(), testing::edge_vector(r.without_edge(e.i, e.j))));
      CHECK(actual <= drop_bound_link(r, sp, e.i, e.j) + 1e-9);
    }
    for (std::size_t v = 0; v < r.node_count(); ++v) {
      const double actual = testing::lambda2_bruteforce(
          testing::dense_laplacian(r.node_count(), testing::edge_vector(r.without_node_links(v))));
      CHECK(actual <= drop_bound_node(r, sp, v) + 1e-9);
    }
  }
}

TEST_CASE("bounds hold for any vector of a repeated eigenspace") {
  // K4 has lambda2 = 4 with a three-dimensional eigenspace.
  std::vector<Edge> e;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) e.push_back({i, j, 1.0});
  const WeightedGraph k4(4, e);
  const auto space = fiedler_eigenspace(build_laplacian(k4));
  REQUIRE(space.cols() == 3);
  std::mt19937_64 rng(45);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    SpectralResult s;
    s.lambda2 = 4.0;
    s.fiedler = space * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    s.fiedler.normalize();
    for (const auto& ed : k4.edges())
      CHECK(algebraic_connectivity(k4.without_edge(ed.i, ed.j)).lambda2 <= drop_bound_link(k4, s, ed.i, ed.j) + 1e-9);
  }
}

TEST_CASE("layer scopes") {
  const auto models = testing::reference_models();
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cfg = testing::random_configuration(rng, 4, 4, 3.0, 1.0, 0.0);
    const auto g = assemble_global_graph(cfg);
    const auto s = algebraic_connectivity(g);
    const auto l1 = select_spoof_target(g, AttackScope::Layer1Only, 4);
    const auto l2 = select_spoof_target(g, AttackScope::Layer2Only, 4);
    CHECK(l1 < 4);
    CHECK(l2 >= 4);
    const auto degs = brute_degrees(g);
    CHECK(degs[select_spoof_target(g)] >= degs[l1]);
    // Induced degree never exceeds the full degree.
    const std::vector<std::size_t> layer1{0, 1, 2, 3};
    const auto sub = g.induced(layer1);
    CHECK(brute_degrees(sub)[l1] <= degs[select_spoof_target(g)] + 1e-12);

    const auto sub1 = cfg.layer_nodes(1);
    if (g.induced(sub1).edge_count() > 0) {
      const auto [i, j] = select_jam_target(g, s, AttackScope::Layer1Only, 4);
      CHECK(i < 4);
      CHECK(j < 4);
    }
    const auto d2 = select_dos_target(g, s, AttackScope::Layer2Only, 4);
    CHECK(d2 >= 4);
  }
  CHECK_THROWS_AS(select_dos_target(path3(), algebraic_connectivity(path3()), AttackScope::Layer2Only, 3), EmptyScope);
  (void)models;
}

TEST_CASE("scope monotonicity of the maximum score") {
  std::mt19937_64 rng(49);
  bool induced_exceeds = false;
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = testing::random_configuration(rng, 5, 5, 4.0, 2.0, 0.0);
    const auto g = assemble_global_graph(cfg);
    for (auto kind : {AttackKind::Spoof, AttackKind::Jam, AttackKind::Dos}) {
      const auto global = plan_attack(g, 5, kind);
      const double top = global.candidates[global.selected].score;
      for (auto scope : {AttackScope::Layer1Only, AttackScope::Layer2Only}) {
        if (kind == AttackKind::Jam && g.induced(cfg.layer_nodes(scope == AttackScope::Layer1Only ? 1 : 2)).edge_count() == 0)
          continue;
        const auto restricted = plan_attack(g, 5, kind, scope, 0, 0, ScopeScoring::Restricted);
        CHECK(restricted.candidates[restricted.selected].score <= top + 1e-12);
        const auto induced = plan_attack(g, 5, kind, scope);
        const double local = induced.candidates[induced.selected].score;
        if (kind == AttackKind::Spoof) CHECK(local <= top + 1e-12);
        if (local > top + 1e-12) induced_exceeds = true;
      }
    }
  }
  // A sub-network's own Fiedler vector can score its links higher than the
  // whole network's vector does, so the induced variant is not monotone.
  CHECK(induced_exceeds);
}

TEST_CASE("attack impact") {
  const auto models = testing::reference_models();
  std::mt19937_64 rng(47);
  const auto cfg = testing::random_configuration(rng, 3, 3, 2.0, 1.0, 0.0);

  AttackEvent spoof;
  spoof.kind = AttackKind::Spoof;
  spoof.worst_case = true;
  const auto is = attack_impact(cfg, spoof);
  CHECK(is.drop == 0.0);
  CHECK(is.event.node.has_value());

  // The only intra link between two internally connected layers is (1, 2).
  LayeredConfiguration bridged({Point(0, 0, 0), Point(0.8, 0, 0)}, {Point(5.6, 0, 0), Point(6.4, 0, 0)},
                               models, 0.4, 0.4);
  const auto g = assemble_global_graph(bridged);
  std::size_t intra = 0;
  for (const auto& e : g.edges()) intra += bridged.link_class(e.i, e.j) == LinkClass::Intra;
  REQUIRE(intra == 1);
  REQUIRE(true_connectivity(bridged).lambda2 > 0.0);
  AttackEvent cut;
  cut.kind = AttackKind::Jam;
  cut.link = std::pair<std::size_t, std::size_t>{1, 2};
  CHECK(attack_impact(bridged, cut).post_lambda2 < 1e-12);

  AttackEvent dos;
  dos.kind = AttackKind::Dos;
  dos.worst_case = true;
  const auto id = attack_impact(cfg, dos);
  CHECK(id.post_lambda2 < 1e-12);
  REQUIRE(id.largest_component_lambda2.has_value());
  CHECK(*id.largest_component_lambda2 >= 0.0);

  AttackEvent jam;
  jam.kind = AttackKind::Jam;
  jam.worst_case = true;
  const auto ij = attack_impact(cfg, jam);
  CHECK(id.drop >= ij.drop);
  CHECK(ij.drop >= is.drop);
}

TEST_CASE("largest component after isolation") {
  const WeightedGraph g(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  // Isolating 1 leaves {0} and the unit path {2, 3, 4} with lambda2 = 1.
  CHECK(largest_component_lambda2(g, 1) == doctest::Approx(1.0));
  CHECK(largest_component_lambda2(path3(), 1) == 0.0);
}

TEST_CASE("event timing and validation") {
  AttackEvent e;
  e.kind = AttackKind::Jam;
  e.link = std::pair<std::size_t, std::size_t>{0, 1};
  e.start_step = 6;
  e.duration = 2;
  CHECK_FALSE(e.active_at(5));
  CHECK(e.active_at(6));
  CHECK(e.active_at(7));
  CHECK_FALSE(e.active_at(8));
  e.duration = kPersistent;
  CHECK(e.active_at(1000000));
  CHECK_NOTHROW(e.validate(3));
  e.link = std::pair<std::size_t, std::size_t>{0, 5};
  CHECK_THROWS_AS(e.validate(3), ValidationError);
  e.link.reset();
  CHECK_THROWS_AS(e.validate(3), ValidationError);
  e.duration = 0;
  e.worst_case = true;
  CHECK_THROWS_AS(e.validate(3), ValidationError);
  CHECK(parse_attack_kind("dos") == AttackKind::Dos);
  CHECK(parse_attack_scope("layer2") == AttackScope::Layer2Only);
  CHECK_THROWS_AS(parse_attack_kind("emp"), ParseError);
}

TEST_CASE("attack plan report") {
  const auto plan = plan_attack(path3(), 3, AttackKind::Dos);
  CHECK(plan.candidates.size() == 3);
  CHECK(plan.candidates[plan.selected].i == 1);
  CHECK(plan.rotation_selections.size() == 5);
  const auto j = nlohmann::json::parse(attack_plan_json(plan));
  CHECK(j["selected"] == 1);
  CHECK(j["kind"] == "dos");
  CHECK(j["candidates"].size() == 3);

  const auto jam = plan_attack(path3(), 3, AttackKind::Jam);
  CHECK(nlohmann::json::parse(attack_plan_json(jam))["selected"] == nlohmann::json::array({0, 1}));

  // K3: two-dimensional eigenspace, rotations may change the selection.
  const WeightedGraph k3(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  const auto kp = plan_attack(k3, 3, AttackKind::Dos, AttackScope::Global, 7);
  CHECK(kp.eigenspace_dim == 2);
  CHECK(kp.rotation_selections.size() == 5);

  std::mt19937_64 rng(48);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::random_graph(rng, 3 + trial % 8, 0.5, true);
    for (auto kind : {AttackKind::Jam, AttackKind::Dos}) {
      const auto p = plan_attack(g, 0, kind);
      for (const auto& c : p.candidates) CHECK(c.post_lambda2 <= *c.bound + 1e-9);
      for (const auto& c : p.candidates) CHECK(c.score <= p.candidates[p.selected].score);
    }
  }
}
