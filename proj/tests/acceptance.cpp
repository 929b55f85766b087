// Acceptance report: one PASS/FAIL line per criterion. Exits 0 once every
// criterion has been evaluated (failures included) and 1 if evaluation itself
// broke; with --strict any FAIL also gives exit code 1.

#include "test_support.hpp"

#include "mrn/attacks.hpp"
#include "mrn/errors.hpp"
#include "mrn/game_engine.hpp"
#include "mrn/interior_point.hpp"
#include "mrn/scenario.hpp"
#include "mrn/sdp_subproblem.hpp"
#include "mrn/spectral_graph.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#ifndef MRN_SCENARIO_DIR
#define MRN_SCENARIO_DIR "scenarios"
#endif

using namespace mrn;
using testing::dense_laplacian;
using testing::edge_vector;
using testing::lambda2_bruteforce;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Monotone within tol across consecutive rows (and from the initial state)
// whenever the same attacks are in force.
int monotone_breaks(const GameTrace& t, double tol) {
  int breaks = 0;
  double prev = t.initial_lambda2;
  std::string prev_flags = "-";
  for (const auto& r : t.rows) {
    if (r.attack_flags == prev_flags && r.lambda2 < prev - tol) ++breaks;
    prev = r.lambda2;
    prev_flags = r.attack_flags;
  }
  return breaks;
}

// Smallest (true squared distance - d) over same-layer pairs of every row.
double worst_distance_margin(const GameTrace& t) {
  double worst = INFINITY;
  auto check = [&](const LayeredConfiguration& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        if (c.layer_of(i) != c.layer_of(j)) continue;
        const double d2 = (c.position(i) - c.position(j)).squaredNorm();
        worst = std::min(worst, d2 - c.min_sq_distance(c.layer_of(i)));
      }
    }
  };
  check(t.initial);
  for (const auto& r : t.rows) check(r.state);
  return worst;
}

struct AuditTally {
  int optimal = 0;
  int edm_invalid = 0;
  double worst_epigraph_gap = 0.0;
};

void tally(const GameTrace& t, AuditTally& a) {
  for (const auto& r : t.rows) {
    for (const auto& s : r.audits) {
      if (s.status != SolveStatus::Optimal) continue;
      ++a.optimal;
      if (!s.z_edm_valid) ++a.edm_invalid;
      a.worst_epigraph_gap = std::max(a.worst_epigraph_gap, std::abs(s.linearized_lambda2 - s.alpha));
    }
  }
}

// lambda2 of g without the listed links, from a fresh dense Laplacian.
double lambda2_without(const WeightedGraph& g, std::size_t i, std::size_t j, bool node) {
  std::vector<Edge> kept;
  for (const auto& e : g.edges()) {
    const bool hit = node ? (e.i == i || e.j == i) : (e.i == i && e.j == j);
    if (!hit) kept.push_back(e);
  }
  return lambda2_bruteforce(dense_laplacian(g.node_count(), kept));
}

std::vector<WeightedGraph> bound_suite_graphs() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> size(3, 12);
  std::uniform_real_distribution<double> density(0.2, 0.9);
  std::vector<WeightedGraph> gs;
  while (gs.size() < 100) {
    auto g = testing::random_graph(rng, size(rng), density(rng), true);
    if (testing::component_count_bfs(g.node_count(), edge_vector(g)) == 1) gs.push_back(std::move(g));
  }
  return gs;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::string dir = MRN_SCENARIO_DIR;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--strict") == 0) strict = true;
    else if (std::strcmp(argv[k], "--scenarios") == 0 && k + 1 < argc) dir = argv[++k];
  }

  try {
    const Scenario base = load_scenario(dir + "/formation_6x6.scenario");
    const InteriorPointSolver solver(solver_options(base));
    const GameSetup setup = to_game_setup(base);

    // 1: convergence of the attack-free run.
    auto t0 = Clock::now();
    const GameRun run = run_until_convergence(setup, solver);
    const double t_run = seconds_since(t0);
    const auto& rep = run.report;
    const int breaks = monotone_breaks(run.trace, 1e-6);
    report(1, rep.converged && rep.slack1 <= 1e-4 && rep.slack2 <= 1e-4 && rep.player_updates <= 30 &&
                  breaks == 0 && t_run < 60.0,
           "converged=" + std::string(rep.converged ? "yes" : "no") +
               fmt(" updates=%g (limit 30) slacks=%.3g/%.3g", rep.player_updates, rep.slack1, rep.slack2) +
               fmt(" lambda2 %.6f -> %.6f", run.trace.initial_lambda2, rep.final_lambda2) +
               fmt(" monotone_breaks=%g runtime=%.1fs", breaks, t_run));

    const LayeredConfiguration eq = run.trace.rows.back().state;
    const double eq_lambda = surviving_connectivity(eq);

    // 2: instantaneous worst-case impacts at the equilibrium.
    {
      AttackEvent ev;
      ev.worst_case = true;
      double drop[3];
      bool oracle_ok = true;
      const auto g = assemble_global_graph(eq);
      const double pre = lambda2_bruteforce(dense_laplacian(g.node_count(), edge_vector(g)));
      for (int k = 0; k < 3; ++k) {
        ev.kind = static_cast<AttackKind>(k);
        const auto impact = attack_impact(eq, ev);
        drop[k] = impact.drop;
        double post = pre;
        if (ev.kind == AttackKind::Jam) {
          post = lambda2_without(g, impact.event.link->first, impact.event.link->second, false);
        } else if (ev.kind == AttackKind::Dos) {
          post = lambda2_without(g, *impact.event.node, 0, true);
        }
        oracle_ok = oracle_ok && std::abs((pre - post) - impact.drop) <= 1e-9;
      }
      const double spoof = drop[0], jam = drop[1], dos = drop[2];
      report(2, dos >= jam && jam >= spoof && spoof == 0.0 && oracle_ok,
             fmt("drops dos=%.6f jam=%.6f spoof=%.6g", dos, jam, spoof) +
                 (oracle_ok ? " (matches dense recomputation)" : " (dense recomputation disagrees)"));
    }

    // 3: persistent worst-case Jam and Dos launched at the equilibrium.
    GameRun jam_run, dos_run;
    {
      t0 = Clock::now();
      auto make = [&](AttackKind kind) {
        GameSetup s = setup;
        s.initial = eq;
        AttackEvent ev;
        ev.kind = kind;
        ev.worst_case = true;
        ev.start_step = 0;
        ev.duration = kPersistent;
        s.attacks = {ev};
        return run_until_convergence(s, solver);
      };
      jam_run = make(AttackKind::Jam);
      dos_run = make(AttackKind::Dos);
      const double t3 = seconds_since(t0);
      const double jam_final = jam_run.report.final_lambda2;
      const double dos_final = dos_run.report.final_lambda2;
      const bool jam_ok = jam_final >= 0.95 * eq_lambda;
      const bool dos_ok = dos_run.report.converged && dos_final < eq_lambda;
      report(3, jam_ok && dos_ok && t3 < 120.0,
             fmt("pre=%.6f jam: first=%.6f final=%.6f (>= 95%% needed)", eq_lambda,
                 jam_run.trace.rows.front().lambda2, jam_final) +
                 fmt(" dos: first=%.6f final=%.6f converged=%g runtime=%.1fs", dos_run.trace.rows.front().lambda2,
                     dos_final, dos_run.report.converged, t3));
    }

    const auto graphs = bound_suite_graphs();

    // 4: removal bounds.
    {
      t0 = Clock::now();
      int checked = 0, broken = 0;
      double worst = -INFINITY;
      for (const auto& g : graphs) {
        const auto sp = algebraic_connectivity(g);
        for (const auto& e : g.edges()) {
          const double gap = lambda2_without(g, e.i, e.j, false) - drop_bound_link(g, sp, e.i, e.j);
          worst = std::max(worst, gap);
          ++checked;
          if (gap > 1e-9) ++broken;
        }
        for (std::size_t i = 0; i < g.node_count(); ++i) {
          const double gap = lambda2_without(g, i, 0, true) - drop_bound_node(g, sp, i);
          worst = std::max(worst, gap);
          ++checked;
          if (gap > 1e-9) ++broken;
        }
      }
      const double t4 = seconds_since(t0);
      report(4, broken == 0 && t4 < 10.0,
             fmt("%g removals on 100 graphs, %g above bound, max(actual - bound)=%.3g runtime=%.2fs", checked, broken,
                 worst, t4));
    }

    // 5: target selection equals the exhaustive score argmax.
    {
      t0 = Clock::now();
      int mismatches = 0;
      for (const auto& g : graphs) {
        const auto sp = algebraic_connectivity(g);
        const auto& u = sp.fiedler;
        const std::size_t n = g.node_count();
        std::vector<double> deg(n, 0.0), node_score(n, 0.0);
        std::size_t best_link = 0;
        double best_link_score = -1.0;
        const auto edges = edge_vector(g);
        for (std::size_t k = 0; k < edges.size(); ++k) {
          const auto& e = edges[k];
          const double du = u(static_cast<Eigen::Index>(e.i)) - u(static_cast<Eigen::Index>(e.j));
          const double s = e.w * du * du;
          deg[e.i] += e.w;
          deg[e.j] += e.w;
          node_score[e.i] += s;
          node_score[e.j] += s;
          if (s > best_link_score) {
            best_link_score = s;
            best_link = k;
          }
        }
        auto argmax = [](const std::vector<double>& v) {
          std::size_t b = 0;
          for (std::size_t i = 1; i < v.size(); ++i) {
            if (v[i] > v[b]) b = i;
          }
          return b;
        };
        if (select_spoof_target(g) != argmax(deg)) ++mismatches;
        if (select_dos_target(g, sp) != argmax(node_score)) ++mismatches;
        const auto jam = select_jam_target(g, sp);
        if (jam.first != edges[best_link].i || jam.second != edges[best_link].j) ++mismatches;
      }
      const double t5 = seconds_since(t0);
      report(5, mismatches == 0 && t5 < 10.0,
             fmt("300 selections on 100 graphs, %g mismatches runtime=%.2fs", mismatches, t5));
    }

    // 6: epigraph consistency over criterion 1's solves.
    AuditTally audits;
    tally(run.trace, audits);
    report(6, audits.optimal > 0 && audits.worst_epigraph_gap <= 1e-5,
           fmt("%g solved subproblems, max |lambda2(linearized L) - alpha|=%.3g", audits.optimal,
               audits.worst_epigraph_gap));

    // 7: stay-put feasibility and no infeasible solver returns.
    {
      std::mt19937_64 rng(7);
      int infeasible_candidates = 0;
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const auto cfg = testing::random_configuration(rng, 6, 6, 4.0, 2.0, 0.0);
        for (int player = 1; player <= 2; ++player) {
          SubproblemSpec spec;
          spec.acting_player = player;
          spec.state = cfg;
          spec.trust_radius = default_trust_radius(cfg.models());
          spec.pinned = setup.options.pinned;
          const auto p = build_player_subproblem(spec);
          const auto v = p.program.violation(stay_put_candidate(p, spec));
          const double m = std::max({v.equality, v.inequality, v.psd});
          worst = std::max(worst, m);
          if (m > 1e-9) ++infeasible_candidates;
        }
      }
      const int infeasible =
          run.report.infeasible_solves + jam_run.report.infeasible_solves + dos_run.report.infeasible_solves;
      report(7, infeasible_candidates == 0 && infeasible == 0,
             fmt("stay-put infeasible on %g of 200 subproblems (max violation %.3g), %g infeasible solver returns",
                 infeasible_candidates, worst, infeasible));
    }

    // 8: distance safety and EDM validity in every run above.
    {
      const double margin = std::min({worst_distance_margin(run.trace), worst_distance_margin(jam_run.trace),
                                      worst_distance_margin(dos_run.trace)});
      tally(jam_run.trace, audits);
      tally(dos_run.trace, audits);
      report(8, margin >= -1e-9 && audits.edm_invalid == 0,
             fmt("min(true squared distance - d)=%.6f, %g of %g solved Z fail edm_validity", margin,
                 audits.edm_invalid, audits.optimal));
    }

    // 9: determinism.
    {
      const GameRun again = run_until_convergence(setup, solver);
      const auto a = trace_csv(run.trace), b = trace_csv(again.trace);
      report(9, a == b, fmt("second run trace CSV %g bytes, identical=%g", static_cast<double>(b.size()), a == b));
    }
  } catch (const std::exception& e) {
    std::printf("FAIL evaluation aborted: %s\n", e.what());
    return 1;
  }

  std::printf("%d of 9 criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}
