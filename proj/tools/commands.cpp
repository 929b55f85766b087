#include "commands.hpp"

#include "mrn/errors.hpp"
#include "mrn/game_engine.hpp"
#include "mrn/interior_point.hpp"
#include "mrn/json_io.hpp"
#include "mrn/layered_network.hpp"
#include "mrn/scenario.hpp"

#include "json.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mrn::cli {

namespace {

using nlohmann::json;

// Higher is worse when several scenarios report different outcomes.
int severity(int code) {
  switch (code) {
    case kOk: return 0;
    case kNonConvergence: return 1;
    case kSolverFailure: return 2;
    default: return 3;
  }
}

struct JobResult {
  int code = kOk;
  std::string message;
};

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + p.string());
}

JobResult run_one(const std::string& path, const std::string& dir, const std::vector<int>& steps) {
  JobResult r;
  Scenario s;
  try {
    s = load_scenario(path);
  } catch (const Error& e) {
    return {kUsage, path + ": " + e.what()};
  }
  try {
    const auto a = run_scenario(s);
    write_artifacts(a, dir);
    const PinnedAxes pinned{s.layers[0].pinned_axes, s.layers[1].pinned_axes};
    const std::filesystem::path d(dir);
    write_text(d / "state_initial.json", format_snapshot(snapshot_at(a.run, -1, pinned)));
    const int last = static_cast<int>(a.run.trace.rows.size()) - 1;
    write_text(d / "state_final.json", format_snapshot(snapshot_at(a.run, last, pinned)));
    for (int k : steps) {
      if (k < 0 || k > last) continue;
      write_text(d / ("state_step" + std::to_string(k) + ".json"), format_snapshot(snapshot_at(a.run, k, pinned)));
    }
    const auto& rep = a.run.report;
    std::ostringstream m;
    m << s.name << ": " << (rep.converged ? "converged" : "not converged") << " after "
      << a.run.trace.rows.size() << " steps, lambda2 " << a.run.trace.initial_lambda2 << " -> "
      << rep.final_lambda2 << ", slacks " << rep.slack1 << " / " << rep.slack2 << ", output " << dir;
    r.message = m.str();
    r.code = rep.converged ? kOk : kNonConvergence;
  } catch (const SolverFailure& e) {
    return {kSolverFailure, s.name + ": solver failure: " + e.what()};
  } catch (const Error& e) {
    return {kUsage, s.name + ": " + e.what()};
  }
  return r;
}

int fail(std::ostream& err, int code, const std::string& msg) {
  err << "error: " << msg << "\n";
  return code;
}

}  // namespace

int simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.scenarios.empty()) return fail(err, kUsage, "no scenario given");
  if (a.jobs < 1) return fail(err, kUsage, "--jobs must be at least 1");

  // One scenario writes straight into the output directory; several get a
  // subdirectory each, named after the file.
  std::vector<std::string> dirs;
  std::set<std::string> used;
  for (const auto& p : a.scenarios) {
    if (a.scenarios.size() == 1) {
      dirs.push_back(a.out_dir);
      continue;
    }
    std::string stem = std::filesystem::path(p).stem().string();
    std::string name = stem;
    for (int k = 2; used.count(name); ++k) name = stem + "_" + std::to_string(k);
    used.insert(name);
    dirs.push_back((std::filesystem::path(a.out_dir) / name).string());
  }

  std::vector<JobResult> results(a.scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < a.scenarios.size();) {
      results[k] = run_one(a.scenarios[k], dirs[k], a.snapshot_steps);
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(a.jobs), a.scenarios.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (const auto& r : results) {
    (r.code == kOk || r.code == kNonConvergence ? out : err) << r.message << "\n";
    if (severity(r.code) > severity(code)) code = r.code;
  }
  return code;
}

int attack_plan(const AttackPlanArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const auto snap = load_snapshot(a.state);
    const auto kind = parse_attack_kind(a.kind);
    const auto scope = parse_attack_scope(a.scope);
    const auto scoring = parse_scope_scoring(a.scoring);
    const auto g = assemble_global_graph(snap.config, snap.mask);
    const auto plan = plan_attack(g, snap.config.n1(), kind, scope, a.seed, 5, scoring);
    out << attack_plan_json(plan) << "\n";
    return kOk;
  } catch (const Error& e) {
    return fail(err, kUsage, e.what());
  }
}

int check_ne(const CheckNeArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const auto snap = load_snapshot(a.state);
    EngineOptions opts;
    opts.pinned = snap.pinned;
    opts.ne_tolerance = a.tolerance;
    ActiveAttacks active;
    active.frozen = snap.frozen;
    active.mask = snap.mask;
    const InteriorPointSolver solver;
    const auto rep = check_nash(snap.config, active, opts, solver);
    json j = {{"lambda2", rep.final_lambda2},
              {"slack1", rep.slack1},
              {"slack2", rep.slack2},
              {"tolerance", a.tolerance},
              {"verdict", rep.converged ? "equilibrium" : "not-equilibrium"}};
    out << j.dump(2) << "\n";
    return rep.converged ? kOk : kNonConvergence;
  } catch (const SolverFailure& e) {
    return fail(err, kSolverFailure, e.what());
  } catch (const Error& e) {
    return fail(err, kUsage, e.what());
  }
}

WeightedGraph load_graph(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<Edge> edges;
  std::size_t nodes = 0;
  bool explicit_nodes = false;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
    if (j.contains("nodes")) {
      nodes = static_cast<std::size_t>(int_field(j, "nodes", path));
      explicit_nodes = true;
    }
    for (const auto& e : require_field(j, "edges", path)) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ParseError(path + ": an edge is [i, j] or [i, j, w]");
      if (!e[0].is_number_unsigned() || !e[1].is_number_unsigned()) throw ParseError(path + ": bad edge endpoint");
      edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e.size() == 3 ? e[2].get<double>() : 1.0});
    }
  } else {
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok)) continue;
      const auto where = path + ":" + std::to_string(lineno);
      if (tok == "nodes") {
        if (!(ls >> nodes)) throw ParseError(where + ": expected a node count");
        explicit_nodes = true;
        continue;
      }
      Edge e;
      try {
        e.i = std::stoul(tok);
      } catch (const std::exception&) {
        throw ParseError(where + ": expected 'i j [w]'");
      }
      if (!(ls >> e.j)) throw ParseError(where + ": expected 'i j [w]'");
      if (!(ls >> e.w)) e.w = 1.0;
      edges.push_back(e);
    }
  }
  if (!explicit_nodes) {
    for (const auto& e : edges) nodes = std::max({nodes, e.i + 1, e.j + 1});
  }
  return WeightedGraph(nodes, std::move(edges));
}

int eigen(const std::string& graph_path, std::ostream& out, std::ostream& err) {
  try {
    const auto g = load_graph(graph_path);
    const auto s = algebraic_connectivity(g);
    json spectrum = json::array(), fiedler = json::array();
    for (Eigen::Index k = 0; k < s.spectrum.size(); ++k) spectrum.push_back(s.spectrum(k));
    for (Eigen::Index k = 0; k < s.fiedler.size(); ++k) fiedler.push_back(s.fiedler(k));
    json j = {{"nodes", g.node_count()},
              {"edges", g.edge_count()},
              {"lambda2", s.lambda2},
              {"components", g.components().size()},
              {"fiedler", fiedler},
              {"spectrum", spectrum}};
    out << j.dump(2) << "\n";
    return kOk;
  } catch (const Error& e) {
    return fail(err, kUsage, e.what());
  }
}

}  // namespace mrn::cli
