// Subcommands of mrn_cli as plain functions so tests can drive them without
// spawning processes. Each returns the process exit code.

#pragma once

#include "mrn/attacks.hpp"
#include "mrn/spectral_graph.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mrn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNonConvergence = 2, kSolverFailure = 3 };

struct SimulateArgs {
  std::vector<std::string> scenarios;
  std::string out_dir;
  int jobs = 1;
  std::vector<int> snapshot_steps;  // extra state_step<k>.json files
};

struct AttackPlanArgs {
  std::string state;
  std::string kind;
  std::string scope = "global";
  std::string scoring = "induced";
  std::uint64_t seed = 0;
};

struct CheckNeArgs {
  std::string state;
  double tolerance = 1e-4;
};

int simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err);
int attack_plan(const AttackPlanArgs& a, std::ostream& out, std::ostream& err);
int check_ne(const CheckNeArgs& a, std::ostream& out, std::ostream& err);
int eigen(const std::string& graph_path, std::ostream& out, std::ostream& err);

// JSON {"nodes": n, "edges": [[i, j, w], ...]} or a text edge list with one
// "i j [w]" per line ('#' comments, optional "nodes N" line, w defaults to 1).
WeightedGraph load_graph(const std::string& path);

}  // namespace mrn::cli
