#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace mrn::cli;
  CLI::App app{"Two-layer robot network connectivity game: simulation, attack planning and analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run scenarios and write trace artifacts");
  simulate_cmd->add_option("--scenario", sim.scenarios, "Scenario file (repeatable)")->required();
  simulate_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  simulate_cmd->add_option("--jobs", sim.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--snapshot", sim.snapshot_steps, "Also write the state at this step (repeatable)");

  AttackPlanArgs plan;
  auto* plan_cmd = app.add_subcommand("attack-plan", "Score worst-case attack targets on a state snapshot");
  plan_cmd->add_option("--state", plan.state, "State snapshot JSON")->required();
  plan_cmd->add_option("--kind", plan.kind, "spoof, jam or dos")->required()->check(CLI::IsMember({"spoof", "jam", "dos"}));
  plan_cmd->add_option("--scope", plan.scope, "global, layer1 or layer2")->check(CLI::IsMember({"global", "layer1", "layer2"}));
  plan_cmd->add_option("--scoring", plan.scoring, "induced or restricted")->check(CLI::IsMember({"induced", "restricted"}));
  plan_cmd->add_option("--seed", plan.seed, "Seed of the eigenspace rotations");

  CheckNeArgs ne;
  auto* ne_cmd = app.add_subcommand("check-ne", "Verify that a state is a Nash equilibrium");
  ne_cmd->add_option("--state", ne.state, "State snapshot JSON")->required();
  ne_cmd->add_option("--tol", ne.tolerance, "Slack tolerance")->check(CLI::PositiveNumber);

  std::string graph;
  auto* eigen_cmd = app.add_subcommand("eigen", "Algebraic connectivity and Fiedler vector of a graph");
  eigen_cmd->add_option("--graph", graph, "Edge list or JSON graph")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*simulate_cmd) return simulate(sim, std::cout, std::cerr);
  if (*plan_cmd) return attack_plan(plan, std::cout, std::cerr);
  if (*ne_cmd) return check_ne(ne, std::cout, std::cerr);
  return eigen(graph, std::cout, std::cerr);
}
