// Alternating best-response formation game: update schedule, attack
// activation, convergence detection, equilibrium verification and traces.

#pragma once

#include "mrn/attacks.hpp"
#include "mrn/conic_program.hpp"
#include "mrn/layered_network.hpp"
#include "mrn/sdp_subproblem.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mrn {

/// Player gamma acts at steps o_gamma + m * s_gamma.
struct GameSchedule {
  int s1 = 2;
  int s2 = 2;
  int o1 = 0;
  int o2 = 1;

  // Throws ValidationError on non-positive periods, negative offsets, or
  // offsets that make both players act at some common step.
  void validate() const;
  // 1, 2, or 0 when nobody acts.
  int actor(int step) const;
  // lcm(s1, s2).
  int round_length() const;

  friend bool operator==(const GameSchedule&, const GameSchedule&) = default;
};

struct EngineOptions {
  // Off reproduces the raw scheme: no trust region and no backtracking.
  bool safeguard = true;
  // Used when the safeguard is on; none means default_trust_radius(models).
  std::optional<double> trust_radius;
  DistanceCoupling coupling = DistanceCoupling::SecantBound;
  PinnedAxes pinned{};
  AcceptOptions accept;
  double conv_tolerance = 1e-4;
  double pos_tolerance = 1e-4;
  double ne_tolerance = 1e-4;
  int max_steps = 100;

  friend bool operator==(const EngineOptions&, const EngineOptions&) = default;
};

// Constraint-side effect of the attacks active at one step.
struct ActiveAttacks {
  std::set<std::size_t> frozen;
  LinkMask mask;
  std::vector<std::size_t> events;  // indices into the attack list
};

// Every event active at `step` must already have a resolved target.
ActiveAttacks attacks_at(const std::vector<AttackEvent>& events, int step);

SubproblemSpec make_subproblem_spec(const LayeredConfiguration& state, int player,
                                    const ActiveAttacks& active, const EngineOptions& opts);

// What each subproblem solve of a step reported.
struct SolveAudit {
  SolveStatus status = SolveStatus::NumericalTrouble;
  int iterations = 0;
  double alpha = 0.0;
  double linearized_lambda2 = 0.0;
  bool z_edm_valid = false;
};

struct TraceRow {
  int step = 0;
  int actor = 0;
  LayeredConfiguration state;  // accepted configuration after the step
  double lambda2 = 0.0;        // surviving robots, attacks of this step applied
  std::optional<double> alpha;
  int backtracks = 0;
  int solves = 0;
  bool null_step = false;
  std::string attack_flags;  // "-" when nothing is active
  std::vector<SolveAudit> audits;
};

struct GameTrace {
  LayeredConfiguration initial;
  double initial_lambda2 = 0.0;
  std::vector<AttackEvent> attacks;  // targets resolved when each attack started
  std::vector<TraceRow> rows;
};

struct EquilibriumReport {
  bool converged = false;
  int steps_to_convergence = -1;
  int player_updates = 0;
  double final_lambda2 = 0.0;
  double slack1 = 0.0;
  double slack2 = 0.0;
  int monotonicity_violations = 0;
  int infeasible_solves = 0;
  int numerical_trouble = 0;
};

struct StepOutcome {
  LayeredConfiguration state;
  TraceRow row;
  std::optional<StepResult> step;
};

StepOutcome step_game(const LayeredConfiguration& state, const GameSchedule& schedule,
                      const std::vector<AttackEvent>& attacks, int step, const EngineOptions& opts,
                      const ConicSolver& solver);

// Slack of each player from `state` under `active`; converged iff both are
// within opts.ne_tolerance.
EquilibriumReport check_nash(const LayeredConfiguration& state, const ActiveAttacks& active,
                             const EngineOptions& opts, const ConicSolver& solver);

struct GameSetup {
  LayeredConfiguration initial;
  GameSchedule schedule;
  std::vector<AttackEvent> attacks;
  EngineOptions options;
};

struct GameRun {
  GameTrace trace;
  EquilibriumReport report;
};

// Throws SolverFailure if a subproblem built from a valid state is reported
// infeasible.
GameRun run_until_convergence(const GameSetup& setup, const ConicSolver& solver);

// step,actor,lambda2,alpha,backtracks,attacks then x,y,z per robot.
std::string trace_csv_header(std::size_t robots);
std::string trace_csv(const GameTrace& trace);
std::string run_json(const GameRun& run);

}  // namespace mrn
