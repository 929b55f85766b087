#include "mrn/game_engine.hpp"

#include "mrn/errors.hpp"
#include "mrn/json_io.hpp"
#include "mrn/spectral_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace mrn {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string event_flag(const AttackEvent& e) {
  std::string s = to_string(e.kind);
  s += ':';
  if (e.kind == AttackKind::Jam) {
    s += std::to_string(e.link->first) + "-" + std::to_string(e.link->second);
  } else {
    s += std::to_string(*e.node);
  }
  return s;
}

SolveAudit audit(const SolveOutcome& o) {
  SolveAudit a;
  a.status = o.status;
  a.iterations = o.stats.iterations;
  if (o.status == SolveStatus::Optimal) {
    a.alpha = o.alpha;
    a.linearized_lambda2 = o.linearized_lambda2;
    a.z_edm_valid = edm_validity(o.z);
  }
  return a;
}

// Raw scheme: take the first optimal proposal as is.
StepResult raw_step(const SubproblemSpec& spec, const ConicSolver& solver,
                    const AcceptOptions& opts) {
  StepResult r;
  r.state = spec.state;
  r.lambda_before = step_connectivity(spec.state, spec.mask);
  r.lambda_after = r.lambda_before;
  r.outcome = solve_subproblem(build_player_subproblem(spec), solver);
  r.solves.push_back(r.outcome);
  const auto& o = r.outcome;
  if (o.status != SolveStatus::Optimal || o.alpha - r.lambda_before <= opts.gain_tolerance) {
    r.null_step = true;
    return r;
  }
  std::vector<Point> layer;
  for (auto i : spec.state.layer_nodes(spec.acting_player)) layer.push_back(o.next_positions[i]);
  auto proposal = spec.state.with_layer(spec.acting_player, std::move(layer));
  if (proposal.min_distance_margin() < 0.0) {
    r.null_step = true;
    return r;
  }
  r.lambda_after = step_connectivity(proposal, spec.mask);
  r.state = std::move(proposal);
  return r;
}

void throw_if_infeasible(const StepResult& r, int player, int step) {
  for (const auto& s : r.solves) {
    if (s.status == SolveStatus::Infeasible) {
      std::ostringstream msg;
      msg << "subproblem of player " << player;
      if (step >= 0) msg << " at step " << step;
      msg << " reported infeasible after " << s.stats.iterations << " iterations";
      throw SolverFailure(msg.str());
    }
  }
}

double max_displacement(const LayeredConfiguration& a, const LayeredConfiguration& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a.position(i) - b.position(i)).norm());
  return m;
}

}  // namespace

void GameSchedule::validate() const {
  if (s1 <= 0 || s2 <= 0) throw ValidationError("schedule periods s1, s2 must be positive");
  if (o1 < 0 || o2 < 0) throw ValidationError("schedule offsets o1, o2 must be nonnegative");
  // o1 + a s1 = o2 + b s2 has a solution iff gcd(s1, s2) divides o1 - o2.
  if ((o1 - o2) % std::gcd(s1, s2) == 0) {
    throw ValidationError("schedule lets both players act at the same step (o1 - o2 divisible by gcd(s1, s2))");
  }
}

int GameSchedule::actor(int step) const {
  if (step >= o1 && (step - o1) % s1 == 0) return 1;
  if (step >= o2 && (step - o2) % s2 == 0) return 2;
  return 0;
}

int GameSchedule::round_length() const { return std::lcm(s1, s2); }

ActiveAttacks attacks_at(const std::vector<AttackEvent>& events, int step) {
  ActiveAttacks a;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (!e.active_at(step)) continue;
    if (!e.resolved()) {
      throw InvalidSpec("attack " + std::to_string(k) + " is active at step " + std::to_string(step) +
                        " without a resolved target");
    }
    switch (e.kind) {
      case AttackKind::Spoof: a.frozen.insert(*e.node); break;
      case AttackKind::Jam: a.mask.jam(e.link->first, e.link->second); break;
      case AttackKind::Dos: a.mask.remove(*e.node); break;
    }
    a.events.push_back(k);
  }
  return a;
}

SubproblemSpec make_subproblem_spec(const LayeredConfiguration& state, int player,
                                    const ActiveAttacks& active, const EngineOptions& opts) {
  SubproblemSpec s;
  s.acting_player = player;
  s.state = state;
  s.frozen = active.frozen;
  s.mask = active.mask;
  if (opts.safeguard) s.trust_radius = opts.trust_radius.value_or(default_trust_radius(state.models()));
  s.coupling = opts.coupling;
  s.pinned = opts.pinned;
  return s;
}

StepOutcome step_game(const LayeredConfiguration& state, const GameSchedule& schedule,
                      const std::vector<AttackEvent>& attacks, int step, const EngineOptions& opts,
                      const ConicSolver& solver) {
  const ActiveAttacks active = attacks_at(attacks, step);
  StepOutcome out;
  out.row.step = step;
  out.row.actor = schedule.actor(step);

  std::string flags;
  for (auto k : active.events) {
    if (!flags.empty()) flags += '|';
    flags += event_flag(attacks[k]);
  }
  out.row.attack_flags = flags.empty() ? "-" : flags;

  if (out.row.actor == 0) {
    out.state = state;
  } else {
    const auto spec = make_subproblem_spec(state, out.row.actor, active, opts);
    StepResult r = opts.safeguard ? best_response(spec, solver, opts.accept)
                                  : raw_step(spec, solver, opts.accept);
    throw_if_infeasible(r, out.row.actor, step);
    out.state = r.state;
    if (r.outcome.status == SolveStatus::Optimal) out.row.alpha = r.outcome.alpha;
    out.row.backtracks = r.backtracks;
    out.row.solves = static_cast<int>(r.solves.size());
    out.row.null_step = r.null_step;
    for (const auto& s : r.solves) out.row.audits.push_back(audit(s));
    out.step = std::move(r);
  }
  out.row.state = out.state;
  out.row.lambda2 = step_connectivity(out.state, active.mask);
  return out;
}

EquilibriumReport check_nash(const LayeredConfiguration& state, const ActiveAttacks& active,
                             const EngineOptions& opts, const ConicSolver& solver) {
  EquilibriumReport rep;
  rep.final_lambda2 = step_connectivity(state, active.mask);
  double slack[2] = {0.0, 0.0};
  for (int player = 1; player <= 2; ++player) {
    if (state.layer_nodes(player).empty()) continue;
    const auto spec = make_subproblem_spec(state, player, active, opts);
    const StepResult r = best_response(spec, solver, opts.accept);
    throw_if_infeasible(r, player, -1);
    for (const auto& s : r.solves) {
      if (s.status == SolveStatus::NumericalTrouble) ++rep.numerical_trouble;
    }
    slack[player - 1] = std::max(0.0, r.lambda_after - r.lambda_before);
  }
  rep.slack1 = slack[0];
  rep.slack2 = slack[1];
  rep.converged = rep.slack1 <= opts.ne_tolerance && rep.slack2 <= opts.ne_tolerance;
  return rep;
}

GameRun run_until_convergence(const GameSetup& setup, const ConicSolver& solver) {
  setup.schedule.validate();
  setup.initial.validate();
  if (setup.options.max_steps <= 0) throw ValidationError("max_steps must be positive");
  const std::size_t n = setup.initial.size();
  for (const auto& e : setup.attacks) e.validate(n);

  const auto& opts = setup.options;
  const int round = setup.schedule.round_length();

  // Stagnation is only meaningful once the attack set stops changing.
  int steady_from = -1;
  for (const auto& e : setup.attacks) {
    steady_from = std::max(steady_from, e.start_step);
    if (!e.persistent()) steady_from = std::max(steady_from, e.start_step + e.duration);
  }

  GameRun run;
  auto& trace = run.trace;
  trace.initial = setup.initial;
  trace.initial_lambda2 = step_connectivity(setup.initial, {});
  trace.attacks = setup.attacks;

  auto& rep = run.report;
  LayeredConfiguration state = setup.initial;
  ActiveAttacks last_active;
  int infeasible = 0;
  int trouble = 0;
  int violations = 0;
  int updates = 0;
  std::optional<EquilibriumReport> nash;

  for (int k = 0; k < opts.max_steps; ++k) {
    for (std::size_t e = 0; e < trace.attacks.size(); ++e) {
      auto& ev = trace.attacks[e];
      if (ev.start_step != k || ev.resolved()) continue;
      // Mask of the other attacks already in force at this step.
      std::vector<AttackEvent> others;
      for (std::size_t f = 0; f < trace.attacks.size(); ++f) {
        if (f != e && trace.attacks[f].resolved()) others.push_back(trace.attacks[f]);
      }
      ev = resolve_target(state, ev, attacks_at(others, k).mask);
    }

    auto out = step_game(state, setup.schedule, trace.attacks, k, opts, solver);
    const ActiveAttacks active = attacks_at(trace.attacks, k);
    for (const auto& a : out.row.audits) {
      if (a.status == SolveStatus::NumericalTrouble) ++trouble;
      if (a.status == SolveStatus::Infeasible) ++infeasible;
    }
    if (out.row.actor != 0) ++updates;

    const double prev_lambda = k == 0 ? trace.initial_lambda2 : trace.rows.back().lambda2;
    const bool same_attacks = active.events == last_active.events;
    if (same_attacks && out.row.lambda2 < prev_lambda - opts.accept.backtrack_tolerance) ++violations;

    state = out.state;
    trace.rows.push_back(std::move(out.row));
    last_active = active;

    if (k - round < steady_from) continue;
    const int back = k - round;
    const double lam_back = back < 0 ? trace.initial_lambda2 : trace.rows[static_cast<std::size_t>(back)].lambda2;
    const auto& cfg_back = back < 0 ? trace.initial : trace.rows[static_cast<std::size_t>(back)].state;
    const bool stagnant = std::abs(trace.rows.back().lambda2 - lam_back) < opts.conv_tolerance &&
                          max_displacement(state, cfg_back) < opts.pos_tolerance;
    if (!stagnant) continue;
    auto check = check_nash(state, active, opts, solver);
    trouble += check.numerical_trouble;
    if (check.converged) {
      check.steps_to_convergence = k;
      nash = check;
      break;
    }
  }

  if (nash) {
    rep = *nash;
  } else {
    rep = check_nash(state, attacks_at(trace.attacks, static_cast<int>(trace.rows.size()) - 1), opts, solver);
    trouble += rep.numerical_trouble;
    rep.converged = false;
    rep.steps_to_convergence = -1;
  }
  rep.player_updates = updates;
  rep.final_lambda2 = trace.rows.back().lambda2;
  rep.monotonicity_violations = violations;
  rep.infeasible_solves = infeasible;
  rep.numerical_trouble = trouble;
  return run;
}

std::string trace_csv_header(std::size_t robots) {
  std::string h = "step,actor,lambda2,alpha,backtracks,attacks";
  for (std::size_t i = 0; i < robots; ++i) {
    const auto s = std::to_string(i);
    h += ",x" + s + ",y" + s + ",z" + s;
  }
  return h;
}

std::string trace_csv(const GameTrace& trace) {
  std::string out = trace_csv_header(trace.initial.size());
  out += '\n';
  for (const auto& r : trace.rows) {
    out += std::to_string(r.step) + ',' + std::to_string(r.actor) + ',' + fmt(r.lambda2) + ',';
    if (r.alpha) out += fmt(*r.alpha);
    out += ',' + std::to_string(r.backtracks) + ',' + r.attack_flags;
    for (std::size_t i = 0; i < r.state.size(); ++i) {
      const auto& p = r.state.position(i);
      out += ',' + fmt(p.x()) + ',' + fmt(p.y()) + ',' + fmt(p.z());
    }
    out += '\n';
  }
  return out;
}

std::string run_json(const GameRun& run) {
  using nlohmann::json;
  const auto& t = run.trace;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json audits = json::array();
    for (const auto& a : r.audits) {
      audits.push_back({{"status", to_string(a.status)},
                        {"iterations", a.iterations},
                        {"alpha", a.alpha},
                        {"linearized_lambda2", a.linearized_lambda2},
                        {"z_edm_valid", a.z_edm_valid}});
    }
    rows.push_back({{"step", r.step},
                    {"actor", r.actor},
                    {"lambda2", r.lambda2},
                    {"alpha", r.alpha ? json(*r.alpha) : json(nullptr)},
                    {"backtracks", r.backtracks},
                    {"solves", r.solves},
                    {"null_step", r.null_step},
                    {"attacks", r.attack_flags},
                    {"positions", points_to_json(r.state.positions())},
                    {"solver", audits}});
  }
  json attacks = json::array();
  for (const auto& e : t.attacks) attacks.push_back(to_json(e));
  const auto& rep = run.report;
  json doc = {
      {"trace",
       {{"initial", points_to_json(t.initial.positions())},
        {"initial_lambda2", t.initial_lambda2},
        {"attacks", attacks},
        {"rows", rows}}},
      {"report",
       {{"converged", rep.converged},
        {"steps_to_convergence", rep.steps_to_convergence},
        {"player_updates", rep.player_updates},
        {"final_lambda2", rep.final_lambda2},
        {"slack1", rep.slack1},
        {"slack2", rep.slack2},
        {"monotonicity_violations", rep.monotonicity_violations},
        {"infeasible_solves", rep.infeasible_solves},
        {"numerical_trouble", rep.numerical_trouble}}}};
  return doc.dump(2) + "\n";
}

}  // namespace mrn
