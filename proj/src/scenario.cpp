#include "mrn/scenario.hpp"

#include "mrn/errors.hpp"
#include "mrn/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>

namespace mrn {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number_or(const json& j, const char* key, double def, const std::string& where) {
  return find(j, key) ? number_field(j, key, where) : def;
}

int int_or(const json& j, const char* key, int def, const std::string& where) {
  return find(j, key) ? int_field(j, key, where) : def;
}

bool bool_or(const json& j, const char* key, bool def, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return v->get<bool>();
}

std::array<double, 3> triple(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected [x, y, z]");
  std::array<double, 3> t{};
  for (std::size_t c = 0; c < 3; ++c) {
    if (!j[c].is_number()) throw ParseError(where + ": coordinates must be numbers");
    t[c] = j[c].get<double>();
  }
  return t;
}

LayerSpec layer_from_json(const json& j, const std::string& where, std::uint64_t seed, int layer) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  LayerSpec l;
  l.min_sq_distance = number_or(j, "min_sq_distance", 0.4, where);
  if (const json* b = find(j, "box")) {
    PositionBox box;
    box.min = triple(require_field(*b, "min", where + ".box"), where + ".box.min");
    box.max = triple(require_field(*b, "max", where + ".box"), where + ".box.max");
    for (std::size_t c = 0; c < 3; ++c) {
      if (box.min[c] > box.max[c]) throw ValidationError(where + ".box: min exceeds max");
    }
    l.box = box;
  }
  if (const json* a = find(j, "pinned_axes")) l.pinned_axes = axes_from_json(*a, where + ".pinned_axes");

  const json& pos = require_field(j, "positions", where);
  if (pos.is_string()) {
    if (pos.get<std::string>() != "random") throw ParseError(where + ".positions: expected \"random\" or a list");
    if (!l.box) throw ValidationError(where + ": random positions need a box");
    const int count = int_field(j, "count", where);
    if (count < 1) throw ValidationError(where + ".count: a layer needs at least one robot");
    l.count = static_cast<std::size_t>(count);
    l.positions = sample_positions(l.count, *l.box, l.min_sq_distance, seed, layer);
  } else {
    l.positions = points_from_json(pos, where + ".positions");
    if (l.positions.empty()) throw ValidationError(where + ": a layer needs at least one robot");
    l.count = l.positions.size();
    if (find(j, "count") && int_field(j, "count", where) != static_cast<int>(l.count)) {
      throw ValidationError(where + ".count does not match the number of positions");
    }
  }
  return l;
}

json layer_to_json(const LayerSpec& l) {
  json j = {{"count", l.count},
            {"positions", points_to_json(l.positions)},
            {"min_sq_distance", l.min_sq_distance},
            {"pinned_axes", axes_to_json(l.pinned_axes)}};
  if (l.box) {
    j["box"] = {{"min", l.box->min}, {"max", l.box->max}};
  }
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + p.string());
}

}  // namespace

std::vector<Point> sample_positions(std::size_t count, const PositionBox& box, double min_sq_distance,
                                    std::uint64_t seed, int layer) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(layer)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> pts;
  constexpr int kAttempts = 10000;
  for (int attempt = 0; pts.size() < count; ++attempt) {
    if (attempt >= kAttempts) {
      throw ValidationError("layer " + std::to_string(layer) + ": cannot place " + std::to_string(count) +
                            " robots in the box at the minimum distance");
    }
    Point p;
    for (int c = 0; c < 3; ++c) {
      const auto k = static_cast<std::size_t>(c);
      p(c) = box.min[k] + (box.max[k] - box.min[k]) * unit(rng);
    }
    bool ok = true;
    for (const auto& q : pts) ok = ok && (p - q).squaredNorm() >= min_sq_distance;
    if (ok) pts.push_back(p);
  }
  return pts;
}

Scenario scenario_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) throw ParseError(source + ": expected an object at the top level");
  Scenario s;
  if (const json* v = find(j, "name")) {
    if (!v->is_string()) throw ParseError(source + ".name: expected a string");
    s.name = v->get<std::string>();
  }
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) throw ParseError(source + ".seed: expected a nonnegative integer");
    s.seed = v->get<std::uint64_t>();
  }

  const json& layers = require_field(j, "layers", source);
  if (!layers.is_array() || layers.size() != 2) throw ParseError(source + ".layers: expected two layers");
  for (std::size_t l = 0; l < 2; ++l) {
    s.layers[l] = layer_from_json(layers[l], source + ".layers[" + std::to_string(l) + "]", s.seed,
                                  static_cast<int>(l + 1));
  }

  s.models.intra = WeightModel{1.5, 5.0, 4.0};
  if (const json* m = find(j, "models")) {
    const auto where = source + ".models";
    if (const json* v = find(*m, "inter1")) s.models.inter1 = weight_model_from_json(*v, where + ".inter1");
    if (const json* v = find(*m, "inter2")) s.models.inter2 = weight_model_from_json(*v, where + ".inter2");
    if (const json* v = find(*m, "intra")) s.models.intra = weight_model_from_json(*v, where + ".intra");
  }
  s.models.inter1.validate();
  s.models.inter2.validate();
  s.models.intra.validate();

  if (const json* v = find(j, "schedule")) {
    const auto where = source + ".schedule";
    s.schedule.s1 = int_or(*v, "s1", s.schedule.s1, where);
    s.schedule.s2 = int_or(*v, "s2", s.schedule.s2, where);
    s.schedule.o1 = int_or(*v, "o1", s.schedule.o1, where);
    s.schedule.o2 = int_or(*v, "o2", s.schedule.o2, where);
  }
  s.schedule.validate();

  s.solver.trust_radius = default_trust_radius(s.models);
  if (const json* v = find(j, "solver")) {
    const auto where = source + ".solver";
    auto& o = s.solver;
    o.tolerance = number_or(*v, "tolerance", o.tolerance, where);
    o.safeguard = bool_or(*v, "safeguard", o.safeguard, where);
    o.trust_radius = number_or(*v, "trust_radius", o.trust_radius, where);
    o.max_backtracks = int_or(*v, "max_backtracks", o.max_backtracks, where);
    o.backtrack_tolerance = number_or(*v, "backtrack_tolerance", o.backtrack_tolerance, where);
    o.gain_tolerance = number_or(*v, "gain_tolerance", o.gain_tolerance, where);
    if (const json* c = find(*v, "coupling")) {
      const std::string name = c->is_string() ? c->get<std::string>() : "";
      if (name == "secant_bound") o.coupling = DistanceCoupling::SecantBound;
      else if (name == "secant_equality") o.coupling = DistanceCoupling::SecantEquality;
      else throw ParseError(where + ".coupling: expected \"secant_bound\" or \"secant_equality\"");
    }
    if (o.tolerance <= 0.0) throw ValidationError(where + ".tolerance must be positive");
    if (o.trust_radius <= 0.0) throw ValidationError(where + ".trust_radius must be positive");
    if (o.max_backtracks < 0) throw ValidationError(where + ".max_backtracks must be nonnegative");
  }

  if (const json* v = find(j, "limits")) {
    const auto where = source + ".limits";
    auto& l = s.limits;
    l.max_steps = int_or(*v, "max_steps", l.max_steps, where);
    l.conv_tolerance = number_or(*v, "conv_tolerance", l.conv_tolerance, where);
    l.pos_tolerance = number_or(*v, "pos_tolerance", l.pos_tolerance, where);
    l.ne_tolerance = number_or(*v, "ne_tolerance", l.ne_tolerance, where);
    if (l.max_steps < 1) throw ValidationError(where + ".max_steps must be positive");
  }

  const auto cfg = initial_configuration(s);
  cfg.validate();
  if (const json* v = find(j, "attacks")) {
    if (!v->is_array()) throw ParseError(source + ".attacks: expected a list");
    for (std::size_t k = 0; k < v->size(); ++k) {
      auto e = attack_event_from_json((*v)[k], source + ".attacks[" + std::to_string(k) + "]");
      e.validate(cfg.size());
      s.attacks.push_back(e);
    }
  }
  return s;
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return scenario_from_json(j, source);
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_text_file(path), path); }

json scenario_to_json(const Scenario& s) {
  json attacks = json::array();
  for (const auto& e : s.attacks) attacks.push_back(to_json(e));
  const auto& o = s.solver;
  const auto& l = s.limits;
  return {{"name", s.name},
          {"seed", s.seed},
          {"layers", {layer_to_json(s.layers[0]), layer_to_json(s.layers[1])}},
          {"models", to_json(s.models)},
          {"schedule", {{"s1", s.schedule.s1}, {"s2", s.schedule.s2}, {"o1", s.schedule.o1}, {"o2", s.schedule.o2}}},
          {"solver",
           {{"tolerance", o.tolerance},
            {"safeguard", o.safeguard},
            {"trust_radius", o.trust_radius},
            {"max_backtracks", o.max_backtracks},
            {"backtrack_tolerance", o.backtrack_tolerance},
            {"gain_tolerance", o.gain_tolerance},
            {"coupling", to_string(o.coupling)}}},
          {"attacks", attacks},
          {"limits",
           {{"max_steps", l.max_steps},
            {"conv_tolerance", l.conv_tolerance},
            {"pos_tolerance", l.pos_tolerance},
            {"ne_tolerance", l.ne_tolerance}}}};
}

std::string scenario_echo(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

LayeredConfiguration initial_configuration(const Scenario& s) {
  return LayeredConfiguration(s.layers[0].positions, s.layers[1].positions, s.models,
                              s.layers[0].min_sq_distance, s.layers[1].min_sq_distance);
}

GameSetup to_game_setup(const Scenario& s) {
  GameSetup g;
  g.initial = initial_configuration(s);
  g.schedule = s.schedule;
  g.attacks = s.attacks;
  auto& o = g.options;
  o.safeguard = s.solver.safeguard;
  o.trust_radius = s.solver.trust_radius;
  o.coupling = s.solver.coupling;
  o.pinned = {s.layers[0].pinned_axes, s.layers[1].pinned_axes};
  o.accept.backtrack_tolerance = s.solver.backtrack_tolerance;
  o.accept.max_backtracks = s.solver.max_backtracks;
  o.accept.gain_tolerance = s.solver.gain_tolerance;
  o.conv_tolerance = s.limits.conv_tolerance;
  o.pos_tolerance = s.limits.pos_tolerance;
  o.ne_tolerance = s.limits.ne_tolerance;
  o.max_steps = s.limits.max_steps;
  return g;
}

InteriorPointSolver::Options solver_options(const Scenario& s) {
  InteriorPointSolver::Options o;
  o.tolerance = s.solver.tolerance;
  return o;
}

RunArtifacts run_scenario(const Scenario& s) {
  RunArtifacts a;
  a.scenario = s;
  const InteriorPointSolver solver(solver_options(s));
  a.run = run_until_convergence(to_game_setup(s), solver);

  const auto& t = a.run.trace;
  json reports = json::array();
  for (const auto& e : t.attacks) {
    if (!e.resolved() || e.start_step >= static_cast<int>(t.rows.size())) continue;
    const auto& before = e.start_step == 0 ? t.initial : t.rows[static_cast<std::size_t>(e.start_step - 1)].state;
    AttackReport r{e, e.start_step, attack_impact(before, e)};
    json j = {{"attack", to_json(e)},
              {"pre_lambda2", r.impact.pre_lambda2},
              {"post_lambda2", r.impact.post_lambda2},
              {"drop", r.impact.drop}};
    if (r.impact.largest_component_lambda2) j["largest_component_lambda2"] = *r.impact.largest_component_lambda2;
    reports.push_back(j);
    a.attack_reports.push_back(std::move(r));
  }

  a.trace_csv = trace_csv(t);
  a.trace_json = run_json(a.run);
  const auto& rep = a.run.report;
  json report = {{"scenario", s.name},
                 {"converged", rep.converged},
                 {"steps_to_convergence", rep.steps_to_convergence},
                 {"player_updates", rep.player_updates},
                 {"final_lambda2", rep.final_lambda2},
                 {"initial_lambda2", t.initial_lambda2},
                 {"slack1", rep.slack1},
                 {"slack2", rep.slack2},
                 {"monotonicity_violations", rep.monotonicity_violations},
                 {"infeasible_solves", rep.infeasible_solves},
                 {"numerical_trouble", rep.numerical_trouble},
                 {"attacks", reports}};
  a.report_json = report.dump(2) + "\n";
  a.echo = scenario_echo(s);
  return a;
}

void write_artifacts(const RunArtifacts& a, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  write_file(d / "trace.csv", a.trace_csv);
  write_file(d / "trace.json", a.trace_json);
  write_file(d / "report.json", a.report_json);
  write_file(d / "scenario.echo.json", a.echo);
}

}  // namespace mrn
