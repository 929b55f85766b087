#include "mrn/json_io.hpp"

#include "mrn/errors.hpp"

#include <fstream>
#include <sstream>

namespace mrn {

using nlohmann::json;

namespace {

std::size_t index_value(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError(where + ": expected a nonnegative integer index");
  }
  return j.get<std::size_t>();
}

json index_set(const std::set<std::size_t>& s) {
  json a = json::array();
  for (auto i : s) a.push_back(i);
  return a;
}

}  // namespace

const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double number_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require_field(j, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

int int_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require_field(j, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

json to_json(const WeightModel& m) {
  return {{"rho1", m.rho1}, {"rho2", m.rho2}, {"alpha", m.decay_alpha}};
}

WeightModel weight_model_from_json(const json& j, const std::string& where) {
  WeightModel m;
  m.rho1 = number_field(j, "rho1", where);
  m.rho2 = number_field(j, "rho2", where);
  m.decay_alpha = number_field(j, "alpha", where);
  return m;
}

json to_json(const LinkModels& m) {
  return {{"inter1", to_json(m.inter1)}, {"inter2", to_json(m.inter2)}, {"intra", to_json(m.intra)}};
}

LinkModels link_models_from_json(const json& j, const std::string& where) {
  LinkModels m;
  m.inter1 = weight_model_from_json(require_field(j, "inter1", where), where + ".inter1");
  m.inter2 = weight_model_from_json(require_field(j, "inter2", where), where + ".inter2");
  m.intra = weight_model_from_json(require_field(j, "intra", where), where + ".intra");
  return m;
}

json points_to_json(const std::vector<Point>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x(), p.y(), p.z()});
  return a;
}

std::vector<Point> points_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of [x, y, z]");
  std::vector<Point> pts;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& p = j[k];
    const auto at = where + "[" + std::to_string(k) + "]";
    if (!p.is_array() || p.size() != 3) throw ParseError(at + ": expected [x, y, z]");
    Point q;
    for (std::size_t c = 0; c < 3; ++c) {
      if (!p[c].is_number()) throw ParseError(at + ": coordinates must be numbers");
      q(static_cast<Eigen::Index>(c)) = p[c].get<double>();
    }
    pts.push_back(q);
  }
  return pts;
}

json axes_to_json(const std::array<bool, 3>& axes) {
  static const char* names[3] = {"x", "y", "z"};
  json a = json::array();
  for (std::size_t c = 0; c < 3; ++c) {
    if (axes[c]) a.push_back(names[c]);
  }
  return a;
}

std::array<bool, 3> axes_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of axis names");
  std::array<bool, 3> axes{};
  for (const auto& v : j) {
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "x") axes[0] = true;
    else if (s == "y") axes[1] = true;
    else if (s == "z") axes[2] = true;
    else throw ParseError(where + ": unknown axis " + v.dump());
  }
  return axes;
}

json to_json(const AttackEvent& e) {
  json j = {{"kind", to_string(e.kind)}};
  if (e.kind == AttackKind::Jam && e.link) {
    j["target"] = {e.link->first, e.link->second};
  } else if (e.kind != AttackKind::Jam && e.node) {
    j["target"] = *e.node;
  } else {
    j["target"] = "worst_case";
  }
  if (e.worst_case && e.resolved()) j["worst_case"] = true;
  j["scope"] = to_string(e.scope);
  j["scoring"] = to_string(e.scoring);
  j["start"] = e.start_step;
  if (e.persistent()) {
    j["duration"] = "persistent";
  } else {
    j["duration"] = e.duration;
  }
  return j;
}

AttackEvent attack_event_from_json(const json& j, const std::string& where) {
  AttackEvent e;
  const auto& kind = require_field(j, "kind", where);
  if (!kind.is_string()) throw ParseError(where + ".kind: expected a string");
  e.kind = parse_attack_kind(kind.get<std::string>());

  const auto& target = require_field(j, "target", where);
  const auto at = where + ".target";
  if (target.is_string()) {
    if (target.get<std::string>() != "worst_case") throw ParseError(at + ": expected \"worst_case\" or an index");
    e.worst_case = true;
  } else if (e.kind == AttackKind::Jam) {
    if (!target.is_array() || target.size() != 2) throw ParseError(at + ": a jam target is a link [i, j]");
    e.link = std::make_pair(index_value(target[0], at), index_value(target[1], at));
  } else {
    e.node = index_value(target, at);
  }
  if (auto it = j.find("worst_case"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError(where + ".worst_case: expected a boolean");
    e.worst_case = e.worst_case || it->get<bool>();
  }
  if (auto it = j.find("scope"); it != j.end()) {
    if (!it->is_string()) throw ParseError(where + ".scope: expected a string");
    e.scope = parse_attack_scope(it->get<std::string>());
  }
  if (auto it = j.find("scoring"); it != j.end()) {
    if (!it->is_string()) throw ParseError(where + ".scoring: expected a string");
    e.scoring = parse_scope_scoring(it->get<std::string>());
  }
  e.start_step = int_field(j, "start", where);
  const auto& d = require_field(j, "duration", where);
  if (d.is_string() && d.get<std::string>() == "persistent") {
    e.duration = kPersistent;
  } else if (d.is_number_integer()) {
    e.duration = d.get<int>();
  } else {
    throw ParseError(where + ".duration: expected an integer or \"persistent\"");
  }
  return e;
}

json to_json(const StateSnapshot& s) {
  json layers = json::array();
  for (int layer = 1; layer <= 2; ++layer) {
    layers.push_back({{"positions", points_to_json(layer == 1 ? s.config.layer1() : s.config.layer2())},
                      {"min_sq_distance", s.config.min_sq_distance(layer)},
                      {"pinned_axes", axes_to_json(s.pinned[static_cast<std::size_t>(layer - 1)])}});
  }
  json jammed = json::array();
  for (const auto& [i, j] : s.mask.jammed) jammed.push_back({i, j});
  return {{"step", s.step},
          {"layers", layers},
          {"models", to_json(s.config.models())},
          {"frozen", index_set(s.frozen)},
          {"jammed", jammed},
          {"removed", index_set(s.mask.removed)}};
}

StateSnapshot snapshot_from_json(const json& j) {
  const std::string where = "state";
  StateSnapshot s;
  if (auto it = j.find("step"); it != j.end()) s.step = int_field(j, "step", where);
  const auto& layers = require_field(j, "layers", where);
  if (!layers.is_array() || layers.size() != 2) throw ParseError("state.layers: expected two layers");
  std::vector<Point> pts[2];
  double d[2] = {0.0, 0.0};
  for (std::size_t l = 0; l < 2; ++l) {
    const auto at = "state.layers[" + std::to_string(l) + "]";
    pts[l] = points_from_json(require_field(layers[l], "positions", at), at + ".positions");
    if (layers[l].contains("min_sq_distance")) d[l] = number_field(layers[l], "min_sq_distance", at);
    if (layers[l].contains("pinned_axes")) s.pinned[l] = axes_from_json(layers[l]["pinned_axes"], at + ".pinned_axes");
  }
  const auto models = link_models_from_json(require_field(j, "models", where), "state.models");
  s.config = LayeredConfiguration(pts[0], pts[1], models, d[0], d[1]);
  const std::size_t n = s.config.size();
  auto read_set = [&](const char* key) {
    std::set<std::size_t> out;
    if (!j.contains(key)) return out;
    const auto& a = j[key];
    const auto at = where + "." + key;
    if (!a.is_array()) throw ParseError(at + ": expected a list of indices");
    for (const auto& v : a) {
      const auto i = index_value(v, at);
      if (i >= n) throw ValidationError(at + ": robot " + std::to_string(i) + " does not exist");
      out.insert(i);
    }
    return out;
  };
  s.frozen = read_set("frozen");
  s.mask.removed = read_set("removed");
  if (j.contains("jammed")) {
    const auto& a = j["jammed"];
    if (!a.is_array()) throw ParseError("state.jammed: expected a list of links");
    for (const auto& l : a) {
      if (!l.is_array() || l.size() != 2) throw ParseError("state.jammed: a link is [i, j]");
      const auto p = index_value(l[0], "state.jammed"), q = index_value(l[1], "state.jammed");
      if (p >= n || q >= n || p == q) throw ValidationError("state.jammed: invalid link");
      s.mask.jam(p, q);
    }
  }
  s.config.validate();
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StateSnapshot load_snapshot(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return snapshot_from_json(j);
}

std::string format_snapshot(const StateSnapshot& s) { return to_json(s).dump(2) + "\n"; }

StateSnapshot snapshot_at(const GameRun& run, int step, const PinnedAxes& pinned) {
  const auto& t = run.trace;
  if (step < -1 || step >= static_cast<int>(t.rows.size())) {
    throw ValidationError("no trace row for step " + std::to_string(step));
  }
  StateSnapshot s;
  s.step = step;
  s.pinned = pinned;
  if (step == -1) {
    s.config = t.initial;
    return s;
  }
  s.config = t.rows[static_cast<std::size_t>(step)].state;
  const auto active = attacks_at(t.attacks, step);
  s.frozen = active.frozen;
  s.mask = active.mask;
  return s;
}

}  // namespace mrn
