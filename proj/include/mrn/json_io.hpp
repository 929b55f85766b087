// JSON forms of configurations, attack events and state snapshots shared by
// traces, scenarios and the command-line tools.

#pragma once

#include "mrn/attacks.hpp"
#include "mrn/game_engine.hpp"
#include "mrn/layered_network.hpp"

#include "json.hpp"

#include <set>
#include <string>

namespace mrn {

nlohmann::json to_json(const WeightModel& m);
WeightModel weight_model_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json to_json(const LinkModels& m);
LinkModels link_models_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json points_to_json(const std::vector<Point>& pts);
std::vector<Point> points_from_json(const nlohmann::json& j, const std::string& where);

// Axis letters "x", "y", "z".
nlohmann::json axes_to_json(const std::array<bool, 3>& axes);
std::array<bool, 3> axes_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json to_json(const AttackEvent& e);
AttackEvent attack_event_from_json(const nlohmann::json& j, const std::string& where);

/// Network state at one step: configuration plus the attack effects in force
/// and the pinned axes of each layer.
struct StateSnapshot {
  LayeredConfiguration config;
  std::set<std::size_t> frozen;
  LinkMask mask;
  PinnedAxes pinned{};
  int step = -1;  // -1 for the initial state
};

nlohmann::json to_json(const StateSnapshot& s);
StateSnapshot snapshot_from_json(const nlohmann::json& j);
StateSnapshot load_snapshot(const std::string& path);
std::string format_snapshot(const StateSnapshot& s);

// Snapshot of a trace row (or the initial state for step -1).
StateSnapshot snapshot_at(const GameRun& run, int step, const PinnedAxes& pinned);

// Reads a whole file; throws ParseError naming the path.
std::string read_text_file(const std::string& path);

// Typed field access with error messages naming the field.
const nlohmann::json& require_field(const nlohmann::json& j, const char* key, const std::string& where);
double number_field(const nlohmann::json& j, const char* key, const std::string& where);
int int_field(const nlohmann::json& j, const char* key, const std::string& where);

}  // namespace mrn
