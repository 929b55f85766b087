// Scenario files: loading with defaults and validation, the resolved echo,
// conversion to a game setup, and the artifacts of a simulated run.

#pragma once

#include "mrn/attacks.hpp"
#include "mrn/game_engine.hpp"
#include "mrn/interior_point.hpp"
#include "mrn/layered_network.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mrn {

/// Axis-aligned sampling region; min == max on an axis fixes that coordinate.
struct PositionBox {
  std::array<double, 3> min{0.0, 0.0, 0.0};
  std::array<double, 3> max{1.0, 1.0, 0.0};

  friend bool operator==(const PositionBox&, const PositionBox&) = default;
};

struct LayerSpec {
  std::size_t count = 0;
  std::vector<Point> positions;  // resolved; sampled from box when the file says "random"
  std::optional<PositionBox> box;
  double min_sq_distance = 0.0;
  std::array<bool, 3> pinned_axes{};

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct SolverSettings {
  double tolerance = 1e-9;  // interior-point residual and gap target
  bool safeguard = true;
  double trust_radius = 0.0;  // resolved to default_trust_radius when omitted or null
  int max_backtracks = 6;
  double backtrack_tolerance = 1e-6;
  double gain_tolerance = 1e-7;
  DistanceCoupling coupling = DistanceCoupling::SecantBound;

  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct RunLimits {
  int max_steps = 100;
  double conv_tolerance = 1e-4;
  double pos_tolerance = 1e-4;
  double ne_tolerance = 1e-4;

  friend bool operator==(const RunLimits&, const RunLimits&) = default;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::array<LayerSpec, 2> layers;
  LinkModels models;
  GameSchedule schedule;
  SolverSettings solver;
  std::vector<AttackEvent> attacks;
  RunLimits limits;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Resolves defaults, samples random positions and validates. `source` names
// the input in error messages. Throws ParseError or ValidationError.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& source = "scenario");
Scenario parse_scenario(const std::string& text, const std::string& source = "scenario");
Scenario load_scenario(const std::string& path);

// The resolved scenario with every default written out; loading it again
// gives an identical Scenario.
nlohmann::json scenario_to_json(const Scenario& s);
std::string scenario_echo(const Scenario& s);

// Deterministic uniform sampling in the box with rejection of points closer
// than the minimum distance. Throws ValidationError when the box is too small.
std::vector<Point> sample_positions(std::size_t count, const PositionBox& box, double min_sq_distance,
                                    std::uint64_t seed, int layer);

LayeredConfiguration initial_configuration(const Scenario& s);
GameSetup to_game_setup(const Scenario& s);
InteriorPointSolver::Options solver_options(const Scenario& s);

/// Pre/post connectivity of an attack when it started.
struct AttackReport {
  AttackEvent event;
  int start_step = 0;
  AttackImpact impact;
};

struct RunArtifacts {
  Scenario scenario;
  GameRun run;
  std::vector<AttackReport> attack_reports;
  std::string trace_csv;
  std::string trace_json;
  std::string report_json;  // equilibrium report plus attack reports
  std::string echo;
};

// Solves with the scenario's interior-point settings. Throws SolverFailure.
RunArtifacts run_scenario(const Scenario& s);

// Writes trace.csv, trace.json, report.json and scenario.echo.json into dir,
// creating it if needed. Throws Error on I/O failure.
void write_artifacts(const RunArtifacts& a, const std::string& dir);

}  // namespace mrn
