// One player's discretized connectivity subproblem: maximize alpha subject to
// the linearized Laplacian LMI, the distance coupling between positions and
// squared-distance variables Z, the EDM LMI on Z, minimum distances, frozen
// robots and an optional trust region. Also the safeguarded step acceptance.

#pragma once

#include "mrn/conic_program.hpp"
#include "mrn/layered_network.hpp"

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <vector>

namespace mrn {

// How Z(k+1) is tied to the positions.
//  SecantEquality: Z_ij(k+1) = 2 x_ij(k+1)'x_ij(k) - |x_ij(k)|^2 for every pair.
//    Together with the EDM LMI this only admits affine motions of the whole
//    formation that keep the frozen robots in place.
//  SecantBound (default): the same relation as an upper bound on Z. Keeps the
//    underestimate Z <= |x_ij(k+1)|^2 that makes Z >= d a safe distance test.
enum class DistanceCoupling { SecantBound, SecantEquality };

const char* to_string(DistanceCoupling c);

// Which coordinates of each layer are held fixed (e.g. altitude).
using PinnedAxes = std::array<std::array<bool, 3>, 2>;

struct SubproblemSpec {
  int acting_player = 1;
  LayeredConfiguration state;
  std::set<std::size_t> frozen;  // spoofed robots
  LinkMask mask;                 // jammed links, removed robots
  std::optional<double> trust_radius;  // infinity norm per robot; none = unbounded
  DistanceCoupling coupling = DistanceCoupling::SecantBound;
  PinnedAxes pinned{};

  // Throws InvalidSpec on bad player or dangling indices.
  void validate() const;
};

// (rho2 - rho1) / 4, smallest over the three link classes.
double default_trust_radius(const LinkModels& models);

inline constexpr std::size_t kNoVariable = std::numeric_limits<std::size_t>::max();

/// A built subproblem plus the variable layout needed to read a solution.
struct PlayerProgram {
  ConicProgram program;
  std::size_t alpha = kNoVariable;
  std::vector<std::array<std::size_t, 3>> position;  // per robot, x/y/z
  std::vector<std::vector<std::size_t>> z;           // n x n, kNoVariable on diagonal
  std::vector<std::size_t> lmi_nodes;                // robots in the connectivity LMI
  // Linearized Laplacian over lmi_nodes as an affine map of the variables.
  PsdConstraint laplacian_model;
  std::size_t connectivity_block = 0;
  std::size_t edm_block = 1;
};

PlayerProgram build_player_subproblem(const SubproblemSpec& spec);

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalTrouble;
  std::vector<Point> next_positions;  // all robots
  double alpha = 0.0;
  Eigen::MatrixXd z;
  SolverStats stats;
  double linearized_lambda2 = 0.0;  // of laplacian_model at the solution
};

// Evaluates the linearized Laplacian at x and returns its lambda2 on the
// complement of the ones vector.
double linearized_lambda2(const PlayerProgram& p, const Eigen::VectorXd& x);

// Solves once; on NumericalTrouble retries with solve_rescaled.
SolveOutcome solve_subproblem(const PlayerProgram& p, const ConicSolver& solver);

struct AcceptOptions {
  double backtrack_tolerance = 1e-6;
  int max_backtracks = 6;
  // Predicted linearized gain at or below this is treated as no improvement
  // and the robots stay where they are.
  double gain_tolerance = 1e-7;

  friend bool operator==(const AcceptOptions&, const AcceptOptions&) = default;
};

struct StepResult {
  LayeredConfiguration state;  // accepted configuration
  SolveOutcome outcome;        // last solve
  std::vector<SolveOutcome> solves;
  int backtracks = 0;
  bool null_step = false;
  double lambda_before = 0.0;  // connectivity of the surviving robots
  double lambda_after = 0.0;
};

// Connectivity used for acceptance: surviving robots, attack zeroing applied.
double step_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask);

// Accepts the proposal of `first` or backtracks by halving the trust radius
// and re-solving; after max_backtracks keeps the current state.
StepResult accept_step(const SubproblemSpec& spec, SolveOutcome first, const ConicSolver& solver,
                       const AcceptOptions& opts = {});

// build + solve + accept.
StepResult best_response(const SubproblemSpec& spec, const ConicSolver& solver,
                         const AcceptOptions& opts = {});

// Stay-put candidate: x(k+1) = x(k), Z = current squared distances, alpha =
// current linearized lambda2.
Eigen::VectorXd stay_put_candidate(const PlayerProgram& p, const SubproblemSpec& spec);

}  // namespace mrn
