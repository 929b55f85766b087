#include "mrn/sdp_subproblem.hpp"

#include "mrn/errors.hpp"
#include "mrn/spectral_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mrn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string pair_label(const char* what, std::size_t i, std::size_t j) {
  return std::string(what) + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

bool is_fixed(const SubproblemSpec& spec, std::size_t i) {
  return spec.state.layer_of(i) != spec.acting_player || spec.frozen.contains(i) ||
         spec.mask.removed.contains(i);
}

}  // namespace

const char* to_string(DistanceCoupling c) {
  return c == DistanceCoupling::SecantBound ? "secant_bound" : "secant_equality";
}

void SubproblemSpec::validate() const {
  if (acting_player != 1 && acting_player != 2) throw InvalidSpec("acting player must be 1 or 2");
  const auto n = state.size();
  for (auto i : frozen) {
    if (i >= n) throw InvalidSpec("frozen robot " + std::to_string(i) + " does not exist");
  }
  for (auto i : mask.removed) {
    if (i >= n) throw InvalidSpec("removed robot " + std::to_string(i) + " does not exist");
  }
  for (const auto& [i, j] : mask.jammed) {
    if (i >= n || j >= n || i == j) throw InvalidSpec(pair_label("jammed link", i, j) + " is invalid");
  }
  if (trust_radius && !(*trust_radius > 0.0)) throw InvalidSpec("trust radius must be positive");
}

double default_trust_radius(const LinkModels& models) {
  return std::min({models.inter1.rho2 - models.inter1.rho1, models.inter2.rho2 - models.inter2.rho1,
                   models.intra.rho2 - models.intra.rho1}) /
         4.0;
}

PlayerProgram build_player_subproblem(const SubproblemSpec& spec) {
  spec.validate();
  const auto& cfg = spec.state;
  const std::size_t n = cfg.size();
  if (n < 2) throw InvalidSpec("subproblem needs at least two robots");

  PlayerProgram out;
  auto& p = out.program;
  out.alpha = p.add_variable("alpha");
  p.set_objective(out.alpha, 1.0);

  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  out.position.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      out.position[i][static_cast<std::size_t>(c)] = p.add_variable("x" + std::to_string(i) + "." + kAxis[c]);
    }
  }
  out.z.assign(n, std::vector<std::size_t>(n, kNoVariable));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto v = p.add_variable("Z" + std::to_string(i) + "_" + std::to_string(j));
      out.z[i][j] = out.z[j][i] = v;
    }
  }

  // Connectivity LMI over the robots still in service.
  out.lmi_nodes = surviving_nodes(cfg, spec.mask);
  const std::size_t m = out.lmi_nodes.size();
  std::vector<std::size_t> slot(n, kNoVariable);
  for (std::size_t a = 0; a < m; ++a) slot[out.lmi_nodes[a]] = a;

  MatrixXd L0 = MatrixXd::Zero(idx(m), idx(m));
  std::vector<MatrixXd> Lx(3 * n);
  const auto coeff = [&](std::size_t i, int c) -> MatrixXd& {
    auto& M = Lx[3 * i + static_cast<std::size_t>(c)];
    if (M.size() == 0) M = MatrixXd::Zero(idx(m), idx(m));
    return M;
  };
  const auto add_pair = [](MatrixXd& M, std::size_t a, std::size_t b, double v) {
    M(idx(a), idx(a)) += v;
    M(idx(b), idx(b)) += v;
    M(idx(a), idx(b)) -= v;
    M(idx(b), idx(a)) -= v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (slot[i] == kNoVariable || slot[j] == kNoVariable || spec.mask.blocks(i, j)) continue;
      const auto& model = cfg.models().of(cfg.link_class(i, j));
      const Point b = cfg.position(i) - cfg.position(j);
      const double w = link_weight(model, b.norm());
      if (w <= kEdgePruneThreshold) continue;
      const Eigen::Vector3d g = link_weight_gradient(model, cfg.position(i), cfg.position(j));
      // w(k+1) = w - g'b + g'x_i(k+1) - g'x_j(k+1)
      add_pair(L0, slot[i], slot[j], w - g.dot(b));
      for (int c = 0; c < 3; ++c) {
        if (g(c) == 0.0) continue;
        add_pair(coeff(i, c), slot[i], slot[j], g(c));
        add_pair(coeff(j, c), slot[i], slot[j], -g(c));
      }
    }
  }
  out.laplacian_model.constant = L0;
  out.laplacian_model.label = "linearized_laplacian";
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      auto& M = Lx[3 * i + static_cast<std::size_t>(c)];
      if (M.size() != 0) out.laplacian_model.coefficients.emplace_back(out.position[i][static_cast<std::size_t>(c)], M);
    }
  }
  PsdConstraint conn = out.laplacian_model;
  conn.label = "connectivity";
  conn.coefficients.emplace_back(out.alpha, -centering_matrix(m));
  out.connectivity_block = p.psd_blocks().size();
  p.add_psd(std::move(conn));

  // EDM LMI: -C Z C PSD with zero diagonal built in.
  const MatrixXd C = centering_matrix(n);
  PsdConstraint edm;
  edm.label = "edm";
  edm.constant = MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      MatrixXd E = MatrixXd::Zero(idx(n), idx(n));
      E(idx(i), idx(j)) = E(idx(j), idx(i)) = 1.0;
      edm.coefficients.emplace_back(out.z[i][j], -(C * E * C));
    }
  }
  out.edm_block = p.psd_blocks().size();
  p.add_psd(std::move(edm));

  // Distance coupling: s_ij = 2 x_ij(k+1)'b - |b|^2 - Z_ij, either = 0 or >= 0.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point b = cfg.position(i) - cfg.position(j);
      AffineExpr e;
      for (int c = 0; c < 3; ++c) {
        if (b(c) == 0.0) continue;
        e.add(out.position[i][static_cast<std::size_t>(c)], 2.0 * b(c));
        e.add(out.position[j][static_cast<std::size_t>(c)], -2.0 * b(c));
      }
      e.add(out.z[i][j], -1.0);
      e.constant = -b.squaredNorm();
      if (spec.coupling == DistanceCoupling::SecantEquality) {
        p.add_equality(std::move(e), pair_label("secant", i, j));
      } else {
        p.add_inequality(std::move(e), pair_label("secant", i, j));
      }
    }
  }

  // Minimum distance within the acting layer.
  const double d = cfg.min_sq_distance(spec.acting_player);
  const auto acting = cfg.layer_nodes(spec.acting_player);
  for (std::size_t a = 0; a < acting.size(); ++a) {
    for (std::size_t b = a + 1; b < acting.size(); ++b) {
      AffineExpr e;
      e.add(out.z[acting[a]][acting[b]], 1.0);
      e.constant = -d;
      p.add_inequality(std::move(e), pair_label("min_distance", acting[a], acting[b]));
    }
  }

  // Frozen robots and pinned axes; trust region on the rest.
  const auto& pinned = spec.pinned[static_cast<std::size_t>(spec.acting_player - 1)];
  for (std::size_t i = 0; i < n; ++i) {
    const bool fixed = is_fixed(spec, i);
    for (int c = 0; c < 3; ++c) {
      const auto v = out.position[i][static_cast<std::size_t>(c)];
      const double x0 = cfg.position(i)(c);
      const std::string tag = std::to_string(i) + "." + kAxis[c];
      if (fixed || pinned[static_cast<std::size_t>(c)]) {
        AffineExpr e;
        e.add(v, 1.0);
        e.constant = -x0;
        p.add_equality(std::move(e), (fixed ? "frozen " : "pinned ") + tag);
      } else if (spec.trust_radius) {
        AffineExpr up, down;
        up.add(v, -1.0);
        up.constant = x0 + *spec.trust_radius;
        down.add(v, 1.0);
        down.constant = *spec.trust_radius - x0;
        p.add_inequality(std::move(up), "trust+ " + tag);
        p.add_inequality(std::move(down), "trust- " + tag);
      }
    }
  }
  p.validate();
  return out;
}

double linearized_lambda2(const PlayerProgram& p, const VectorXd& x) {
  if (p.lmi_nodes.size() < 2) return 0.0;
  MatrixXd L = p.laplacian_model.evaluate(x);
  return min_eigenvalue_on_complement(0.5 * (L + L.transpose()));
}

SolveOutcome solve_subproblem(const PlayerProgram& p, const ConicSolver& solver) {
  ConicSolution sol = solver.solve(p.program);
  if (sol.status == SolveStatus::NumericalTrouble) sol = solver.solve_rescaled(p.program);

  SolveOutcome out;
  out.status = sol.status;
  out.stats = sol.stats;
  if (sol.status != SolveStatus::Optimal) return out;

  const std::size_t n = p.position.size();
  out.alpha = sol.x(idx(p.alpha));
  out.next_positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out.next_positions[i](c) = sol.x(idx(p.position[i][static_cast<std::size_t>(c)]));
  }
  out.z = MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out.z(idx(i), idx(j)) = sol.x(idx(p.z[i][j]));
    }
  }
  out.linearized_lambda2 = linearized_lambda2(p, sol.x);
  return out;
}

VectorXd stay_put_candidate(const PlayerProgram& p, const SubproblemSpec& spec) {
  const auto& cfg = spec.state;
  VectorXd x = VectorXd::Zero(idx(p.program.variable_count()));
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    for (int c = 0; c < 3; ++c) x(idx(p.position[i][static_cast<std::size_t>(c)])) = cfg.position(i)(c);
    for (std::size_t j = i + 1; j < cfg.size(); ++j) x(idx(p.z[i][j])) = cfg.squared_distance(i, j);
  }
  x(idx(p.alpha)) = linearized_lambda2(p, x);
  return x;
}

double step_connectivity(const LayeredConfiguration& cfg, const LinkMask& mask) {
  return surviving_connectivity(cfg, mask);
}

StepResult accept_step(const SubproblemSpec& spec, SolveOutcome first, const ConicSolver& solver,
                       const AcceptOptions& opts) {
  StepResult r;
  r.state = spec.state;
  r.lambda_before = step_connectivity(spec.state, spec.mask);
  r.lambda_after = r.lambda_before;

  const auto acting = spec.state.layer_nodes(spec.acting_player);
  SubproblemSpec trial = spec;
  SolveOutcome cur = std::move(first);
  for (int attempt = 0;; ++attempt) {
    r.solves.push_back(cur);
    r.outcome = cur;
    if (cur.status != SolveStatus::Optimal) {
      r.null_step = true;
      return r;
    }
    // The linearization is exact at the current state, so its lambda2 there
    // is the baseline for the predicted gain.
    if (cur.alpha - r.lambda_before <= opts.gain_tolerance) {
      r.null_step = true;
      return r;
    }
    double step = 0.0;
    std::vector<Point> layer;
    for (auto i : acting) {
      layer.push_back(cur.next_positions[i]);
      step = std::max(step, (cur.next_positions[i] - spec.state.position(i)).cwiseAbs().maxCoeff());
    }
    const auto proposal = spec.state.with_layer(spec.acting_player, std::move(layer));
    const double lam = step_connectivity(proposal, spec.mask);
    if (lam >= r.lambda_before - opts.backtrack_tolerance && proposal.min_distance_margin() >= 0.0) {
      r.state = proposal;
      r.lambda_after = lam;
      return r;
    }
    if (attempt >= opts.max_backtracks || step == 0.0) {
      r.null_step = true;
      return r;
    }
    ++r.backtracks;
    trial.trust_radius = trial.trust_radius ? *trial.trust_radius / 2.0 : step / 2.0;
    cur = solve_subproblem(build_player_subproblem(trial), solver);
  }
}

StepResult best_response(const SubproblemSpec& spec, const ConicSolver& solver,
                         const AcceptOptions& opts) {
  return accept_step(spec, solve_subproblem(build_player_subproblem(spec), solver), solver, opts);
}

}  // namespace mrn
