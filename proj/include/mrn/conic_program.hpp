// Solver-agnostic description of a linear conic program with affine scalar
// and semidefinite constraints, plus the backend contract that solves it.
//
//   maximize    c'x
//   subject to  a_k'x + b_k  = 0        (equalities)
//               g_k'x + h_k >= 0        (scalar inequalities)
//               F_0 + sum_i x_i F_i  PSD (affine matrix constraints)

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mrn {

/// Sparse affine scalar function of the program variables.
struct AffineExpr {
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;

  AffineExpr& add(std::size_t var, double coeff) {
    terms.emplace_back(var, coeff);
    return *this;
  }
  double evaluate(const Eigen::VectorXd& x) const;
};

struct ScalarConstraint {
  AffineExpr expr;
  std::string label;
};

/// Affine symmetric matrix function F_0 + sum_i x_i F_i.
struct PsdConstraint {
  Eigen::MatrixXd constant;
  std::vector<std::pair<std::size_t, Eigen::MatrixXd>> coefficients;
  std::string label;

  std::size_t dim() const { return static_cast<std::size_t>(constant.rows()); }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

class ConicProgram {
 public:
  std::size_t add_variable(std::string name);
  std::size_t variable_count() const { return names_.size(); }
  const std::string& variable_name(std::size_t i) const { return names_.at(i); }

  void set_objective(std::size_t var, double coeff);
  const Eigen::VectorXd& objective() const { return objective_; }

  void add_equality(AffineExpr expr, std::string label);
  void add_inequality(AffineExpr expr, std::string label);
  void add_psd(PsdConstraint block);

  const std::vector<ScalarConstraint>& equalities() const { return equalities_; }
  const std::vector<ScalarConstraint>& inequalities() const { return inequalities_; }
  const std::vector<PsdConstraint>& psd_blocks() const { return psd_; }

  // Throws InvalidSpec if a constraint references an undeclared variable or
  // a PSD block is not square and symmetric.
  void validate() const;

  struct Violation {
    double equality = 0.0;    // max |a'x + b|
    double inequality = 0.0;  // max(0, -(g'x + h))
    double psd = 0.0;         // max(0, -lambda_min(F(x)))
  };
  Violation violation(const Eigen::VectorXd& x) const;

  // Debug dump: variables, objective, constraints; matrices dense row-major.
  std::string to_json() const;

 private:
  std::vector<std::string> names_;
  Eigen::VectorXd objective_;
  std::vector<ScalarConstraint> equalities_;
  std::vector<ScalarConstraint> inequalities_;
  std::vector<PsdConstraint> psd_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

const char* to_string(SolveStatus s);

struct SolverStats {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int attempts = 1;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Eigen::VectorXd x;
  double objective = 0.0;
  SolverStats stats;
};

/// Backend contract: on Optimal, every constraint of the program holds at x
/// within 1e-7 (equalities in absolute value, PSD blocks in minimum eigenvalue).
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual ConicSolution solve(const ConicProgram& program) const = 0;
  // Called once after a NumericalTrouble result; backends may rescale.
  virtual ConicSolution solve_rescaled(const ConicProgram& program) const {
    return solve(program);
  }
};

}  // namespace mrn
