#include "mrn/conic_program.hpp"

#include "mrn/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace mrn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double AffineExpr::evaluate(const VectorXd& x) const {
  double v = constant;
  for (const auto& [var, c] : terms) v += c * x(static_cast<Index>(var));
  return v;
}

MatrixXd PsdConstraint::evaluate(const VectorXd& x) const {
  MatrixXd F = constant;
  for (const auto& [var, M] : coefficients) F += x(static_cast<Index>(var)) * M;
  return F;
}

std::size_t ConicProgram::add_variable(std::string name) {
  names_.push_back(std::move(name));
  objective_.conservativeResize(static_cast<Index>(names_.size()));
  objective_(objective_.size() - 1) = 0.0;
  return names_.size() - 1;
}

void ConicProgram::set_objective(std::size_t var, double coeff) {
  if (var >= names_.size()) throw InvalidSpec("objective references undeclared variable");
  objective_(static_cast<Index>(var)) = coeff;
}

void ConicProgram::add_equality(AffineExpr expr, std::string label) {
  equalities_.push_back({std::move(expr), std::move(label)});
}

void ConicProgram::add_inequality(AffineExpr expr, std::string label) {
  inequalities_.push_back({std::move(expr), std::move(label)});
}

void ConicProgram::add_psd(PsdConstraint block) { psd_.push_back(std::move(block)); }

void ConicProgram::validate() const {
  const auto check_expr = [&](const ScalarConstraint& c) {
    for (const auto& [var, coeff] : c.expr.terms) {
      if (var >= names_.size()) {
        throw InvalidSpec("constraint '" + c.label + "' references undeclared variable");
      }
      if (!std::isfinite(coeff)) throw InvalidSpec("constraint '" + c.label + "' is not finite");
    }
    if (!std::isfinite(c.expr.constant)) {
      throw InvalidSpec("constraint '" + c.label + "' is not finite");
    }
  };
  for (const auto& c : equalities_) check_expr(c);
  for (const auto& c : inequalities_) check_expr(c);
  for (const auto& b : psd_) {
    const auto n = b.constant.rows();
    if (b.constant.cols() != n) throw InvalidSpec("PSD block '" + b.label + "' is not square");
    const auto symmetric = [](const MatrixXd& M) {
      return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
    };
    if (n > 0 && !symmetric(b.constant)) {
      throw InvalidSpec("PSD block '" + b.label + "' is not symmetric");
    }
    for (const auto& [var, M] : b.coefficients) {
      if (var >= names_.size()) {
        throw InvalidSpec("PSD block '" + b.label + "' references undeclared variable");
      }
      if (M.rows() != n || M.cols() != n) {
        throw InvalidSpec("PSD block '" + b.label + "' has a coefficient of the wrong size");
      }
      if (n > 0 && !symmetric(M)) {
        throw InvalidSpec("PSD block '" + b.label + "' is not symmetric");
      }
    }
  }
}

ConicProgram::Violation ConicProgram::violation(const VectorXd& x) const {
  Violation v;
  for (const auto& c : equalities_) v.equality = std::max(v.equality, std::abs(c.expr.evaluate(x)));
  for (const auto& c : inequalities_) v.inequality = std::max(v.inequality, -c.expr.evaluate(x));
  for (const auto& b : psd_) {
    if (b.dim() == 0) continue;
    MatrixXd F = b.evaluate(x);
    F = 0.5 * (F + F.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(F, Eigen::EigenvaluesOnly);
    v.psd = std::max(v.psd, -es.eigenvalues()(0));
  }
  return v;
}

namespace {

nlohmann::json dense(const MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json scalar_constraints(const std::vector<ScalarConstraint>& cs, std::size_t nvars) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cs) {
    std::vector<double> coeffs(nvars, 0.0);
    for (const auto& [var, coeff] : c.expr.terms) coeffs[var] += coeff;
    out.push_back({{"label", c.label}, {"coefficients", coeffs}, {"constant", c.expr.constant}});
  }
  return out;
}

}  // namespace

std::string ConicProgram::to_json() const {
  nlohmann::json j;
  j["sense"] = "maximize";
  j["variables"] = names_;
  j["objective"] = std::vector<double>(objective_.data(), objective_.data() + objective_.size());
  j["equalities"] = scalar_constraints(equalities_, names_.size());
  j["inequalities"] = scalar_constraints(inequalities_, names_.size());
  j["psd"] = nlohmann::json::array();
  for (const auto& b : psd_) {
    nlohmann::json block;
    block["label"] = b.label;
    block["dim"] = b.dim();
    block["constant"] = dense(b.constant);
    block["coefficients"] = nlohmann::json::array();
    for (const auto& [var, M] : b.coefficients) {
      block["coefficients"].push_back({{"variable", var}, {"matrix", dense(M)}});
    }
    j["psd"].push_back(std::move(block));
  }
  return j.dump(1);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalTrouble:
      return "numerical_trouble";
  }
  return "?";
}

}  // namespace mrn
