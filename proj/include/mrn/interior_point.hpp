// Primal-dual interior-point backend for ConicProgram.
//
// The program is reduced to LMI form: equalities are eliminated through a
// null-space parametrization, scalar inequalities become a diagonal block,
// and every PSD block is compressed onto the orthogonal complement of the
// kernel shared by all of its coefficient matrices (e.g. the all-ones vector
// for a Laplacian LMI). The reduced pair
//
//   (D)  max b'y   s.t.  S = C - sum_k y_k A_k  PSD
//   (P)  min <C,X> s.t.  <A_k, X> = b_k, X PSD
//
// is solved by an infeasible-start path-following method with the HKM search
// direction and Mehrotra's predictor-corrector.

#pragma once

#include "mrn/conic_program.hpp"

namespace mrn {

class InteriorPointSolver final : public ConicSolver {
 public:
  struct Options {
    double tolerance = 1e-9;       // relative residuals and gap
    double acceptable = 1e-7;      // fallback when progress stalls
    int max_iterations = 150;
    double step_fraction = 0.95;
    bool rescale = false;
  };

  InteriorPointSolver() = default;
  explicit InteriorPointSolver(Options opts) : opts_(opts) {}

  ConicSolution solve(const ConicProgram& program) const override;
  ConicSolution solve_rescaled(const ConicProgram& program) const override;

  const Options& options() const { return opts_; }

 private:
  Options opts_;
};

}  // namespace mrn
