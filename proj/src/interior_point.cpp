#include "mrn/interior_point.hpp"

#include "mrn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// LMI-form data after equality elimination and kernel compression.
struct Reduced {
  VectorXd x0;
  MatrixXd N;
  std::vector<MatrixXd> C;
  std::vector<std::vector<MatrixXd>> A;  // A[block][var]
  std::vector<std::vector<Index>> active;
  VectorXd c_lp;
  MatrixXd A_lp;  // rows: LP entries, cols: reduced variables
  VectorXd b;
  double offset = 0.0;
  std::vector<bool> unused;
  bool infeasible = false;
  bool unbounded = false;
};

double trace_product(const MatrixXd& A, const MatrixXd& W) {
  return A.cwiseProduct(W.transpose()).sum();
}

Reduced reduce(const ConicProgram& p, bool rescale) {
  Reduced r;
  const auto m = static_cast<Index>(p.variable_count());

  // Equalities: E x = f.
  const auto& eqs = p.equalities();
  if (eqs.empty()) {
    r.x0 = VectorXd::Zero(m);
    r.N = MatrixXd::Identity(m, m);
  } else {
    MatrixXd E = MatrixXd::Zero(static_cast<Index>(eqs.size()), m);
    VectorXd f(static_cast<Index>(eqs.size()));
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      for (const auto& [var, c] : eqs[k].expr.terms) E(static_cast<Index>(k), static_cast<Index>(var)) += c;
      f(static_cast<Index>(k)) = -eqs[k].expr.constant;
    }
    Eigen::JacobiSVD<MatrixXd> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, smax)) ++rank;
    VectorXd x0 = VectorXd::Zero(m);
    const VectorXd ut = svd.matrixU().leftCols(rank).transpose() * f;
    for (Index k = 0; k < rank; ++k) x0 += (ut(k) / sv(k)) * svd.matrixV().col(k);
    r.x0 = x0;
    r.N = svd.matrixV().rightCols(m - rank);
    if ((E * x0 - f).norm() > 1e-9 * (1.0 + f.norm())) r.infeasible = true;
  }
  const Index q = r.N.cols();

  // Scalar inequalities -> diagonal block with S = c_lp + G y.
  std::vector<VectorXd> rows;
  std::vector<double> consts;
  for (const auto& ineq : p.inequalities()) {
    VectorXd g = VectorXd::Zero(m);
    for (const auto& [var, c] : ineq.expr.terms) g(static_cast<Index>(var)) += c;
    double h = ineq.expr.constant + g.dot(r.x0);
    VectorXd gr = r.N.transpose() * g;
    const double scale = std::max(gr.cwiseAbs().maxCoeff(), std::abs(h));
    if (gr.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(h))) {
      if (h < -1e-9) r.infeasible = true;
      continue;
    }
    if (rescale && scale > 0.0) {
      gr /= scale;
      h /= scale;
    }
    rows.push_back(std::move(gr));
    consts.push_back(h);
  }
  r.c_lp.resize(static_cast<Index>(rows.size()));
  r.A_lp.resize(static_cast<Index>(rows.size()), q);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    r.c_lp(static_cast<Index>(k)) = consts[k];
    // S = C - A*(y) with A* = -G.
    r.A_lp.row(static_cast<Index>(k)) = -rows[k].transpose();
  }

  // PSD blocks.
  for (const auto& block : p.psd_blocks()) {
    const Index n = block.constant.rows();
    if (n == 0) continue;
    MatrixXd F0 = block.constant;
    std::vector<MatrixXd> Fx(static_cast<std::size_t>(m));
    std::vector<bool> has(static_cast<std::size_t>(m), false);
    for (const auto& [var, M] : block.coefficients) {
      auto& slot = Fx[var];
      if (!has[var]) {
        slot = M;
        has[var] = true;
      } else {
        slot += M;
      }
    }
    for (Index i = 0; i < m; ++i) {
      if (has[static_cast<std::size_t>(i)] && r.x0(i) != 0.0) F0 += r.x0(i) * Fx[static_cast<std::size_t>(i)];
    }
    std::vector<MatrixXd> Fy(static_cast<std::size_t>(q), MatrixXd::Zero(n, n));
    for (Index i = 0; i < m; ++i) {
      if (!has[static_cast<std::size_t>(i)]) continue;
      for (Index k = 0; k < q; ++k) {
        const double c = r.N(i, k);
        if (c != 0.0) Fy[static_cast<std::size_t>(k)] += c * Fx[static_cast<std::size_t>(i)];
      }
    }
    // Kernel shared by all matrices of the block.
    MatrixXd K = F0.transpose() * F0;
    for (const auto& F : Fy) K += F.transpose() * F;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (K + K.transpose()));
    const double kmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    if (kmax == 0.0) continue;
    Index keep_from = 0;
    while (keep_from < n && es.eigenvalues()(keep_from) <= 1e-11 * kmax) ++keep_from;
    const MatrixXd W = es.eigenvectors().rightCols(n - keep_from);
    double scale = 1.0;
    MatrixXd C = W.transpose() * F0 * W;
    C = 0.5 * (C + C.transpose());
    std::vector<MatrixXd> Ab(static_cast<std::size_t>(q));
    std::vector<Index> act;
    for (Index k = 0; k < q; ++k) {
      MatrixXd Ak = -(W.transpose() * Fy[static_cast<std::size_t>(k)] * W);
      Ak = 0.5 * (Ak + Ak.transpose());
      if (Ak.cwiseAbs().maxCoeff() > 1e-14) act.push_back(k);
      Ab[static_cast<std::size_t>(k)] = std::move(Ak);
    }
    if (rescale) {
      double mx = C.cwiseAbs().maxCoeff();
      for (Index k : act) mx = std::max(mx, Ab[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
      if (mx > 0.0) scale = 1.0 / mx;
      C *= scale;
      for (auto& Ak : Ab) Ak *= scale;
    }
    r.C.push_back(std::move(C));
    r.A.push_back(std::move(Ab));
    r.active.push_back(std::move(act));
  }

  r.b = r.N.transpose() * p.objective();
  r.offset = p.objective().dot(r.x0);
  if (rescale) {
    const double bmax = r.b.cwiseAbs().maxCoeff();
    if (bmax > 0.0) r.b /= bmax;
  }
  r.unused.assign(static_cast<std::size_t>(q), true);
  for (const auto& act : r.active) {
    for (Index k : act) r.unused[static_cast<std::size_t>(k)] = false;
  }
  for (Index k = 0; k < q; ++k) {
    if (r.A_lp.rows() > 0 && r.A_lp.col(k).cwiseAbs().maxCoeff() > 0.0) {
      r.unused[static_cast<std::size_t>(k)] = false;
    }
    if (r.unused[static_cast<std::size_t>(k)] && std::abs(r.b(k)) > 1e-14) r.unbounded = true;
  }
  return r;
}

struct Iterate {
  std::vector<MatrixXd> X;
  VectorXd xl;
  VectorXd y;
  std::vector<MatrixXd> S;
  VectorXd sl;
};

class Engine {
 public:
  Engine(const Reduced& r, const InteriorPointSolver::Options& o) : r_(r), o_(o) {}

  ConicSolution run() {
    ConicSolution out;
    Iterate it = initial_point();
    double total_dim = static_cast<double>(r_.c_lp.size());
    for (const auto& C : r_.C) total_dim += static_cast<double>(C.rows());
    if (total_dim == 0.0) {
      // Nothing constrains y: bounded only if the objective ignores it.
      out.status = SolveStatus::Optimal;
      out.x = r_.x0;
      return out;
    }

    const double normb = r_.b.norm();
    double normC = r_.c_lp.norm();
    for (const auto& C : r_.C) normC = std::hypot(normC, C.norm());

    int stalls = 0;
    for (int iter = 0; iter <= o_.max_iterations; ++iter) {
      const VectorXd rp = r_.b - apply_A(it.X, it.xl);
      std::vector<MatrixXd> Rd;
      VectorXd rdl;
      dual_residual(it, Rd, rdl);
      const double pobj = inner(r_.C, it.X) + r_.c_lp.dot(it.xl);
      const double dobj = r_.b.dot(it.y);
      const double mu = (inner(it.X, it.S) + it.xl.dot(it.sl)) / total_dim;
      const double rel_p = rp.norm() / (1.0 + normb);
      const double rel_d = block_norm(Rd, rdl) / (1.0 + normC);
      const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double rel_compl = mu * total_dim / (1.0 + std::abs(pobj) + std::abs(dobj));
      out.stats = {iter, rel_p, rel_d, rel_gap, 1};

      if (rel_p <= o_.tolerance && rel_d <= o_.tolerance && rel_gap <= o_.tolerance &&
          rel_compl <= o_.tolerance) {
        out.status = SolveStatus::Optimal;
        break;
      }
      // Infeasibility certificates.
      if (pobj < 0.0 && rp.norm() > 0.0) {
        const VectorXd ax = apply_A(it.X, it.xl);
        if (ax.norm() / -pobj < 1e-8 && -pobj > 1e6) {
          out.status = SolveStatus::Infeasible;
          break;
        }
      }
      if (dobj > 1e10 && block_norm_plus(it) / dobj < 1e-6) {
        out.status = SolveStatus::Unbounded;
        break;
      }
      if (iter == o_.max_iterations || stalls >= 5) {
        const bool acceptable = rel_p <= o_.acceptable && rel_d <= o_.acceptable &&
                                rel_gap <= o_.acceptable;
        out.status = acceptable ? SolveStatus::Optimal : SolveStatus::NumericalTrouble;
        break;
      }

      if (!newton_step(it, rp, Rd, rdl, mu, total_dim, stalls)) {
        const bool acceptable = rel_p <= o_.acceptable && rel_d <= o_.acceptable &&
                                rel_gap <= o_.acceptable;
        out.status = acceptable ? SolveStatus::Optimal : SolveStatus::NumericalTrouble;
        break;
      }
    }
    out.x = r_.x0 + r_.N * it.y;
    return out;
  }

 private:
  static double inner(const std::vector<MatrixXd>& A, const std::vector<MatrixXd>& B) {
    double s = 0.0;
    for (std::size_t b = 0; b < A.size(); ++b) s += A[b].cwiseProduct(B[b]).sum();
    return s;
  }

  static double block_norm(const std::vector<MatrixXd>& M, const VectorXd& v) {
    double s = v.squaredNorm();
    for (const auto& B : M) s += B.squaredNorm();
    return std::sqrt(s);
  }

  double block_norm_plus(const Iterate& it) const {
    // ||C - Rd|| = ||A*(y) + S||; small relative to b'y certifies a ray.
    std::vector<MatrixXd> Rd;
    VectorXd rdl;
    dual_residual(it, Rd, rdl);
    double s = (r_.c_lp - rdl).squaredNorm();
    for (std::size_t b = 0; b < r_.C.size(); ++b) s += (r_.C[b] - Rd[b]).squaredNorm();
    return std::sqrt(s);
  }

  Iterate initial_point() const {
    Iterate it;
    const Index q = r_.b.size();
    it.y = VectorXd::Zero(q);
    for (std::size_t b = 0; b < r_.C.size(); ++b) {
      const Index n = r_.C[b].rows();
      const double sq = std::sqrt(static_cast<double>(n));
      double xi = std::max(10.0, sq);
      double eta = std::max({10.0, sq, r_.C[b].norm()});
      for (Index k : r_.active[b]) {
        const double an = r_.A[b][static_cast<std::size_t>(k)].norm();
        xi = std::max(xi, (1.0 + std::abs(r_.b(k))) / (1.0 + an));
        eta = std::max(eta, an);
      }
      it.X.push_back(xi * MatrixXd::Identity(n, n));
      it.S.push_back(eta * MatrixXd::Identity(n, n));
    }
    const Index d = r_.c_lp.size();
    it.xl = VectorXd::Constant(d, 10.0);
    it.sl = VectorXd::Constant(d, 10.0);
    for (Index k = 0; k < d; ++k) {
      const double an = r_.A_lp.row(k).norm();
      it.sl(k) = std::max({10.0, std::abs(r_.c_lp(k)), an});
    }
    return it;
  }

  VectorXd apply_A(const std::vector<MatrixXd>& X, const VectorXd& xl) const {
    VectorXd v = VectorXd::Zero(r_.b.size());
    for (std::size_t b = 0; b < r_.C.size(); ++b) {
      for (Index k : r_.active[b]) v(k) += trace_product(r_.A[b][static_cast<std::size_t>(k)], X[b]);
    }
    if (xl.size() > 0) v += r_.A_lp.transpose() * xl;
    return v;
  }

  void apply_At(const VectorXd& y, std::vector<MatrixXd>& out, VectorXd& outl) const {
    out.clear();
    for (std::size_t b = 0; b < r_.C.size(); ++b) {
      MatrixXd M = MatrixXd::Zero(r_.C[b].rows(), r_.C[b].cols());
      for (Index k : r_.active[b]) {
        if (y(k) != 0.0) M += y(k) * r_.A[b][static_cast<std::size_t>(k)];
      }
      out.push_back(std::move(M));
    }
    outl = r_.c_lp.size() > 0 ? VectorXd(r_.A_lp * y) : VectorXd();
  }

  void dual_residual(const Iterate& it, std::vector<MatrixXd>& Rd, VectorXd& rdl) const {
    apply_At(it.y, Rd, rdl);
    for (std::size_t b = 0; b < r_.C.size(); ++b) Rd[b] = r_.C[b] - Rd[b] - it.S[b];
    if (r_.c_lp.size() > 0) rdl = r_.c_lp - rdl - it.sl;
  }

  static double max_step(const MatrixXd& X, const MatrixXd& dX) {
    Eigen::LLT<MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXd L = llt.matrixL();
    MatrixXd T = L.triangularView<Eigen::Lower>().solve(dX);
    T = L.triangularView<Eigen::Lower>().solve(T.transpose()).transpose();
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    return lo < 0.0 ? -1.0 / lo : kInf;
  }

  static double max_step(const VectorXd& x, const VectorXd& dx) {
    double a = kInf;
    for (Index k = 0; k < x.size(); ++k) {
      if (dx(k) < 0.0) a = std::min(a, -x(k) / dx(k));
    }
    return a;
  }

  struct Direction {
    std::vector<MatrixXd> dX, dS;
    VectorXd dxl, dsl, dy;
  };

  // Solves for the HKM direction with complementarity target mu and
  // second-order correction K (K = dX_aff dS_aff for the corrector).
  Direction direction(const Iterate& it, const std::vector<MatrixXd>& Sinv, const VectorXd& sinvl,
                      const Eigen::LDLT<MatrixXd>& M, const std::vector<MatrixXd>& Rd,
                      const VectorXd& rdl, double mu, const std::vector<MatrixXd>* K,
                      const VectorXd* kl) const {
    const Index q = r_.b.size();
    const std::size_t nb = r_.C.size();
    std::vector<MatrixXd> W(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      MatrixXd T = it.X[b] * Rd[b];
      T.diagonal().array() -= mu;
      if (K) T += (*K)[b];
      W[b] = T * Sinv[b];
    }
    VectorXd wl;
    if (r_.c_lp.size() > 0) {
      VectorXd t = it.xl.cwiseProduct(rdl).array() - mu;
      if (kl) t += *kl;
      wl = t.cwiseProduct(sinvl);
    }
    VectorXd rhs = r_.b + apply_A(W, wl);
    for (Index k = 0; k < q; ++k) {
      if (r_.unused[static_cast<std::size_t>(k)]) rhs(k) = 0.0;
    }
    Direction d;
    d.dy = M.solve(rhs);
    apply_At(d.dy, d.dS, d.dsl);
    for (std::size_t b = 0; b < nb; ++b) {
      d.dS[b] = Rd[b] - d.dS[b];
      MatrixXd T = it.X[b] * d.dS[b];
      if (K) T += (*K)[b];
      MatrixXd dX = mu * Sinv[b] - it.X[b] - T * Sinv[b];
      d.dX.push_back(0.5 * (dX + dX.transpose()));
    }
    if (r_.c_lp.size() > 0) {
      d.dsl = rdl - d.dsl;
      VectorXd t = it.xl.cwiseProduct(d.dsl);
      if (kl) t += *kl;
      d.dxl = mu * sinvl - it.xl - t.cwiseProduct(sinvl);
    } else {
      d.dsl = VectorXd();
      d.dxl = VectorXd();
    }
    return d;
  }

  std::pair<double, double> step_lengths(const Iterate& it, const Direction& d) const {
    double ap = kInf, ad = kInf;
    for (std::size_t b = 0; b < r_.C.size(); ++b) {
      ap = std::min(ap, max_step(it.X[b], d.dX[b]));
      ad = std::min(ad, max_step(it.S[b], d.dS[b]));
    }
    if (r_.c_lp.size() > 0) {
      ap = std::min(ap, max_step(it.xl, d.dxl));
      ad = std::min(ad, max_step(it.sl, d.dsl));
    }
    return {ap, ad};
  }

  bool newton_step(Iterate& it, const VectorXd& /*rp*/, const std::vector<MatrixXd>& Rd,
                   const VectorXd& rdl, double mu, double total_dim, int& stalls) const {
    const Index q = r_.b.size();
    const std::size_t nb = r_.C.size();
    std::vector<MatrixXd> Sinv(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(it.S[b]);
      if (llt.info() != Eigen::Success) return false;
      Sinv[b] = llt.solve(MatrixXd::Identity(it.S[b].rows(), it.S[b].cols()));
      Sinv[b] = 0.5 * (Sinv[b] + Sinv[b].transpose());
    }
    VectorXd sinvl = r_.c_lp.size() > 0 ? VectorXd(it.sl.cwiseInverse()) : VectorXd();

    // Schur complement M_kl = sum_b tr(A_k X A_l S^-1) + LP part.
    MatrixXd M = MatrixXd::Zero(q, q);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& act = r_.active[b];
      std::vector<MatrixXd> G(act.size());
      for (std::size_t a = 0; a < act.size(); ++a) {
        G[a] = it.X[b] * r_.A[b][static_cast<std::size_t>(act[a])] * Sinv[b];
      }
      for (std::size_t a = 0; a < act.size(); ++a) {
        for (std::size_t c = a; c < act.size(); ++c) {
          const double v = trace_product(r_.A[b][static_cast<std::size_t>(act[c])], G[a]);
          M(act[a], act[c]) += v;
          if (c != a) M(act[c], act[a]) += v;
        }
      }
    }
    if (r_.c_lp.size() > 0) {
      const VectorXd dscale = it.xl.cwiseProduct(sinvl);
      M += r_.A_lp.transpose() * dscale.asDiagonal() * r_.A_lp;
    }
    const double diag_max = q > 0 ? std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300) : 1.0;
    for (Index k = 0; k < q; ++k) {
      if (r_.unused[static_cast<std::size_t>(k)]) M(k, k) = 1.0;
      M(k, k) += 1e-15 * diag_max;
    }
    Eigen::LDLT<MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success) return false;

    // Predictor.
    const Direction aff = direction(it, Sinv, sinvl, ldlt, Rd, rdl, 0.0, nullptr, nullptr);
    auto [ap_a, ad_a] = step_lengths(it, aff);
    ap_a = std::min(1.0, ap_a);
    ad_a = std::min(1.0, ad_a);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += (it.X[b] + ap_a * aff.dX[b]).cwiseProduct(it.S[b] + ad_a * aff.dS[b]).sum();
    }
    if (r_.c_lp.size() > 0) {
      mu_aff += (it.xl + ap_a * aff.dxl).dot(it.sl + ad_a * aff.dsl);
    }
    mu_aff /= total_dim;
    const double ratio = mu > 0.0 ? std::clamp(mu_aff / mu, 0.0, 1.0) : 0.0;
    const double sigma = ratio * ratio * ratio;

    // Corrector.
    std::vector<MatrixXd> K(nb);
    for (std::size_t b = 0; b < nb; ++b) K[b] = aff.dX[b] * aff.dS[b];
    VectorXd kl = r_.c_lp.size() > 0 ? VectorXd(aff.dxl.cwiseProduct(aff.dsl)) : VectorXd();
    const Direction d = direction(it, Sinv, sinvl, ldlt, Rd, rdl, sigma * mu, &K, &kl);
    auto [ap, ad] = step_lengths(it, d);
    const double gamma = o_.step_fraction;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (ap < 1e-10 && ad < 1e-10) {
      ++stalls;
    } else {
      stalls = 0;
    }

    for (std::size_t b = 0; b < nb; ++b) {
      it.X[b] += ap * d.dX[b];
      it.S[b] += ad * d.dS[b];
    }
    if (r_.c_lp.size() > 0) {
      it.xl += ap * d.dxl;
      it.sl += ad * d.dsl;
    }
    it.y += ad * d.dy;
    return true;
  }

  const Reduced& r_;
  const InteriorPointSolver::Options& o_;
};

ConicSolution solve_impl(const ConicProgram& program, const InteriorPointSolver::Options& opts,
                         bool rescale) {
  program.validate();
  const Reduced r = reduce(program, rescale);
  ConicSolution out;
  if (r.infeasible) {
    out.status = SolveStatus::Infeasible;
    out.x = r.x0;
    return out;
  }
  if (r.unbounded) {
    out.status = SolveStatus::Unbounded;
    out.x = r.x0;
    return out;
  }
  Engine engine(r, opts);
  out = engine.run();
  out.objective = program.objective().dot(out.x);
  if (out.status == SolveStatus::Optimal) {
    const auto v = program.violation(out.x);
    if (std::max({v.equality, v.inequality, v.psd}) > 1e-7) {
      out.status = SolveStatus::NumericalTrouble;
    }
  }
  return out;
}

}  // namespace

ConicSolution InteriorPointSolver::solve(const ConicProgram& program) const {
  return solve_impl(program, opts_, opts_.rescale);
}

ConicSolution InteriorPointSolver::solve_rescaled(const ConicProgram& program) const {
  Options tightened = opts_;
  tightened.max_iterations = opts_.max_iterations * 2;
  tightened.step_fraction = 0.9;
  ConicSolution out = solve_impl(program, tightened, true);
  out.stats.attempts = 2;
  return out;
}

}  // namespace mrn
