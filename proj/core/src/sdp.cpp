#include "dmabf/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dmabf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int block;
  ComplexMatrix coeff;
};

// Normalized problem seen by the iteration.
struct ScaledProblem {
  std::vector<int> dims;
  std::vector<ComplexMatrix> c;
  std::vector<std::vector<Term>> f;  // per active constraint
  RealVector b;
  // Per block: (constraint, term index) pairs touching it.
  std::vector<std::vector<std::pair<int, int>>> by_block;
};

struct Iterate {
  std::vector<ComplexMatrix> x;
  std::vector<ComplexMatrix> s;
  RealVector xs;  // slack of the inequality
  RealVector zs;  // its dual
  RealVector y;
};

struct Direction {
  std::vector<ComplexMatrix> dx;
  std::vector<ComplexMatrix> ds;
  RealVector dxs;
  RealVector dzs;
  RealVector dy;
};

double frob_sq(const ComplexMatrix& m) {
  return m.squaredNorm();
}

// Largest alpha with x + alpha dx PSD (infinity if unbounded).
double max_psd_step(const ComplexMatrix& x, const ComplexMatrix& dx) {
  Eigen::LLT<ComplexMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const ComplexMatrix l = llt.matrixL();
  const auto tri = l.triangularView<Eigen::Lower>();
  ComplexMatrix w = tri.solve(dx);
  w = tri.solve(w.adjoint()).adjoint();
  const double lmin = min_eigenvalue(w);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_vec_step(const RealVector& v, const RealVector& dv) {
  double step = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  return step;
}

double complementarity(const Iterate& it) {
  double total = it.xs.dot(it.zs);
  for (std::size_t m = 0; m < it.x.size(); ++m) total += trace_inner(it.x[m], it.s[m]);
  return total;
}

// Sum_k y_k F_k must be negative semidefinite to this accuracy (unit-norm
// rows, b^T y = 1) before infeasibility is declared.
constexpr double kFarkasTol = 1e-12;

class InteriorPoint {
 public:
  InteriorPoint(const ScaledProblem& p, const SdpOptions& opt) : p_(p), opt_(opt) {
    k_ = static_cast<int>(p_.b.size());
    nu_ = k_;
    for (int d : p_.dims) nu_ += d;
    norm_b_ = p_.b.norm();
    double c_sq = 0.0;
    for (const auto& cm : p_.c) c_sq += frob_sq(cm);
    norm_c_ = std::sqrt(c_sq);
  }

  void initialize() {
    const std::size_t blocks = p_.dims.size();
    it_.x.resize(blocks);
    it_.s.resize(blocks);
    double max_f = 0.0;
    for (const auto& terms : p_.f) {
      for (const auto& t : terms) max_f = std::max(max_f, t.coeff.norm());
    }
    for (std::size_t m = 0; m < blocks; ++m) {
      const int n = p_.dims[m];
      double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
      for (int k = 0; k < k_; ++k) {
        for (const auto& t : p_.f[static_cast<std::size_t>(k)]) {
          if (t.block == static_cast<int>(m)) {
            xi = std::max(xi, n * (1.0 + std::abs(p_.b(k))) / (1.0 + t.coeff.norm()));
          }
        }
      }
      const double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), max_f, p_.c[m].norm()});
      it_.x[m] = xi * ComplexMatrix::Identity(n, n);
      it_.s[m] = eta * ComplexMatrix::Identity(n, n);
    }
    const double xi_lp = std::max(10.0, std::sqrt(static_cast<double>(k_)) * (1.0 + p_.b.cwiseAbs().maxCoeff()));
    it_.xs = RealVector::Constant(k_, xi_lp);
    it_.zs = RealVector::Constant(k_, std::max(10.0, max_f));
    it_.y = RealVector::Zero(k_);
  }

  SdpSolution run() {
    initialize();
    SdpSolution sol;
    int stalls = 0;
    for (int iter = 0;; ++iter) {
      residuals();
      sol.iterations = iter;
      const double pobj = primal_objective();
      const double dobj = it_.y.dot(p_.b);
      const double gap = std::abs(pobj - dobj) / std::max({std::abs(pobj), std::abs(dobj), 1e-8});
      const double pinf = rp_.norm() / (1.0 + norm_b_);
      double rd_sq = rdz_.squaredNorm();
      for (const auto& r : rd_) rd_sq += frob_sq(r);
      const double dinf = std::sqrt(rd_sq) / (1.0 + norm_c_);
      sol.duality_gap = gap;
      sol.primal_infeasibility = pinf;
      sol.dual_infeasibility = dinf;
      sol.objective_value = pobj;
      sol.dual_objective = dobj;

      if (pinf <= opt_.feas_tol && dinf <= opt_.feas_tol && gap <= opt_.gap_tol) {
        sol.status = SdpStatus::kOptimal;
        break;
      }
      if (pinf > opt_.feas_tol && farkas_check(sol)) break;
      const bool acceptable = pinf <= opt_.acceptable_feas_tol && dinf <= opt_.acceptable_feas_tol &&
                              gap <= opt_.acceptable_gap_tol;
      if (iter >= opt_.max_iter || stalls >= 5) {
        sol.status = acceptable ? SdpStatus::kOptimal : SdpStatus::kMaxIter;
        break;
      }
      const double step = iterate();
      if (!(step > 0.0)) {
        sol.status = acceptable ? SdpStatus::kOptimal : SdpStatus::kMaxIter;
        break;
      }
      stalls = step < 1e-8 ? stalls + 1 : 0;
    }
    sol.blocks = it_.x;
    sol.dual_slacks = it_.s;
    sol.dual = it_.y;
    return sol;
  }

  const Iterate& state() const { return it_; }

 private:
  double primal_objective() const {
    double total = 0.0;
    for (std::size_t m = 0; m < p_.c.size(); ++m) total += trace_inner(p_.c[m], it_.x[m]);
    return total;
  }

  void residuals() {
    rp_ = p_.b;
    for (int k = 0; k < k_; ++k) {
      double ax = -it_.xs(k);
      for (const auto& t : p_.f[static_cast<std::size_t>(k)]) {
        ax += trace_inner(t.coeff, it_.x[static_cast<std::size_t>(t.block)]);
      }
      rp_(k) -= ax;
    }
    rd_.resize(p_.c.size());
    for (std::size_t m = 0; m < p_.c.size(); ++m) rd_[m] = p_.c[m] - it_.s[m];
    for (int k = 0; k < k_; ++k) {
      for (const auto& t : p_.f[static_cast<std::size_t>(k)]) {
        rd_[static_cast<std::size_t>(t.block)] -= it_.y(k) * t.coeff;
      }
    }
    // Slack block: cost 0, coefficient -e_k, so z = y.
    rdz_ = it_.y - it_.zs;
  }

  // Infeasibility certificate from the current multipliers: y >= 0,
  // b^T y = 1 and sum_k y_k F_k negative semidefinite up to a tolerance.
  bool farkas_check(SdpSolution& sol) const {
    RealVector y = it_.y.cwiseMax(0.0);
    const double by = y.dot(p_.b);
    if (!(by > 0.0)) return false;
    y /= by;
    double worst = -kInf;
    for (std::size_t m = 0; m < p_.dims.size(); ++m) {
      ComplexMatrix acc = ComplexMatrix::Zero(p_.dims[m], p_.dims[m]);
      for (const auto& [k, ti] : p_.by_block[m]) {
        acc += y(k) * p_.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(ti)].coeff;
      }
      worst = std::max(worst, max_eigenvalue(acc));
    }
    if (worst <= kFarkasTol * y.sum()) {
      sol.status = SdpStatus::kInfeasible;
      sol.farkas_ray = y;
      sol.farkas_norm = y.norm();
      return true;
    }
    return false;
  }

  // One predictor-corrector step; returns min(primal, dual) step length.
  double iterate() {
    const std::size_t blocks = p_.dims.size();
    sinv_.resize(blocks);
    for (std::size_t m = 0; m < blocks; ++m) {
      Eigen::LLT<ComplexMatrix> llt(it_.s[m]);
      if (llt.info() != Eigen::Success) return 0.0;
      sinv_[m] = llt.solve(ComplexMatrix::Identity(p_.dims[m], p_.dims[m]));
      sinv_[m] = hermitian_part(sinv_[m]);
    }

    // Schur complement M_ij = sum_m Re Tr(F_im X_m F_jm S_m^-1) + delta_ij xs_i / zs_i.
    std::vector<std::vector<ComplexMatrix>> g(static_cast<std::size_t>(k_));
    for (int k = 0; k < k_; ++k) {
      for (const auto& t : p_.f[static_cast<std::size_t>(k)]) {
        const auto m = static_cast<std::size_t>(t.block);
        g[static_cast<std::size_t>(k)].push_back(it_.x[m] * t.coeff * sinv_[m]);
      }
    }
    RealMatrix schur = RealMatrix::Zero(k_, k_);
    for (std::size_t m = 0; m < blocks; ++m) {
      const auto& touching = p_.by_block[m];
      for (const auto& [i, ti] : touching) {
        const auto& fi = p_.f[static_cast<std::size_t>(i)][static_cast<std::size_t>(ti)].coeff;
        for (const auto& [j, tj] : touching) {
          if (j < i) continue;
          const double v = trace_inner(fi, g[static_cast<std::size_t>(j)][static_cast<std::size_t>(tj)]);
          schur(i, j) += v;
          if (i != j) schur(j, i) += v;
        }
      }
    }
    for (int k = 0; k < k_; ++k) schur(k, k) += it_.xs(k) / it_.zs(k);
    schur_llt_.compute(schur);
    use_ldlt_ = schur_llt_.info() != Eigen::Success;
    if (use_ldlt_) {
      schur_ldlt_.compute(schur);
      if (schur_ldlt_.info() != Eigen::Success) return 0.0;
    }

    xrds_.resize(blocks);
    for (std::size_t m = 0; m < blocks; ++m) xrds_[m] = it_.x[m] * rd_[m] * sinv_[m];

    const double mu = complementarity(it_) / nu_;

    // Predictor.
    Direction pred = direction(0.0, nullptr);
    const double ap = std::min(1.0, primal_step(pred));
    const double ad = std::min(1.0, dual_step(pred));
    Iterate trial = it_;
    advance(trial, pred, ap, ad);
    const double mu_aff = complementarity(trial) / nu_;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    Direction corr = direction(sigma * mu, &pred);
    const double gamma = 0.9 + 0.09 * std::min(ap, ad);
    const double cp = std::min(1.0, gamma * primal_step(corr));
    const double cd = std::min(1.0, gamma * dual_step(corr));
    advance(it_, corr, cp, cd);
    return std::min(cp, cd);
  }

  RealVector solve_schur(const RealVector& rhs) const {
    return use_ldlt_ ? RealVector(schur_ldlt_.solve(rhs)) : RealVector(schur_llt_.solve(rhs));
  }

  // HKM direction targeting X S = target_mu I, with optional Mehrotra
  // second-order term from a predictor direction.
  Direction direction(double target_mu, const Direction* pred) const {
    const std::size_t blocks = p_.dims.size();
    std::vector<ComplexMatrix> t(blocks);
    for (std::size_t m = 0; m < blocks; ++m) {
      t[m] = target_mu * sinv_[m] - it_.x[m];
      if (pred != nullptr) t[m] -= hermitian_part(pred->dx[m] * pred->ds[m] * sinv_[m]);
    }
    RealVector tl(k_);
    for (int k = 0; k < k_; ++k) {
      tl(k) = target_mu / it_.zs(k) - it_.xs(k);
      if (pred != nullptr) tl(k) -= pred->dxs(k) * pred->dzs(k) / it_.zs(k);
    }
    RealVector rhs(k_);
    for (int k = 0; k < k_; ++k) {
      double acc = rp_(k) + tl(k) - it_.xs(k) / it_.zs(k) * rdz_(k);
      for (const auto& term : p_.f[static_cast<std::size_t>(k)]) {
        const auto m = static_cast<std::size_t>(term.block);
        acc -= trace_inner(term.coeff, t[m]) - trace_inner(term.coeff, xrds_[m]);
      }
      rhs(k) = acc;
    }
    Direction d;
    d.dy = solve_schur(rhs);
    d.ds = rd_;
    for (int k = 0; k < k_; ++k) {
      for (const auto& term : p_.f[static_cast<std::size_t>(k)]) {
        d.ds[static_cast<std::size_t>(term.block)] -= d.dy(k) * term.coeff;
      }
    }
    d.dx.resize(blocks);
    for (std::size_t m = 0; m < blocks; ++m) {
      d.ds[m] = hermitian_part(d.ds[m]);
      d.dx[m] = hermitian_part(t[m] - hermitian_part(it_.x[m] * d.ds[m] * sinv_[m]));
    }
    d.dzs = rdz_ + d.dy;
    d.dxs = tl - (it_.xs.array() / it_.zs.array() * d.dzs.array()).matrix();
    return d;
  }

  double primal_step(const Direction& d) const {
    double step = max_vec_step(it_.xs, d.dxs);
    for (std::size_t m = 0; m < d.dx.size(); ++m) step = std::min(step, max_psd_step(it_.x[m], d.dx[m]));
    return step;
  }

  double dual_step(const Direction& d) const {
    double step = max_vec_step(it_.zs, d.dzs);
    for (std::size_t m = 0; m < d.ds.size(); ++m) step = std::min(step, max_psd_step(it_.s[m], d.ds[m]));
    return step;
  }

  static void advance(Iterate& it, const Direction& d, double ap, double ad) {
    for (std::size_t m = 0; m < it.x.size(); ++m) {
      it.x[m] += ap * d.dx[m];
      it.s[m] += ad * d.ds[m];
    }
    it.xs += ap * d.dxs;
    it.zs += ad * d.dzs;
    it.y += ad * d.dy;
  }

  const ScaledProblem& p_;
  SdpOptions opt_;
  int k_ = 0;
  double nu_ = 0.0;
  double norm_b_ = 0.0;
  double norm_c_ = 0.0;
  Iterate it_;
  RealVector rp_;
  std::vector<ComplexMatrix> rd_;
  RealVector rdz_;
  std::vector<ComplexMatrix> sinv_;
  std::vector<ComplexMatrix> xrds_;
  Eigen::LLT<RealMatrix> schur_llt_;
  Eigen::LDLT<RealMatrix> schur_ldlt_;
  bool use_ldlt_ = false;
};

void write_matrix(std::ostream& out, const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << m(i, j).real() << ' ' << m(i, j).imag();
    }
    out << '\n';
  }
}

ComplexMatrix read_matrix(std::istream& in, int n) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im)) throw DomainError("read_sdp_problem: truncated matrix");
      m(i, j) = Complex{re, im};
    }
  }
  return m;
}

void expect_token(std::istream& in, const std::string& token) {
  std::string got;
  if (!(in >> got) || got != token) {
    throw DomainError("read_sdp_problem: expected '" + token + "', got '" + got + "'");
  }
}

}  // namespace

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kInfeasible:
      return "infeasible";
    case SdpStatus::kMaxIter:
      return "max_iter";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (objective.size() != block_dims.size()) {
    throw DimensionError("SdpProblem: one objective matrix per block required");
  }
  auto check = [&](const ComplexMatrix& m, int block, const std::string& what) {
    if (block < 0 || block >= static_cast<int>(block_dims.size())) {
      throw DimensionError("SdpProblem: " + what + " refers to a missing block");
    }
    const int n = block_dims[static_cast<std::size_t>(block)];
    if (m.rows() != n || m.cols() != n) {
      throw DimensionError("SdpProblem: " + what + " is not conformable with block " +
                           std::to_string(block));
    }
    require_finite(m, "SdpProblem");
    const double scale = std::max(1.0, m.norm());
    if ((m - m.adjoint()).norm() > 1e-12 * scale * 2.0) {
      throw DomainError("SdpProblem: " + what + " is not Hermitian");
    }
  };
  for (std::size_t m = 0; m < objective.size(); ++m) {
    if (block_dims[m] < 1) throw DimensionError("SdpProblem: empty block");
    check(objective[m], static_cast<int>(m), "objective " + std::to_string(m));
    if (min_eigenvalue(objective[m]) < -1e-10 * std::max(1.0, objective[m].norm())) {
      throw DomainError("SdpProblem: objective matrix " + std::to_string(m) + " is not PSD");
    }
  }
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    if (!std::isfinite(constraints[k].rhs)) throw DomainError("SdpProblem: non-finite rhs");
    for (const auto& t : constraints[k].terms) {
      check(t.coeff, t.block, "constraint " + std::to_string(k));
    }
  }
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  if (!(options.feas_tol > 0.0) || !(options.gap_tol > 0.0) || options.max_iter < 1) {
    throw DomainError("solve_sdp: tolerances must be positive and max_iter >= 1");
  }
  const std::size_t blocks = problem.block_dims.size();
  const std::size_t k_all = problem.constraints.size();

  // Row normalization; structurally empty rows are decided up front.
  std::vector<double> row_norm(k_all, 0.0);
  std::vector<int> active;
  for (std::size_t k = 0; k < k_all; ++k) {
    double sq = 0.0;
    for (const auto& t : problem.constraints[k].terms) sq += frob_sq(t.coeff);
    row_norm[k] = std::sqrt(sq);
    if (row_norm[k] > 0.0) {
      active.push_back(static_cast<int>(k));
    } else if (problem.constraints[k].rhs > 0.0) {
      SdpSolution sol;
      sol.status = SdpStatus::kInfeasible;
      sol.farkas_ray = RealVector::Zero(static_cast<Eigen::Index>(k_all));
      sol.farkas_ray(static_cast<Eigen::Index>(k)) = 1.0 / problem.constraints[k].rhs;
      sol.farkas_norm = sol.farkas_ray.norm();
      for (std::size_t m = 0; m < blocks; ++m) {
        const int n = problem.block_dims[m];
        sol.blocks.push_back(ComplexMatrix::Zero(n, n));
      }
      return sol;
    }
  }

  double c_sq = 0.0;
  for (const auto& c : problem.objective) c_sq += frob_sq(c);
  const double c_scale = c_sq > 0.0 ? std::sqrt(c_sq) : 1.0;

  ScaledProblem sp;
  sp.dims = problem.block_dims;
  sp.by_block.resize(blocks);
  for (const auto& c : problem.objective) sp.c.push_back(c / c_scale);
  sp.b.resize(static_cast<Eigen::Index>(active.size()));
  double x_scale = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const auto k = static_cast<std::size_t>(active[a]);
    sp.b(static_cast<Eigen::Index>(a)) = problem.constraints[k].rhs / row_norm[k];
    x_scale = std::max(x_scale, std::abs(sp.b(static_cast<Eigen::Index>(a))));
  }
  if (!(x_scale > 0.0)) x_scale = 1.0;
  sp.b /= x_scale;
  sp.f.resize(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const auto k = static_cast<std::size_t>(active[a]);
    for (const auto& t : problem.constraints[k].terms) {
      sp.by_block[static_cast<std::size_t>(t.block)].emplace_back(
          static_cast<int>(a), static_cast<int>(sp.f[a].size()));
      sp.f[a].push_back({t.block, hermitian_part(t.coeff) / row_norm[k]});
    }
  }
  for (auto& c : sp.c) c = hermitian_part(c);

  SdpSolution sol;
  if (active.empty()) {
    // Objective PSD and no binding constraint: X = 0 is optimal.
    sol.status = SdpStatus::kOptimal;
    for (std::size_t m = 0; m < blocks; ++m) {
      const int n = problem.block_dims[m];
      sol.blocks.push_back(ComplexMatrix::Zero(n, n));
      sol.dual_slacks.push_back(problem.objective[m]);
    }
    sol.dual = RealVector::Zero(static_cast<Eigen::Index>(k_all));
    for (std::size_t k = 0; k < k_all; ++k) {
      sol.constraint_residuals.push_back(-problem.constraints[k].rhs / std::max(1.0, std::abs(problem.constraints[k].rhs)));
    }
    return sol;
  }

  SdpSolution scaled = InteriorPoint(sp, options).run();
  // A stalled run whose objective is far from unity was badly scaled; the
  // objective magnitude is a good estimate of the variable scale.
  const double magnitude = std::abs(scaled.objective_value);
  if (scaled.status == SdpStatus::kMaxIter && std::isfinite(magnitude) && magnitude > 0.0 &&
      (magnitude > 1e2 || magnitude < 1e-2)) {
    ScaledProblem rescaled = sp;
    rescaled.b /= magnitude;
    SdpSolution retry = InteriorPoint(rescaled, options).run();
    retry.iterations += scaled.iterations;
    if (retry.status != SdpStatus::kMaxIter || retry.duality_gap < scaled.duality_gap) {
      sp = std::move(rescaled);
      x_scale *= magnitude;
      scaled = std::move(retry);
    } else {
      scaled.iterations = retry.iterations;
    }
  }

  sol.status = scaled.status;
  sol.iterations = scaled.iterations;
  sol.duality_gap = scaled.duality_gap;
  sol.primal_infeasibility = scaled.primal_infeasibility;
  sol.dual_infeasibility = scaled.dual_infeasibility;
  sol.objective_value = scaled.objective_value * c_scale * x_scale;
  sol.dual_objective = scaled.dual_objective * c_scale * x_scale;
  for (std::size_t m = 0; m < blocks; ++m) {
    sol.blocks.push_back(hermitian_part(scaled.blocks[m]) * x_scale);
    sol.dual_slacks.push_back(hermitian_part(scaled.dual_slacks[m]) * c_scale);
  }
  sol.dual = RealVector::Zero(static_cast<Eigen::Index>(k_all));
  sol.constraint_residuals.assign(k_all, 0.0);
  for (std::size_t k = 0; k < k_all; ++k) {
    if (row_norm[k] == 0.0) {
      sol.constraint_residuals[k] = -problem.constraints[k].rhs / std::max(1.0, std::abs(problem.constraints[k].rhs));
    }
  }
  for (std::size_t a = 0; a < active.size(); ++a) {
    const auto k = static_cast<std::size_t>(active[a]);
    const auto ai = static_cast<Eigen::Index>(a);
    sol.dual(static_cast<Eigen::Index>(k)) = scaled.dual(ai) * c_scale / row_norm[k];
    double ax = 0.0;
    for (const auto& t : sp.f[a]) ax += trace_inner(t.coeff, scaled.blocks[static_cast<std::size_t>(t.block)]);
    sol.constraint_residuals[k] = ax - sp.b(ai);
  }
  if (sol.status == SdpStatus::kInfeasible) {
    sol.farkas_ray = RealVector::Zero(static_cast<Eigen::Index>(k_all));
    // Map the normalized ray back: y_k = y''_k / (row_norm_k * x_scale) keeps b^T y = 1.
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto k = static_cast<std::size_t>(active[a]);
      sol.farkas_ray(static_cast<Eigen::Index>(k)) =
          scaled.farkas_ray(static_cast<Eigen::Index>(a)) / (row_norm[k] * x_scale);
    }
    sol.farkas_norm = sol.farkas_ray.norm();
  }
  return sol;
}

Rank1Extraction extract_rank1(const ComplexMatrix& block) {
  require_square(block, "extract_rank1");
  Rank1Extraction out;
  const Eigen::Index n = block.rows();
  out.vector = ComplexVector::Zero(n);
  if (n == 0) return out;
  const HermitianEig eig = hermitian_eig(block);
  const double l1 = eig.eigenvalues(0);
  if (!(l1 > 0.0)) return out;
  out.vector = std::sqrt(l1) * eig.eigenvectors.col(0);
  out.rank_ratio = n > 1 ? std::max(eig.eigenvalues(1), 0.0) / l1 : 0.0;
  return out;
}

std::optional<RealVector> min_power_scaling(const std::vector<ComplexVector>& beams,
                                            const std::vector<ComplexVector>& channels,
                                            const RealVector& targets, const RealVector& noise) {
  const auto k_count = static_cast<Eigen::Index>(channels.size());
  if (static_cast<Eigen::Index>(beams.size()) != k_count || targets.size() != k_count ||
      noise.size() != k_count) {
    throw DimensionError("min_power_scaling: need one beam, target and noise value per user");
  }
  RealMatrix g(k_count, k_count);
  RealVector rhs(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto& gk = channels[static_cast<std::size_t>(k)];
    for (Eigen::Index m = 0; m < k_count; ++m) {
      const auto& v = beams[static_cast<std::size_t>(m)];
      if (v.size() != gk.size()) throw DimensionError("min_power_scaling: beam length mismatch");
      const double a = std::norm(gk.dot(v));  // |g^H v|^2
      g(k, m) = (k == m) ? a : -targets(k) * a;
    }
    rhs(k) = targets(k) * noise(k);
  }
  Eigen::FullPivLU<RealMatrix> lu(g);
  if (!lu.isInvertible()) return std::nullopt;
  RealVector p = lu.solve(rhs);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    if (!std::isfinite(p(k)) || !(p(k) > 0.0)) return std::nullopt;
  }
  return p;
}

RecoveredBeams randomize_and_rescale(const std::vector<ComplexMatrix>& blocks,
                                     const SinrContext& context, int trials, CounterRng& rng) {
  const std::size_t k_count = context.channels.size();
  if (blocks.size() != k_count) {
    throw DimensionError("randomize_and_rescale: need one block per user");
  }
  auto power_of = [&](const ComplexVector& v) {
    if (context.cost.size() == 0) return v.squaredNorm();
    return std::real(v.dot(context.cost * v));
  };

  RecoveredBeams best;
  auto consider = [&](std::vector<ComplexVector> beams, int trial) {
    auto p = min_power_scaling(beams, context.channels, context.targets, context.noise);
    if (!p) return;
    double total = 0.0;
    for (std::size_t m = 0; m < k_count; ++m) {
      beams[m] *= std::sqrt((*p)(static_cast<Eigen::Index>(m)));
      total += power_of(beams[m]);
    }
    if (!best.feasible || total < best.power) {
      best.feasible = true;
      best.power = total;
      best.vectors = std::move(beams);
      best.scalings = *p;
      best.trial = trial;
    }
  };

  std::vector<HermitianEig> eigs;
  std::vector<ComplexVector> principal;
  eigs.reserve(k_count);
  for (const auto& x : blocks) {
    eigs.push_back(hermitian_eig(x));
    const auto& e = eigs.back();
    const double l1 = std::max(e.eigenvalues(0), 0.0);
    principal.push_back(std::sqrt(l1) * e.eigenvectors.col(0));
  }
  consider(principal, 0);

  for (int t = 1; t <= trials; ++t) {
    std::vector<ComplexVector> beams;
    beams.reserve(k_count);
    for (const auto& e : eigs) {
      const Eigen::Index n = e.eigenvalues.size();
      ComplexVector xi(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        xi(i) = std::sqrt(std::max(e.eigenvalues(i), 0.0)) * rng.complex_normal();
      }
      beams.push_back(e.eigenvectors * xi);
    }
    consider(std::move(beams), t);
  }
  return best;
}

void write_sdp_problem(std::ostream& out, const SdpProblem& problem) {
  problem.validate();
  const auto old_precision = out.precision(17);
  out << "dmabf-sdp 1\n";
  out << "blocks " << problem.block_dims.size();
  for (int d : problem.block_dims) out << ' ' << d;
  out << "\nobjective\n";
  for (const auto& c : problem.objective) write_matrix(out, c);
  out << "constraints " << problem.constraints.size() << '\n';
  for (const auto& con : problem.constraints) {
    out << "constraint " << con.rhs << ' ' << con.terms.size() << '\n';
    for (const auto& t : con.terms) {
      out << "term " << t.block << '\n';
      write_matrix(out, t.coeff);
    }
  }
  out.precision(old_precision);
}

SdpProblem read_sdp_problem(std::istream& in) {
  SdpProblem p;
  expect_token(in, "dmabf-sdp");
  int version = 0;
  if (!(in >> version) || version != 1) throw DomainError("read_sdp_problem: unsupported version");
  expect_token(in, "blocks");
  std::size_t blocks = 0;
  in >> blocks;
  p.block_dims.resize(blocks);
  for (auto& d : p.block_dims) in >> d;
  expect_token(in, "objective");
  for (std::size_t m = 0; m < blocks; ++m) p.objective.push_back(read_matrix(in, p.block_dims[m]));
  expect_token(in, "constraints");
  std::size_t k_count = 0;
  in >> k_count;
  for (std::size_t k = 0; k < k_count; ++k) {
    expect_token(in, "constraint");
    SdpConstraint con;
    std::size_t terms = 0;
    in >> con.rhs >> terms;
    for (std::size_t t = 0; t < terms; ++t) {
      expect_token(in, "term");
      SdpTerm term;
      in >> term.block;
      if (term.block < 0 || term.block >= static_cast<int>(blocks)) {
        throw DimensionError("read_sdp_problem: term refers to a missing block");
      }
      term.coeff = read_matrix(in, p.block_dims[static_cast<std::size_t>(term.block)]);
      con.terms.push_back(std::move(term));
    }
    p.constraints.push_back(std::move(con));
  }
  if (!in) throw DomainError("read_sdp_problem: malformed input");
  p.validate();
  return p;
}

}  // namespace dmabf
