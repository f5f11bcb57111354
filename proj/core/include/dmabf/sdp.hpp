#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dmabf/numerics.hpp"
#include "dmabf/rng.hpp"

namespace dmabf {

/// One coefficient F_{k,m} of a trace constraint, acting on block `block`.
struct SdpTerm {
  int block = 0;
  ComplexMatrix coeff;
};

/// sum_terms Tr(F_{k,m} X_m) >= rhs.
struct SdpConstraint {
  std::vector<SdpTerm> terms;
  double rhs = 0.0;
};

/// minimize sum_m Tr(C_m X_m)
/// s.t.     sum_m Tr(F_{k,m} X_m) >= b_k   for every constraint k
///          X_m Hermitian PSD
///
/// Coefficient matrices must be Hermitian and the objective matrices PSD.
struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<ComplexMatrix> objective;
  std::vector<SdpConstraint> constraints;

  /// Throws DimensionError / DomainError on malformed input.
  void validate() const;
};

enum class SdpStatus { kOptimal, kInfeasible, kMaxIter };

std::string to_string(SdpStatus status);

struct SdpOptions {
  /// Relative primal and dual residual tolerance.
  double feas_tol = 1e-8;
  /// |pobj - dobj| / max(|pobj|, |dobj|), measured on the normalized problem.
  double gap_tol = 1e-6;
  int max_iter = 100;
  /// When progress stalls or max_iter is hit before the targets above are
  /// met, the iterate is still reported optimal if it meets these.
  double acceptable_feas_tol = 1e-7;
  double acceptable_gap_tol = 1e-6;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kMaxIter;
  std::vector<ComplexMatrix> blocks;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  /// (sum Tr(F_k X) - b_k) / (||F_k||_F * s), with s the internal variable
  /// scale: the slack of each constraint in normalized units.
  std::vector<double> constraint_residuals;
  /// Multipliers y_k >= 0 and dual slacks S_m = C_m - sum_k y_k F_{k,m}.
  RealVector dual;
  std::vector<ComplexMatrix> dual_slacks;
  /// For kInfeasible: y >= 0 with b^T y = 1 and sum_k y_k F_{k,m} <= eps I.
  RealVector farkas_ray;
  double farkas_norm = 0.0;
  int iterations = 0;
};

/// Primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector) working directly on the Hermitian blocks. Inequality
/// constraints carry nonnegative slack variables. Data are normalized per
/// constraint and the variable is rescaled before iterating.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

struct Rank1Extraction {
  ComplexVector vector;
  double rank_ratio = 0.0;
};

/// sqrt(lambda_1) v_1 of a PSD matrix plus lambda_2 / lambda_1. A matrix
/// with no positive eigenvalue gives the zero vector and ratio 0.
Rank1Extraction extract_rank1(const ComplexMatrix& block);

/// Min-power scaling p_m >= 0 of fixed beams v_m meeting
/// p_k a_kk / (sum_{m != k} p_m a_km + noise_k) >= target_k, with
/// a_km = |g_k^H v_m|^2. Feasible iff the tight linear system has a strictly
/// positive solution, which is then componentwise minimal.
std::optional<RealVector> min_power_scaling(const std::vector<ComplexVector>& beams,
                                            const std::vector<ComplexVector>& channels,
                                            const RealVector& targets, const RealVector& noise);

struct SinrContext {
  /// Effective channels g_k in the variable domain (one per user / block).
  std::vector<ComplexVector> channels;
  RealVector targets;
  RealVector noise;
  /// Power metric v^H C v of a beam; identity when empty.
  ComplexMatrix cost;
};

struct RecoveredBeams {
  bool feasible = false;
  std::vector<ComplexVector> vectors;
  RealVector scalings;
  double power = 0.0;
  /// 0 for the principal-eigenvector candidate, t >= 1 for Gaussian draw t.
  int trial = -1;
};

/// Recovers feasible beams from SDP blocks: the principal eigenvectors and
/// `trials` Gaussian draws v_m ~ CN(0, X_m) are each rescaled by
/// min_power_scaling, and the cheapest feasible candidate is returned.
RecoveredBeams randomize_and_rescale(const std::vector<ComplexMatrix>& blocks,
                                     const SinrContext& context, int trials, CounterRng& rng);

/// Plain-text dump of a problem for cross-checking with external solvers:
///
///   dmabf-sdp 1
///   blocks <M> <n_1> ... <n_M>
///   objective            (then, per block, n rows of n "re im" pairs)
///   constraints <K>
///   constraint <rhs> <term count>
///   term <block>         (then n rows of n "re im" pairs)
///
/// Values are written with 17 significant digits.
void write_sdp_problem(std::ostream& out, const SdpProblem& problem);
SdpProblem read_sdp_problem(std::istream& in);

}  // namespace dmabf
