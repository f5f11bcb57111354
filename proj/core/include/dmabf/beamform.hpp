#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmabf/channel.hpp"
#include "dmabf/dma_model.hpp"
#include "dmabf/numerics.hpp"
#include "dmabf/sdp.hpp"

namespace dmabf {

/// FD: fully digital, one RF chain per element (x_m = w_m).
/// DMA: x_m = H Q w_m with Lorentzian-constrained weights.
/// UW: the DMA architecture with unrestricted complex weights.
enum class Architecture { kFd, kDma, kUw };

std::string to_string(Architecture a);

/// 2^rate - 1.
double sinr_target_from_rate(double rate_bits_per_hz);
/// log2(1 + sinr).
double rate_from_sinr(double sinr);

/// One downlink power-minimization problem: user channels, linear SINR
/// targets and noise powers (watts), plus the DMA description when the
/// architecture needs one.
struct ScenarioInstance {
  std::vector<ComplexVector> channels;
  RealVector targets;
  RealVector noise_powers;
  std::optional<DmaState> dma;
  Architecture architecture = Architecture::kFd;

  [[nodiscard]] int user_count() const { return static_cast<int>(channels.size()); }
  /// min(K, N_r) for DMA/UW, K for FD.
  [[nodiscard]] int beam_count() const;
  /// Throws DimensionError / DomainError. DMA/UW additionally require
  /// K <= N_r, since user k is served by beam k.
  void validate() const;
};

enum class BeamformStatus { kConverged, kInfeasible, kMaxIter };

std::string to_string(BeamformStatus status);

struct BeamformingResult {
  BeamformStatus status = BeamformStatus::kInfeasible;
  /// Length N for FD, N_r for DMA/UW.
  std::vector<ComplexVector> precoders;
  /// Element weights q~ (DMA/UW only).
  std::optional<ComplexVector> weights;
  double tx_power_watts = 0.0;
  RealVector achieved_sinrs;
  /// Outer iterations performed (0 for FD).
  int iterations = 0;
  /// Best-kept transmit power after initialization and after each outer
  /// iteration. Never increases.
  std::vector<double> power_trace;
  /// Feasible-point power of each outer iteration's candidate (infinity when
  /// the precoder step was infeasible).
  std::vector<double> candidate_trace;
  /// lambda_2 / lambda_1 of every extracted SDP block.
  std::vector<double> rank_ratios;
  int sdp_solves = 0;
  int restarts = 0;
};

struct Evaluation {
  double tx_power = 0.0;
  RealVector sinrs;
};

/// Transmit power sum_m ||x_m||^2 and per-user SINR
/// |g_k^H x_k|^2 / (sum_{m != k} |g_k^H x_m|^2 + noise_k).
/// For DMA/UW, x_m = H Q w_m with Q built from `weights` (or the instance's
/// current weights when omitted).
Evaluation evaluate(const ScenarioInstance& instance, const std::vector<ComplexVector>& precoders,
                    const std::optional<ComplexVector>& weights = std::nullopt);

/// Radiated beams x_m for a set of precoders.
std::vector<ComplexVector> radiated_beams(const ScenarioInstance& instance,
                                          const std::vector<ComplexVector>& precoders,
                                          const std::optional<ComplexVector>& weights = std::nullopt);

struct BeamformSettings {
  SdpOptions sdp{1e-8, 1e-9, 100};
  /// Gaussian draws used when an SDP block is not rank one.
  int randomization_trials = 30;
  /// Blocks with lambda_2/lambda_1 above this go through randomization.
  double rank_one_threshold = 1e-6;
  /// Outer iterations T of the alternating scheme.
  int max_outer_iterations = 20;
  /// Stop after this many consecutive iterations improving the kept power
  /// by less than `early_stop_tol` (relative).
  int early_stop_patience = 3;
  double early_stop_tol = 1e-4;
  /// Fresh random weight initializations tried when the first precoder
  /// problem is infeasible.
  int max_restarts = 5;
  /// solve_uw also runs the Lorentzian-mapped chain from the same start and
  /// keeps whichever feasible point is cheaper.
  bool uw_tracks_mapped_chain = true;
  /// A fully digital SDP that stalls short of its tolerances still counts
  /// as solved when its gap and primal residual are below this, since the
  /// recovered beams are rescaled to exact feasibility anyway.
  double stalled_sdp_tol = 1e-5;
  std::uint64_t seed = 0;
};

/// Fully digital optimum: one SDP over X_m = x_m x_m^H, principal-eigenvector
/// recovery (randomization if a block is not rank one) and a final
/// min-power rescaling so the returned beams meet every SINR target.
BeamformingResult solve_fd(const ScenarioInstance& instance, const BeamformSettings& settings = {});

/// Alternating optimization for the DMA: precoder SDP for fixed weights,
/// weight SDP for fixed precoders, Lorentzian mapping of the recovered
/// weights, and a keep-if-not-worse acceptance on the feasible-point power.
BeamformingResult solve_dma(const ScenarioInstance& instance, const BeamformSettings& settings = {});

/// Same loop as solve_dma with the Lorentzian mapping skipped. Unless
/// disabled in the settings, the mapped chain is run alongside and its
/// points compete in the acceptance step, so the result never exceeds
/// solve_dma with the same settings.
BeamformingResult solve_uw(const ScenarioInstance& instance, const BeamformSettings& settings = {});

/// Dispatches on instance.architecture.
BeamformingResult solve(const ScenarioInstance& instance, const BeamformSettings& settings = {});

/// Number of complex design variables:
/// N_r N_c M for FD, N_r (M + N_c) for DMA/UW.
long dof_count(Architecture mode, int n_rows, int n_cols, int beams);

/// Building blocks of the alternating scheme, exposed for testing.
namespace detail {

struct PrecoderStep {
  bool feasible = false;
  std::vector<ComplexVector> precoders;
  double power = 0.0;
  std::vector<double> rank_ratios;
  SdpStatus sdp_status = SdpStatus::kMaxIter;
};

/// Solves the precoder SDP for the weights currently stored in `dma`.
PrecoderStep precoder_step(const ScenarioInstance& instance, const DmaState& dma,
                           const BeamformSettings& settings, CounterRng& rng);

struct WeightStep {
  bool solved = false;
  ComplexVector q_star;
  double rank_ratio = 0.0;
  double relaxation_power = 0.0;
};

/// Solves the weight SDP for fixed precoders and recovers q~*.
WeightStep weight_step(const ScenarioInstance& instance, const DmaState& dma,
                       const std::vector<ComplexVector>& precoders, const BeamformSettings& settings);

/// Assembles the weight SDP.
SdpProblem weight_problem(const ScenarioInstance& instance, const DmaState& dma,
                          const std::vector<ComplexVector>& precoders);

/// Assembles the fully digital SDP.
SdpProblem fd_problem(const ScenarioInstance& instance);

}  // namespace detail

}  // namespace dmabf
