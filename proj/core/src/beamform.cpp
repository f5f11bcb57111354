#include "dmabf/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace dmabf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSinrSlack = 1e-6;

// SINR constraints for effective channels g_k over K blocks.
std::vector<SdpConstraint> sinr_constraints(const std::vector<ComplexVector>& g,
                                            const RealVector& targets, const RealVector& noise) {
  const auto k_count = g.size();
  std::vector<SdpConstraint> out(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const ComplexMatrix gamma = g[k] * g[k].adjoint();
    const double delta = targets(static_cast<Eigen::Index>(k));
    out[k].rhs = delta * noise(static_cast<Eigen::Index>(k));
    for (std::size_t m = 0; m < k_count; ++m) {
      out[k].terms.push_back({static_cast<int>(m), m == k ? gamma : ComplexMatrix(-delta * gamma)});
    }
  }
  return out;
}

bool meets_targets(const RealVector& sinrs, const RealVector& targets) {
  for (Eigen::Index k = 0; k < targets.size(); ++k) {
    if (!(sinrs(k) >= targets(k) * (1.0 - kSinrSlack))) return false;
  }
  return true;
}

// Effective channels (HQ)^H gamma_k seen by the precoders.
std::vector<ComplexVector> effective_channels(const ScenarioInstance& instance, const DmaState& dma) {
  const ComplexMatrix hq = dma.effective_matrix();
  std::vector<ComplexVector> g;
  g.reserve(instance.channels.size());
  for (const auto& gamma : instance.channels) g.push_back(hq.adjoint() * gamma);
  return g;
}

std::vector<ComplexVector> recover(const std::vector<ComplexMatrix>& blocks, const SinrContext& ctx,
                                   const BeamformSettings& settings, CounterRng& rng,
                                   std::vector<double>& rank_ratios, bool& ok) {
  bool rank_one = true;
  for (const auto& x : blocks) {
    const double ratio = extract_rank1(x).rank_ratio;
    rank_ratios.push_back(ratio);
    if (ratio > settings.rank_one_threshold) rank_one = false;
  }
  const int trials = rank_one ? 0 : settings.randomization_trials;
  RecoveredBeams beams = randomize_and_rescale(blocks, ctx, trials, rng);
  ok = beams.feasible;
  return std::move(beams.vectors);
}

BeamformingResult finalize(const ScenarioInstance& instance, BeamformingResult result) {
  if (result.precoders.empty()) return result;
  const Evaluation eval = evaluate(instance, result.precoders, result.weights);
  // The kept power and a fresh evaluation agree to rounding; report the kept
  // value so the trace ends exactly at the returned power.
  result.tx_power_watts = result.power_trace.empty() ? eval.tx_power : result.power_trace.back();
  result.achieved_sinrs = eval.sinrs;
  if (result.status == BeamformStatus::kConverged && !meets_targets(eval.sinrs, instance.targets)) {
    result.status = BeamformStatus::kMaxIter;
  }
  return result;
}

BeamformingResult alternate(const ScenarioInstance& instance, const BeamformSettings& settings,
                            bool lorentzian) {
  instance.validate();
  if (!instance.dma) throw DomainError("alternating solver requires a DMA description");
  if (settings.max_outer_iterations < 1) throw DomainError("need at least one outer iteration");

  CounterRng init_rng = CounterRng::stream(settings.seed, 0);
  CounterRng rec_rng = CounterRng::stream(settings.seed, 1);
  DmaState dma = *instance.dma;
  const int n = dma.size();

  BeamformingResult result;
  detail::PrecoderStep current;
  for (int attempt = 0; attempt <= settings.max_restarts; ++attempt) {
    dma.set_weights(random_lorentzian_weights(n, init_rng));
    current = detail::precoder_step(instance, dma, settings, rec_rng);
    ++result.sdp_solves;
    result.rank_ratios.insert(result.rank_ratios.end(), current.rank_ratios.begin(),
                              current.rank_ratios.end());
    if (current.feasible) break;
    ++result.restarts;
  }
  if (!current.feasible) {
    result.status = BeamformStatus::kInfeasible;
    return result;
  }

  ComplexVector best_q = dma.weights();
  std::vector<ComplexVector> best_w = current.precoders;
  double best_power = current.power;
  result.power_trace.push_back(best_power);

  int quiet = 0;
  for (int t = 1; t <= settings.max_outer_iterations; ++t) {
    result.iterations = t;
    const double before = best_power;
    detail::WeightStep ws = detail::weight_step(instance, dma, current.precoders, settings);
    ++result.sdp_solves;
    if (ws.solved) {
      result.rank_ratios.push_back(ws.rank_ratio);
      ComplexVector q = lorentzian ? map_to_lorentzian(ws.q_star, dma.n_rows(), dma.n_cols())
                                   : ws.q_star;
      DmaState trial = dma;
      trial.set_weights(q);
      detail::PrecoderStep next = detail::precoder_step(instance, trial, settings, rec_rng);
      ++result.sdp_solves;
      result.rank_ratios.insert(result.rank_ratios.end(), next.rank_ratios.begin(),
                                next.rank_ratios.end());
      result.candidate_trace.push_back(next.feasible ? next.power : kInf);
      if (next.feasible) {
        if (next.power <= best_power) {
          best_power = next.power;
          best_q = q;
          best_w = next.precoders;
        }
        dma = std::move(trial);
        current = std::move(next);
      }
    } else {
      result.candidate_trace.push_back(kInf);
    }
    result.power_trace.push_back(best_power);

    const double gain = (before - best_power) / before;
    quiet = gain < settings.early_stop_tol ? quiet + 1 : 0;
    if (quiet >= settings.early_stop_patience) break;
  }

  result.status = BeamformStatus::kConverged;
  result.precoders = std::move(best_w);
  result.weights = std::move(best_q);
  return finalize(instance, std::move(result));
}

}  // namespace

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::kFd:
      return "FD";
    case Architecture::kDma:
      return "DMA";
    case Architecture::kUw:
      return "UW";
  }
  return "unknown";
}

std::string to_string(BeamformStatus status) {
  switch (status) {
    case BeamformStatus::kConverged:
      return "converged";
    case BeamformStatus::kInfeasible:
      return "infeasible";
    case BeamformStatus::kMaxIter:
      return "max_iter";
  }
  return "unknown";
}

double sinr_target_from_rate(double rate_bits_per_hz) {
  if (!(rate_bits_per_hz >= 0.0)) throw DomainError("rate must be non-negative");
  return std::exp2(rate_bits_per_hz) - 1.0;
}

double rate_from_sinr(double sinr) {
  return std::log2(1.0 + sinr);
}

int ScenarioInstance::beam_count() const {
  const int k = user_count();
  if (architecture == Architecture::kFd || !dma) return k;
  return std::min(k, dma->n_rows());
}

void ScenarioInstance::validate() const {
  const int k = user_count();
  if (k < 1) throw DomainError("ScenarioInstance: need at least one user");
  if (targets.size() != k || noise_powers.size() != k) {
    throw DimensionError("ScenarioInstance: need one target and one noise power per user");
  }
  for (int i = 0; i < k; ++i) {
    if (!(targets(i) > 0.0) || !std::isfinite(targets(i))) {
      throw DomainError("ScenarioInstance: SINR targets must be positive");
    }
    if (!(noise_powers(i) > 0.0) || !std::isfinite(noise_powers(i))) {
      throw DomainError("ScenarioInstance: noise powers must be positive");
    }
  }
  const Eigen::Index n = channels.front().size();
  for (const auto& g : channels) {
    if (g.size() != n || n == 0) throw DimensionError("ScenarioInstance: channel lengths differ");
    require_finite(g, "ScenarioInstance channel");
  }
  if (architecture != Architecture::kFd) {
    if (!dma) throw DomainError("ScenarioInstance: DMA/UW mode requires a DMA description");
    if (dma->size() != n) throw DimensionError("ScenarioInstance: channel length != DMA elements");
    if (k > dma->n_rows()) {
      throw DomainError("ScenarioInstance: " + std::to_string(k) + " users exceed the " +
                        std::to_string(dma->n_rows()) + " RF chains of the DMA");
    }
  }
}

std::vector<ComplexVector> radiated_beams(const ScenarioInstance& instance,
                                          const std::vector<ComplexVector>& precoders,
                                          const std::optional<ComplexVector>& weights) {
  if (instance.architecture == Architecture::kFd) return precoders;
  if (!instance.dma) throw DomainError("radiated_beams: DMA description missing");
  DmaState dma = *instance.dma;
  if (weights) dma.set_weights(*weights);
  std::vector<ComplexVector> x;
  x.reserve(precoders.size());
  for (const auto& w : precoders) x.push_back(dma.transmit_vector(w));
  return x;
}

Evaluation evaluate(const ScenarioInstance& instance, const std::vector<ComplexVector>& precoders,
                    const std::optional<ComplexVector>& weights) {
  const int k_count = instance.user_count();
  if (static_cast<int>(precoders.size()) != k_count) {
    throw DimensionError("evaluate: need one precoder per user");
  }
  const std::vector<ComplexVector> x = radiated_beams(instance, precoders, weights);
  Evaluation out;
  out.sinrs.resize(k_count);
  for (const auto& beam : x) {
    if (beam.size() != instance.channels.front().size()) {
      throw DimensionError("evaluate: beam length does not match the channels");
    }
    out.tx_power += beam.squaredNorm();
  }
  for (int k = 0; k < k_count; ++k) {
    const auto& g = instance.channels[static_cast<std::size_t>(k)];
    double interference = instance.noise_powers(k);
    double signal = 0.0;
    for (int m = 0; m < k_count; ++m) {
      const double p = std::norm(g.dot(x[static_cast<std::size_t>(m)]));
      if (m == k) {
        signal = p;
      } else {
        interference += p;
      }
    }
    out.sinrs(k) = signal / interference;
  }
  return out;
}

namespace detail {

SdpProblem fd_problem(const ScenarioInstance& instance) {
  const int k = instance.user_count();
  const auto n = static_cast<int>(instance.channels.front().size());
  SdpProblem p;
  p.block_dims.assign(static_cast<std::size_t>(k), n);
  p.objective.assign(static_cast<std::size_t>(k), ComplexMatrix::Identity(n, n));
  p.constraints = sinr_constraints(instance.channels, instance.targets, instance.noise_powers);
  return p;
}

PrecoderStep precoder_step(const ScenarioInstance& instance, const DmaState& dma,
                           const BeamformSettings& settings, CounterRng& rng) {
  PrecoderStep out;
  const int beams = instance.beam_count();
  const std::vector<ComplexVector> g = effective_channels(instance, dma);
  const ComplexMatrix hq = dma.effective_matrix();
  const ComplexMatrix z = hq.adjoint() * hq;
  const double trace = z.trace().real();
  if (!(trace > 0.0)) return out;
  // Keeps the objective strictly convex when a microstrip has zero weights.
  const ComplexMatrix z_reg = z + (1e-12 * trace / z.rows()) * ComplexMatrix::Identity(z.rows(), z.cols());

  SdpProblem p;
  p.block_dims.assign(static_cast<std::size_t>(beams), dma.n_rows());
  p.objective.assign(static_cast<std::size_t>(beams), z_reg);
  p.constraints = sinr_constraints(g, instance.targets, instance.noise_powers);
  const SdpSolution sol = solve_sdp(p, settings.sdp);
  out.sdp_status = sol.status;
  if (sol.status == SdpStatus::kInfeasible) return out;

  SinrContext ctx{g, instance.targets, instance.noise_powers, z};
  bool ok = false;
  out.precoders = recover(sol.blocks, ctx, settings, rng, out.rank_ratios, ok);
  if (!ok) return out;
  out.feasible = true;
  out.power = 0.0;
  for (const auto& w : out.precoders) out.power += std::real(w.dot(z * w));
  return out;
}

SdpProblem weight_problem(const ScenarioInstance& instance, const DmaState& dma,
                          const std::vector<ComplexVector>& precoders) {
  const WeightSdpData data = build_weight_sdp(dma, precoders, instance.channels);
  const int n = dma.size();
  SdpProblem p;
  p.block_dims = {n};
  ComplexMatrix objective = ComplexMatrix::Zero(n, n);
  for (const auto& b : data.b_tilde) objective += b;
  p.objective = {objective};
  const std::size_t k_count = instance.channels.size();
  for (std::size_t k = 0; k < k_count; ++k) {
    const double delta = instance.targets(static_cast<Eigen::Index>(k));
    ComplexMatrix f = data.big_c_tilde[k][k];
    for (std::size_t m = 0; m < precoders.size(); ++m) {
      if (m != k) f -= delta * data.big_c_tilde[k][m];
    }
    p.constraints.push_back({{{0, f}}, delta * instance.noise_powers(static_cast<Eigen::Index>(k))});
  }
  return p;
}

WeightStep weight_step(const ScenarioInstance& instance, const DmaState& dma,
                       const std::vector<ComplexVector>& precoders, const BeamformSettings& settings) {
  WeightStep out;
  const SdpSolution sol = solve_sdp(weight_problem(instance, dma, precoders), settings.sdp);
  if (sol.status == SdpStatus::kInfeasible) return out;
  const WeightExtraction ex = extract_q_from_sdp(sol.blocks.front());
  if (ex.q.squaredNorm() == 0.0) return out;
  out.solved = true;
  out.q_star = ex.q;
  out.rank_ratio = ex.rank_ratio;
  out.relaxation_power = sol.objective_value;
  return out;
}

}  // namespace detail

BeamformingResult solve_fd(const ScenarioInstance& instance, const BeamformSettings& settings) {
  instance.validate();
  BeamformingResult result;
  const SdpSolution sol = solve_sdp(detail::fd_problem(instance), settings.sdp);
  result.sdp_solves = 1;
  if (sol.status == SdpStatus::kInfeasible) {
    result.status = BeamformStatus::kInfeasible;
    return result;
  }
  CounterRng rng = CounterRng::stream(settings.seed, 1);
  SinrContext ctx{instance.channels, instance.targets, instance.noise_powers, ComplexMatrix()};
  bool ok = false;
  result.precoders = recover(sol.blocks, ctx, settings, rng, result.rank_ratios, ok);
  if (!ok) {
    result.status = BeamformStatus::kMaxIter;
    result.precoders.clear();
    return result;
  }
  const bool near_optimal = sol.duality_gap <= settings.stalled_sdp_tol &&
                            sol.primal_infeasibility <= settings.stalled_sdp_tol;
  result.status = sol.status == SdpStatus::kOptimal || near_optimal ? BeamformStatus::kConverged
                                                                    : BeamformStatus::kMaxIter;
  result = finalize(instance, std::move(result));
  result.power_trace = {result.tx_power_watts};
  return result;
}

BeamformingResult solve_dma(const ScenarioInstance& instance, const BeamformSettings& settings) {
  return alternate(instance, settings, true);
}

BeamformingResult solve_uw(const ScenarioInstance& instance, const BeamformSettings& settings) {
  BeamformingResult free_chain = alternate(instance, settings, false);
  if (!settings.uw_tracks_mapped_chain || free_chain.status == BeamformStatus::kInfeasible) {
    return free_chain;
  }
  // Lorentzian weights are admissible unrestricted weights, so the mapped
  // chain started from the same draw competes in the acceptance step.
  BeamformingResult mapped_chain = alternate(instance, settings, true);
  const bool use_mapped = mapped_chain.status == BeamformStatus::kConverged &&
                          (free_chain.status != BeamformStatus::kConverged ||
                           mapped_chain.tx_power_watts < free_chain.tx_power_watts);
  BeamformingResult out = use_mapped ? mapped_chain : free_chain;
  const auto& a = free_chain.power_trace;
  const auto& b = mapped_chain.power_trace;
  const std::size_t len = std::max(a.size(), b.size());
  out.power_trace.clear();
  for (std::size_t t = 0; t < len; ++t) {
    const double pa = a.empty() ? kInf : a[std::min(t, a.size() - 1)];
    const double pb = b.empty() ? kInf : b[std::min(t, b.size() - 1)];
    out.power_trace.push_back(std::min(pa, pb));
  }
  out.iterations = std::max(free_chain.iterations, mapped_chain.iterations);
  out.sdp_solves = free_chain.sdp_solves + mapped_chain.sdp_solves;
  return out;
}

BeamformingResult solve(const ScenarioInstance& instance, const BeamformSettings& settings) {
  switch (instance.architecture) {
    case Architecture::kFd:
      return solve_fd(instance, settings);
    case Architecture::kDma:
      return solve_dma(instance, settings);
    case Architecture::kUw:
      return solve_uw(instance, settings);
  }
  throw DomainError("solve: unknown architecture");
}

long dof_count(Architecture mode, int n_rows, int n_cols, int beams) {
  if (n_rows < 1 || n_cols < 1 || beams < 1) {
    throw DomainError("dof_count: counts must be positive");
  }
  const long nr = n_rows;
  if (mode == Architecture::kFd) return nr * n_cols * beams;
  return nr * (beams + n_cols);
}

}  // namespace dmabf
