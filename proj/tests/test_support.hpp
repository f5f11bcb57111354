#pragma once

#include <cmath>
#include <vector>

#include "dmabf/beamform.hpp"
#include "dmabf/harness.hpp"
#include "dmabf/rng.hpp"

namespace dmabf::testing {

inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
  }
  return m;
}

inline ComplexVector random_vector(Eigen::Index n, CounterRng& rng) {
  ComplexVector v(n);
  for (auto& x : v) x = rng.complex_normal();
  return v;
}

inline ComplexMatrix random_hermitian(Eigen::Index n, CounterRng& rng) {
  const ComplexMatrix a = random_matrix(n, n, rng);
  return (a + a.adjoint()) / 2.0;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// minimize sum Tr(X_m) s.t. Tr(P_k X_k) - delta_k sum_{m != k} Tr(P_k X_m) >= delta_k sigma_k^2,
/// with P_k = g_k g_k^H, assembled independently of the library.
inline SdpProblem beamforming_sdp(const std::vector<ComplexVector>& g, const std::vector<double>& delta,
                                  const std::vector<double>& noise) {
  const auto k_count = static_cast<int>(g.size());
  const auto n = g.front().size();
  SdpProblem p;
  p.block_dims.assign(k_count, static_cast<int>(n));
  p.objective.assign(k_count, ComplexMatrix::Identity(n, n));
  for (int k = 0; k < k_count; ++k) {
    const ComplexMatrix pk = g[k] * g[k].adjoint();
    SdpConstraint c;
    c.rhs = delta[k] * noise[k];
    for (int m = 0; m < k_count; ++m) c.terms.push_back({m, m == k ? pk : ComplexMatrix(-delta[k] * pk)});
    p.constraints.push_back(std::move(c));
  }
  return p;
}

/// Random SDP with PD objective and positive right-hand sides (so X = 0 is
/// infeasible), strictly feasible at X0 = B B^H + I.
inline SdpProblem random_generic_sdp(CounterRng& rng, int blocks, int max_dim, int constraints) {
  SdpProblem p;
  std::vector<ComplexMatrix> x0;
  for (int m = 0; m < blocks; ++m) {
    const int n = 1 + static_cast<int>(rng.uniform() * max_dim);
    p.block_dims.push_back(n);
    const ComplexMatrix a = random_matrix(n, n, rng);
    p.objective.push_back(a * a.adjoint() + 0.1 * ComplexMatrix::Identity(n, n));
    const ComplexMatrix b = random_matrix(n, n, rng);
    x0.push_back(b * b.adjoint() + ComplexMatrix::Identity(n, n));
  }
  for (int k = 0; k < constraints; ++k) {
    SdpConstraint c;
    double at_x0 = 0.0;
    for (int m = 0; m < blocks; ++m) {
      if (blocks > 1 && rng.uniform() < 0.3) continue;
      const ComplexMatrix f = random_hermitian(p.block_dims[m], rng);
      at_x0 += trace_inner(f, x0[m]);
      c.terms.push_back({m, f});
    }
    if (c.terms.empty()) {
      const ComplexMatrix f = random_hermitian(p.block_dims[0], rng);
      at_x0 += trace_inner(f, x0[0]);
      c.terms.push_back({0, f});
    }
    // Orient the row so X0 sits strictly inside a binding half-space.
    if (at_x0 < 0.0) {
      for (auto& t : c.terms) t.coeff = -t.coeff;
      at_x0 = -at_x0;
    }
    c.rhs = at_x0 * (0.3 + 0.6 * rng.uniform());
    p.constraints.push_back(std::move(c));
  }
  return p;
}

/// Desk-scale instance built the same way the harness builds it.
inline ScenarioInstance desk_instance(const ScenarioConfig& cfg, int realization, Architecture arch,
                                      bool fd_spacing = false) {
  const auto users = draw_users(cfg, realization);
  const ArrayGeometry geometry = fd_spacing ? cfg.fd_geometry() : cfg.dma_geometry();
  ScenarioInstance inst;
  inst.architecture = arch;
  for (int k = 0; k < cfg.k; ++k) {
    inst.channels.push_back(channel_vector(geometry, users[k], cfg.wavelength(), k).entries);
  }
  inst.targets = RealVector::Constant(cfg.k, sinr_target_from_rate(cfg.r_min));
  inst.noise_powers = RealVector::Constant(cfg.k, dbm_to_watts(cfg.noise_dbm));
  if (arch != Architecture::kFd) inst.dma.emplace(geometry);
  return inst;
}

/// Power of an FD / DMA solution recomputed from scratch: sum_m ||x_m||^2
/// and the SINR of every user from explicit inner products.
struct Recomputed {
  double power = 0.0;
  std::vector<double> sinrs;
};

inline Recomputed recompute(const ScenarioInstance& inst, const BeamformingResult& res) {
  std::vector<ComplexVector> x;
  for (const auto& w : res.precoders) {
    if (inst.architecture == Architecture::kFd) {
      x.push_back(w);
    } else {
      DmaState state = *inst.dma;
      state.set_weights(*res.weights);
      x.push_back(state.h_matrix() * state.q_matrix() * w);
    }
  }
  Recomputed out;
  for (const auto& v : x) out.power += v.squaredNorm();
  for (int k = 0; k < inst.user_count(); ++k) {
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      Complex acc = 0.0;
      for (Eigen::Index n = 0; n < x[m].size(); ++n) acc += std::conj(inst.channels[k](n)) * x[m](n);
      if (static_cast<int>(m) == k) {
        signal = std::norm(acc);
      } else {
        interference += std::norm(acc);
      }
    }
    out.sinrs.push_back(signal / (interference + inst.noise_powers(k)));
  }
  return out;
}

}  // namespace dmabf::testing
