#include "dmabf/dma_model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dmabf/sdp.hpp"

namespace dmabf {
namespace {

void check_geometry(const ArrayGeometry& geometry) {
  if (geometry.n_rows < 1 || geometry.n_cols < 1 ||
      static_cast<int>(geometry.element_positions.size()) != geometry.size()) {
    throw DimensionError("DmaState: malformed array geometry");
  }
}

// sum_l |s_l - P(c s_l) / c|^2 for one microstrip.
double fit_cost(const ComplexVector& s, Complex c) {
  double cost = 0.0;
  for (Eigen::Index l = 0; l < s.size(); ++l) {
    cost += std::norm(s(l) - lorentzian_project(c * s(l)).value / c);
  }
  return cost;
}

Complex fit_row_scale(const ComplexVector& s) {
  const double peak = s.cwiseAbs().maxCoeff();
  if (peak == 0.0) return Complex{1.0, 0.0};

  constexpr int kThetaGrid = 64;
  constexpr int kScaleGrid = 41;
  const double log_lo = std::log(0.02);
  const double log_hi = std::log(50.0);

  Complex best_c{1.0, 0.0};
  double best = fit_cost(s, best_c);
  double best_log_t = std::log(peak);
  double best_theta = 0.0;
  for (int it = 0; it < kScaleGrid; ++it) {
    const double log_t = log_lo + (log_hi - log_lo) * it / (kScaleGrid - 1);
    for (int ith = 0; ith < kThetaGrid; ++ith) {
      const double theta = 2.0 * kPi * ith / kThetaGrid;
      const Complex c = std::polar(std::exp(log_t) / peak, theta);
      const double cost = fit_cost(s, c);
      if (cost < best) {
        best = cost;
        best_c = c;
        best_log_t = log_t;
        best_theta = theta;
      }
    }
  }

  // Golden-section refinement of the scale at the best grid phase.
  const double step = (log_hi - log_lo) / (kScaleGrid - 1);
  double a = best_log_t - step;
  double b = best_log_t + step;
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto cost_at = [&](double log_t) {
    return fit_cost(s, std::polar(std::exp(log_t) / peak, best_theta));
  };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = cost_at(x1);
  double f2 = cost_at(x2);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = cost_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = cost_at(x2);
    }
  }
  const double log_t = 0.5 * (a + b);
  const Complex refined = std::polar(std::exp(log_t) / peak, best_theta);
  if (fit_cost(s, refined) < best) best_c = refined;
  return best_c;
}

}  // namespace

DmaState::DmaState(ArrayGeometry geometry, Complex initial_weight)
    : DmaState(geometry, RealVector::Zero(geometry.n_rows), RealVector::Zero(geometry.n_rows),
               initial_weight) {}

DmaState::DmaState(ArrayGeometry geometry, const RealVector& alpha, const RealVector& beta,
                   Complex initial_weight)
    : geometry_(std::move(geometry)), alpha_(alpha), beta_(beta) {
  check_geometry(geometry_);
  if (alpha_.size() != geometry_.n_rows || beta_.size() != geometry_.n_rows) {
    throw DimensionError("DmaState: alpha/beta need one entry per microstrip");
  }
  if ((alpha_.array() < 0.0).any()) {
    throw DomainError("DmaState: attenuation constants must be non-negative");
  }
  const int n = geometry_.size();
  offsets_.resize(n);
  h_diag_.resize(n);
  for (int e = 0; e < n; ++e) {
    const int row = row_of(e);
    offsets_(e) = geometry_.feed_offset(e % geometry_.n_cols);
    h_diag_(e) = std::exp(-offsets_(e) * Complex{alpha_(row), beta_(row)});
  }
  weights_ = ComplexVector::Constant(n, initial_weight);
}

void DmaState::set_weights(const ComplexVector& q) {
  if (q.size() != size()) {
    throw DimensionError("DmaState::set_weights: expected " + std::to_string(size()) +
                         " weights, got " + std::to_string(q.size()));
  }
  require_finite(q, "DmaState::set_weights");
  weights_ = q;
}

ComplexMatrix DmaState::h_matrix() const {
  return h_diag_.asDiagonal();
}

ComplexMatrix DmaState::q_matrix() const {
  ComplexMatrix q = ComplexMatrix::Zero(size(), n_rows());
  for (int e = 0; e < size(); ++e) q(e, row_of(e)) = weights_(e);
  return q;
}

ComplexMatrix DmaState::effective_matrix() const {
  ComplexMatrix hq = ComplexMatrix::Zero(size(), n_rows());
  for (int e = 0; e < size(); ++e) hq(e, row_of(e)) = h_diag_(e) * weights_(e);
  return hq;
}

ComplexVector DmaState::transmit_vector(const ComplexVector& w) const {
  if (w.size() != n_rows()) {
    throw DimensionError("transmit_vector: precoder length " + std::to_string(w.size()) +
                         " != number of microstrips " + std::to_string(n_rows()));
  }
  ComplexVector x(size());
  for (int e = 0; e < size(); ++e) x(e) = h_diag_(e) * weights_(e) * w(row_of(e));
  return x;
}

double DmaState::lorentzian_violation() const {
  double worst = 0.0;
  for (Eigen::Index e = 0; e < weights_.size(); ++e) {
    worst = std::max(worst, std::abs(std::abs(weights_(e) - 0.5 * kJ) - 0.5));
  }
  return worst;
}

Complex lorentzian_point(double phi) {
  return 0.5 * (kJ + std::polar(1.0, phi));
}

double lorentzian_phase(Complex q) {
  double phi = std::arg(2.0 * q - kJ);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
  return phi;
}

LorentzianProjection lorentzian_project(Complex z) {
  const Complex center = 0.5 * kJ;
  const Complex offset = z - center;
  const double dist = std::abs(offset);
  if (dist == 0.0) return {kJ, kPi / 2, true};
  const Complex q = center + 0.5 * (offset / dist);
  return {q, lorentzian_phase(q), false};
}

ComplexVector map_to_lorentzian(const ComplexVector& q_star, int n_rows, int n_cols) {
  if (q_star.size() != static_cast<Eigen::Index>(n_rows) * n_cols) {
    throw DimensionError("map_to_lorentzian: weight vector does not match the array");
  }
  ComplexVector q(q_star.size());
  for (int i = 0; i < n_rows; ++i) {
    const ComplexVector row = q_star.segment(static_cast<Eigen::Index>(i) * n_cols, n_cols);
    const Complex c = fit_row_scale(row);
    for (int l = 0; l < n_cols; ++l) {
      q(i * n_cols + l) = lorentzian_project(c * row(l)).value;
    }
  }
  return q;
}

ComplexVector random_lorentzian_weights(int n, CounterRng& rng) {
  ComplexVector q(n);
  for (int e = 0; e < n; ++e) q(e) = lorentzian_point(2.0 * kPi * rng.uniform());
  return q;
}

std::vector<Eigen::Index> structural_support(int n_rows, int n_cols) {
  const Eigen::Index n = static_cast<Eigen::Index>(n_rows) * n_cols;
  std::vector<Eigen::Index> support;
  support.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index e = 0; e < n; ++e) {
    const Eigen::Index column = e / n_cols;  // Q(e, i) is nonzero only for i = row(e)
    support.push_back(column * n + e);
  }
  return support;
}

WeightSdpData build_weight_sdp(const DmaState& state, const std::vector<ComplexVector>& precoders,
                               const std::vector<ComplexVector>& channels) {
  const int n = state.size();
  const int n_rows = state.n_rows();
  for (const auto& w : precoders) {
    if (w.size() != n_rows) throw DimensionError("build_weight_sdp: precoder length mismatch");
  }
  for (const auto& g : channels) {
    if (g.size() != n) throw DimensionError("build_weight_sdp: channel length mismatch");
  }
  const auto support = structural_support(n_rows, state.n_cols());
  const ComplexVector& h = state.h_diag();

  // Column c*N + r of (w^T kron H) is w[c] * H(:, r) = w[c] h_r e_r, and of
  // (w^T kron gamma^H H) is w[c] conj(gamma_r) h_r.
  WeightSdpData data;
  const std::size_t m_count = precoders.size();
  data.a_tilde.reserve(m_count);
  data.b_tilde.reserve(m_count);
  for (const auto& w : precoders) {
    ComplexMatrix kron_cols = ComplexMatrix::Zero(n, n);  // (w^T kron H) restricted to support
    for (int j = 0; j < n; ++j) {
      const Eigen::Index idx = support[static_cast<std::size_t>(j)];
      const Eigen::Index c = idx / n;
      const Eigen::Index r = idx % n;
      kron_cols(r, j) = w(c) * h(r);
    }
    ComplexMatrix a_tilde = kron_cols.adjoint();
    data.b_tilde.push_back(a_tilde * a_tilde.adjoint());
    data.a_tilde.push_back(std::move(a_tilde));
  }
  data.c_tilde.resize(channels.size());
  data.big_c_tilde.resize(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const ComplexVector& gamma = channels[k];
    for (const auto& w : precoders) {
      ComplexVector row(n);  // (w^T kron gamma^H H) restricted to support
      for (int j = 0; j < n; ++j) {
        const Eigen::Index idx = support[static_cast<std::size_t>(j)];
        const Eigen::Index c = idx / n;
        const Eigen::Index r = idx % n;
        row(j) = w(c) * std::conj(gamma(r)) * h(r);
      }
      ComplexVector c_tilde = row.conjugate();
      data.big_c_tilde[k].push_back(c_tilde * c_tilde.adjoint());
      data.c_tilde[k].push_back(std::move(c_tilde));
    }
  }
  return data;
}

WeightExtraction extract_q_from_sdp(const ComplexMatrix& q_tilde_matrix) {
  auto [q, ratio] = extract_rank1(q_tilde_matrix);
  return {std::move(q), ratio};
}

}  // namespace dmabf
