#pragma once

#include <vector>

#include "dmabf/channel.hpp"
#include "dmabf/numerics.hpp"
#include "dmabf/rng.hpp"

namespace dmabf {

/// A dynamic metasurface antenna: N_r microstrips, each feeding N_c tunable
/// elements. The waveguide response H is diagonal and the weight matrix Q is
/// block-diagonal (element n = i*N_c + l only couples to RF chain i), so both
/// are stored by their N nonzero entries.
class DmaState {
 public:
  /// Lossless waveguide (H = I) with all weights set to `initial_weight`.
  explicit DmaState(ArrayGeometry geometry, Complex initial_weight = Complex{0.0, 1.0});

  /// Waveguide with per-microstrip attenuation (Np/m, >= 0) and propagation
  /// constant (rad/m): H_nn = exp(-d_{i,l} (alpha_i + j beta_i)).
  DmaState(ArrayGeometry geometry, const RealVector& alpha, const RealVector& beta,
           Complex initial_weight = Complex{0.0, 1.0});

  [[nodiscard]] const ArrayGeometry& geometry() const { return geometry_; }
  [[nodiscard]] int n_rows() const { return geometry_.n_rows; }
  [[nodiscard]] int n_cols() const { return geometry_.n_cols; }
  [[nodiscard]] int size() const { return geometry_.size(); }
  [[nodiscard]] int row_of(int element) const { return element / geometry_.n_cols; }

  [[nodiscard]] const ComplexVector& h_diag() const { return h_diag_; }
  [[nodiscard]] const ComplexVector& weights() const { return weights_; }
  [[nodiscard]] const RealVector& alpha() const { return alpha_; }
  [[nodiscard]] const RealVector& beta() const { return beta_; }
  [[nodiscard]] const RealVector& element_offsets() const { return offsets_; }

  void set_weights(const ComplexVector& q);

  /// Dense N x N waveguide matrix.
  [[nodiscard]] ComplexMatrix h_matrix() const;
  /// Dense N x N_r weight matrix in block-diagonal form.
  [[nodiscard]] ComplexMatrix q_matrix() const;
  /// H Q, the N x N_r map from RF-chain inputs to radiated element signals.
  [[nodiscard]] ComplexMatrix effective_matrix() const;

  /// H Q w evaluated from the block structure.
  [[nodiscard]] ComplexVector transmit_vector(const ComplexVector& w) const;

  /// Largest deviation of any weight from the Lorentzian circle.
  [[nodiscard]] double lorentzian_violation() const;

 private:
  ArrayGeometry geometry_;
  RealVector alpha_;
  RealVector beta_;
  RealVector offsets_;
  ComplexVector h_diag_;
  ComplexVector weights_;
};

/// (j + e^{j phi}) / 2.
Complex lorentzian_point(double phi);

/// Phase phi in [0, 2pi) of a point on the Lorentzian circle.
double lorentzian_phase(Complex q);

struct LorentzianProjection {
  Complex value;
  double phase = 0.0;
  /// Set when z is the circle center and every point is equally near.
  bool tie = false;
};

/// Nearest point of {(j + e^{j phi}) / 2} to z. The center j/2 maps to q = j.
LorentzianProjection lorentzian_project(Complex z);

/// Entry-wise projection after fitting, per microstrip, the complex scale
/// c_i that minimizes sum_l |s_l - P(c_i s_l) / c_i|^2. A per-row scale is
/// absorbed exactly by the digital precoder, so the fit only changes which
/// circle points are selected. The unscaled projection (c_i = 1) is always
/// among the candidates.
ComplexVector map_to_lorentzian(const ComplexVector& q_star, int n_rows, int n_cols);

/// Independent uniform phases on the Lorentzian circle.
ComplexVector random_lorentzian_weights(int n, CounterRng& rng);

/// Positions in vec(Q) (Q is N x N_r, column-major) of the N entries that
/// are not structurally zero, ordered by element index.
std::vector<Eigen::Index> structural_support(int n_rows, int n_cols);

/// Coefficients of the weight-optimization SDP for fixed precoders.
/// b_tilde[m] = A~_m A~_m^H, c_tilde[k][m] such that gamma_k^H H Q w_m =
/// c_tilde[k][m]^H q~, and big_c_tilde[k][m] = c~ c~^H.
struct WeightSdpData {
  std::vector<ComplexMatrix> a_tilde;
  std::vector<ComplexMatrix> b_tilde;
  std::vector<std::vector<ComplexVector>> c_tilde;
  std::vector<std::vector<ComplexMatrix>> big_c_tilde;
};

/// Builds the reduced Kronecker-form coefficients. Only the columns of
/// (w_m^T kron H) and (w_m^T kron gamma_k^H H) that survive the
/// structural-zero deletion are formed.
WeightSdpData build_weight_sdp(const DmaState& state, const std::vector<ComplexVector>& precoders,
                               const std::vector<ComplexVector>& channels);

struct WeightExtraction {
  ComplexVector q;
  double rank_ratio = 0.0;
};

/// Principal-eigenvector recovery of q~ from the weight SDP solution.
WeightExtraction extract_q_from_sdp(const ComplexMatrix& q_tilde_matrix);

}  // namespace dmabf
