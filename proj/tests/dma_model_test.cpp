#include <gtest/gtest.h>

#include <cmath>

#include "dmabf/dma_model.hpp"
#include "test_support.hpp"

namespace dmabf {
namespace {

using testing::random_matrix;
using testing::random_vector;

ArrayGeometry small_geometry(int rows, int cols) { return ArrayGeometry::grid(rows, cols, 0.002, 0.005); }

DmaState random_state(int rows, int cols, CounterRng& rng, bool lossy = true) {
  RealVector alpha = RealVector::Zero(rows);
  RealVector beta = RealVector::Zero(rows);
  if (lossy) {
    for (int i = 0; i < rows; ++i) {
      alpha(i) = 5.0 * rng.uniform();
      beta(i) = 800.0 * rng.uniform();
    }
  }
  DmaState s(small_geometry(rows, cols), alpha, beta);
  s.set_weights(random_lorentzian_weights(rows * cols, rng));
  return s;
}

// Independent dense construction of vec(Q)'s structural support from the
// block pattern: Q(n, i) may be nonzero only when element n sits on row i.
std::vector<Eigen::Index> dense_support(int rows, int cols) {
  const int n = rows * cols;
  std::vector<Eigen::Index> out;
  for (int i = 0; i < rows; ++i) {
    for (int e = 0; e < n; ++e) {
      if (e / cols == i) out.push_back(static_cast<Eigen::Index>(i) * n + e);
    }
  }
  return out;
}

TEST(DmaState, QMatrixBlockDiagonal) {
  CounterRng rng = CounterRng::stream(21, 0);
  const DmaState s = random_state(3, 4, rng);
  const ComplexMatrix q = s.q_matrix();
  ASSERT_EQ(q.rows(), 12);
  ASSERT_EQ(q.cols(), 3);
  for (int e = 0; e < 12; ++e) {
    for (int i = 0; i < 3; ++i) {
      if (e / 4 == i) {
        EXPECT_EQ(q(e, i), s.weights()(e));
      } else {
        EXPECT_EQ(q(e, i), Complex(0.0));
      }
    }
  }
  EXPECT_LE(s.lorentzian_violation(), 1e-12);
  EXPECT_LE(s.h_diag().cwiseAbs().maxCoeff(), 1.0 + 1e-15);
}

TEST(DmaState, RejectsNegativeAttenuation) {
  EXPECT_ANY_THROW(DmaState(small_geometry(2, 2), RealVector::Constant(2, -1.0), RealVector::Zero(2)));
}

TEST(TransmitVector, IdentityWaveguideIndicator) {
  DmaState s(small_geometry(3, 2), Complex(1.0));
  ComplexVector w = ComplexVector::Zero(3);
  w(0) = 1.0;
  const ComplexVector x = s.transmit_vector(w);
  for (int e = 0; e < 6; ++e) EXPECT_EQ(x(e), Complex(e < 2 ? 1.0 : 0.0));
}

TEST(TransmitVector, ZeroWeightsGiveZero) {
  DmaState s(small_geometry(2, 3), Complex(0.0));
  CounterRng rng = CounterRng::stream(22, 0);
  EXPECT_EQ(s.transmit_vector(random_vector(2, rng)).norm(), 0.0);
}

TEST(TransmitVector, MatchesDenseProduct) {
  CounterRng rng = CounterRng::stream(23, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DmaState s = random_state(3, 5, rng);
    const ComplexVector w = random_vector(3, rng);
    const ComplexVector dense = s.h_matrix() * s.q_matrix() * w;
    EXPECT_LE((dense - s.transmit_vector(w)).norm(), 1e-12 * dense.norm());
  }
  DmaState s(small_geometry(2, 2));
  EXPECT_THROW(s.transmit_vector(ComplexVector::Zero(3)), DimensionError);
}

TEST(Lorentzian, Parametrization) {
  for (double phi = 0.0; phi < 2 * kPi; phi += 0.01) {
    const Complex q = lorentzian_point(phi);
    EXPECT_NEAR(std::abs(q - kJ / 2.0), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(q), std::abs(std::cos((phi - kPi / 2) / 2)), 1e-15);
    EXPECT_NEAR(std::remainder(lorentzian_phase(q) - phi, 2 * kPi), 0.0, 1e-12);
  }
}

TEST(Lorentzian, ProjectionExamples) {
  auto p = lorentzian_project(kJ);
  EXPECT_NEAR(std::abs(p.value - kJ), 0.0, 1e-15);
  EXPECT_NEAR(p.phase, kPi / 2, 1e-15);
  p = lorentzian_project(Complex(0.0));
  EXPECT_NEAR(std::abs(p.value), 0.0, 1e-15);
  EXPECT_NEAR(p.phase, 3 * kPi / 2, 1e-15);
  p = lorentzian_project(Complex(1.0));
  EXPECT_NEAR(p.value.real(), 0.44721, 5e-6);
  EXPECT_NEAR(p.value.imag(), 0.27639, 5e-6);
  EXPECT_FALSE(p.tie);
  p = lorentzian_project(kJ / 2.0);
  EXPECT_TRUE(p.tie);
  EXPECT_EQ(p.value, kJ);
}

// Nearest point on a fine phase grid; the exact answer for z = 1 is
// j/2 + (1 - j/2) / (2 |1 - j/2|).
TEST(Lorentzian, ProjectionOfOneAgainstGrid) {
  const Complex z = 1.0;
  double best = std::numeric_limits<double>::infinity();
  Complex arg;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Complex q = lorentzian_point(2 * kPi * i / n);
    if (std::abs(z - q) < best) {
      best = std::abs(z - q);
      arg = q;
    }
  }
  EXPECT_NEAR(std::abs(lorentzian_project(z).value - arg), 0.0, 1e-5);
}

TEST(MapToLorentzian, OutputsOnCircleAndNeverWorseThanNaive) {
  CounterRng rng = CounterRng::stream(24, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector q = random_vector(12, rng) * std::exp(3.0 * rng.normal());
    const ComplexVector mapped = map_to_lorentzian(q, 3, 4);
    for (const auto& v : mapped) EXPECT_NEAR(std::abs(v - kJ / 2.0), 0.5, 1e-12);
    // Scale-normalized cost per row, mapped vs naive projection.
    for (int i = 0; i < 3; ++i) {
      auto row_cost = [&](const ComplexVector& p, Complex c) {
        double cost = 0.0;
        for (int l = 0; l < 4; ++l) cost += std::norm(q(4 * i + l) - p(4 * i + l) / c);
        return cost;
      };
      ComplexVector naive(12);
      for (int e = 0; e < 12; ++e) naive(e) = lorentzian_project(q(e)).value;
      // The fitted scale is not returned; the best one for the mapped points
      // is the least-squares fit of q ~ p / c, i.e. 1/c = p^H q / ||p||^2.
      const ComplexVector pm = mapped.segment(4 * i, 4);
      const ComplexVector qs = q.segment(4 * i, 4);
      const Complex c_fit = pm.squaredNorm() / pm.dot(qs);
      EXPECT_LE(row_cost(mapped, c_fit), row_cost(naive, 1.0) * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST(StructuralSupport, MatchesDenseMask) {
  for (auto [r, c] : {std::pair{1, 1}, {2, 3}, {3, 2}, {4, 4}}) {
    EXPECT_EQ(structural_support(r, c), dense_support(r, c));
  }
}

// Dense Kronecker oracle for the reduced weight-SDP coefficients.
TEST(WeightSdp, MatchesDenseKronecker) {
  CounterRng rng = CounterRng::stream(25, 0);
  const int rows = 2;
  const int cols = 3;
  const int n = rows * cols;
  const DmaState s = random_state(rows, cols, rng);
  const std::vector<ComplexVector> w = {random_vector(rows, rng), random_vector(rows, rng)};
  const std::vector<ComplexVector> gamma = {random_vector(n, rng), random_vector(n, rng)};
  const auto data = build_weight_sdp(s, w, gamma);
  const auto support = dense_support(rows, cols);
  const ComplexMatrix h = s.h_matrix();
  for (std::size_t m = 0; m < w.size(); ++m) {
    const ComplexMatrix full = kron(w[m].transpose(), h);  // N x N N_r
    ComplexMatrix reduced(n, n);
    for (int j = 0; j < n; ++j) reduced.col(j) = full.col(support[j]);
    EXPECT_LE((data.a_tilde[m].adjoint() - reduced).norm(), 1e-12 * reduced.norm());
    EXPECT_LE((data.b_tilde[m] - reduced.adjoint() * reduced).norm(), 1e-12 * reduced.squaredNorm());
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const ComplexMatrix row = gamma[k].adjoint() * reduced;
      EXPECT_LE((data.c_tilde[k][m] - row.adjoint()).norm(), 1e-12 * row.norm());
      const auto eig = hermitian_eig(data.big_c_tilde[k][m]);
      EXPECT_LE(eig.eigenvalues(1), 1e-10 * eig.eigenvalues(0));
    }
  }
}

TEST(WeightSdp, ReductionConsistency) {
  CounterRng rng = CounterRng::stream(26, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DmaState s = random_state(2, 3, rng);
    const std::vector<ComplexVector> w = {random_vector(2, rng), random_vector(2, rng)};
    const std::vector<ComplexVector> gamma = {random_vector(6, rng)};
    const auto data = build_weight_sdp(s, w, gamma);
    const ComplexVector& q = s.weights();
    const ComplexMatrix qq = q * q.adjoint();
    for (std::size_t m = 0; m < w.size(); ++m) {
      const ComplexVector x = s.h_matrix() * s.q_matrix() * w[m];
      EXPECT_LE(testing::rel_diff(trace_inner(data.b_tilde[m], qq), x.squaredNorm()), 1e-10);
      const Complex y_direct = gamma[0].dot(x);
      const Complex y_reduced = data.c_tilde[0][m].dot(q);
      EXPECT_LE(std::abs(y_direct - y_reduced), 1e-10 * std::abs(y_direct));
      EXPECT_LE(testing::rel_diff(trace_inner(data.big_c_tilde[0][m], qq), std::norm(y_direct)), 1e-10);
      EXPECT_GE(min_eigenvalue(data.b_tilde[m]), -1e-10 * data.b_tilde[m].norm());
    }
  }
}

TEST(WeightSdp, ZeroPrecodersGiveZeroData) {
  DmaState s(small_geometry(2, 2));
  const auto data = build_weight_sdp(s, {ComplexVector::Zero(2)}, {ComplexVector::Ones(4)});
  EXPECT_EQ(data.b_tilde[0].norm(), 0.0);
  EXPECT_EQ(data.c_tilde[0][0].norm(), 0.0);
}

TEST(WeightSdp, DimensionChecks) {
  DmaState s(small_geometry(2, 2));
  EXPECT_THROW(build_weight_sdp(s, {ComplexVector::Zero(3)}, {ComplexVector::Ones(4)}), DimensionError);
  EXPECT_THROW(build_weight_sdp(s, {ComplexVector::Zero(2)}, {ComplexVector::Ones(5)}), DimensionError);
}

TEST(ExtractQ, Examples) {
  CounterRng rng = CounterRng::stream(27, 0);
  const ComplexVector q = random_vector(6, rng);
  const auto ex = extract_q_from_sdp(q * q.adjoint());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(ex.q(i)), std::abs(q(i)), 1e-9);
  EXPECT_LE(ex.rank_ratio, 1e-12);
  EXPECT_NEAR(extract_q_from_sdp(ComplexMatrix::Identity(4, 4)).rank_ratio, 1.0, 1e-12);
  const auto zero = extract_q_from_sdp(ComplexMatrix::Zero(3, 3));
  EXPECT_EQ(zero.q.norm(), 0.0);
  EXPECT_EQ(zero.rank_ratio, 0.0);
  const ComplexMatrix noisy = q * q.adjoint() + 1e-8 * testing::random_hermitian(6, rng);
  EXPECT_LE(extract_q_from_sdp(noisy).rank_ratio, 1e-6);
}

}  // namespace
}  // namespace dmabf
