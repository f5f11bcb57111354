#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

/// Dense complex linear-algebra kernel shared by the channel, DMA, SDP and
/// beamforming layers. Everything here is a pure function of its inputs.
namespace dmabf {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kJ{0.0, 1.0};

/// Thrown when operand shapes are not conformable or a matrix is not square.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for NaN/Inf entries or arguments outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order and column j of `eigenvectors` pairs with eigenvalue j.
struct HermitianEig {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

bool all_finite(const ComplexMatrix& m);
void require_finite(const ComplexMatrix& m, std::string_view what);
void require_square(const ComplexMatrix& m, std::string_view what);

/// (M + M^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Decomposes a Hermitian matrix; the input is symmetrized first, so
/// round-off asymmetry is tolerated. The zero matrix yields zero eigenvalues
/// with the standard basis.
HermitianEig hermitian_eig(const ComplexMatrix& m);

/// Smallest / largest eigenvalue of the Hermitian part of `m`.
double min_eigenvalue(const ComplexMatrix& m);
double max_eigenvalue(const ComplexMatrix& m);

/// Standard Kronecker product a ⊗ b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Column-major stacking of the columns of `m`.
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols);

/// Re Tr(A B); the Frobenius inner product for Hermitian A, B.
double trace_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// 10^((dBm - 30) / 10).
double dbm_to_watts(double dbm);
/// Inverse of dbm_to_watts. Returns -infinity for 0 W; negative power is a
/// DomainError.
double watts_to_dbm(double watts);

}  // namespace dmabf
