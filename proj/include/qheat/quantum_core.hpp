#pragma once

// Dense finite-dimensional operator algebra: spectral decompositions,
// propagators, projective measurement bases and the measurement-sequence
// operator V(k, tau) = Pi_{k_M} U(tau_M) ... Pi_{k_1} U(tau_1).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qheat/error.hpp"

namespace qheat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermitian_input = 1e-10;
inline constexpr double degeneracy = 1e-9;
inline constexpr double constructed = 1e-12;
inline constexpr double composed = 1e-10;
}  // namespace tol

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Rotates v so that its largest-magnitude entry is real and positive.
// Near-ties (within 1e-12) resolve to the lowest index.
inline void fix_phase(Eigen::Ref<ComplexVector> v) {
  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= max_abs - 1e-12) {
      pivot = i;
      break;
    }
  }
  v *= std::conj(v(pivot)) / std::abs(v(pivot));
}

/// Hermitian operator together with its spectral decomposition.
///
/// Eigenvalues are ascending and pairwise separated by more than
/// tol::degeneracy; eigenvector columns are orthonormal with the phase
/// convention of fix_phase(). Construct through spectral_decompose().
class HermitianOperator {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const ComplexMatrix& eigenvectors() const { return eigenvectors_; }

  double energy(std::size_t n) const { return eigenvalues_(static_cast<Eigen::Index>(n)); }
  ComplexVector eigenvector(std::size_t n) const { return eigenvectors_.col(static_cast<Eigen::Index>(n)); }
  ComplexMatrix energy_projector(std::size_t n) const {
    const ComplexVector v = eigenvector(n);
    return v * v.adjoint();
  }

  // V diag(phase(E_n)) V^dagger
  template <typename PhaseFn>
  ComplexMatrix spectral_function(PhaseFn&& phase) const {
    ComplexVector d(eigenvalues_.size());
    for (Eigen::Index n = 0; n < d.size(); ++n) d(n) = phase(eigenvalues_(n));
    return eigenvectors_ * d.asDiagonal() * eigenvectors_.adjoint();
  }

 private:
  friend HermitianOperator spectral_decompose(const ComplexMatrix& m);
  HermitianOperator(ComplexMatrix matrix, RealVector eigenvalues, ComplexMatrix eigenvectors)
      : matrix_(std::move(matrix)), eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {}

  ComplexMatrix matrix_;
  RealVector eigenvalues_;
  ComplexMatrix eigenvectors_;
};

inline HermitianOperator spectral_decompose(const ComplexMatrix& m) {
  require(m.rows() >= 1 && m.rows() == m.cols(), "operator must be square with dim >= 1");
  require(all_finite(m), "operator has non-finite entries");
  const double defect = hermiticity_defect(m);
  if (defect > tol::hermitian_input)
    fail(ErrorCode::NotHermitian, "max |m - m^dagger| = " + std::to_string(defect));

  const ComplexMatrix symmetric = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(symmetric);
  if (solver.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "eigensolver did not converge");

  RealVector values = solver.eigenvalues();
  ComplexMatrix vectors = solver.eigenvectors();
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) - values(i - 1) < tol::degeneracy)
      fail(ErrorCode::DegenerateSpectrum,
           "eigenvalues " + std::to_string(values(i - 1)) + " and " + std::to_string(values(i)) + " coincide");
  }
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) fix_phase(vectors.col(j));
  return HermitianOperator(m, std::move(values), std::move(vectors));
}

/// U(t) = exp(-i H t).
inline ComplexMatrix propagator(const HermitianOperator& h, double t) {
  require(std::isfinite(t), "propagator time must be finite");
  return h.spectral_function([t](double e) { return std::exp(Complex(0.0, -e * t)); });
}

/// exp(i u H) for complex u; u = i*beta gives exp(-beta H).
inline ComplexMatrix exp_iu_h(const HermitianOperator& h, Complex u) {
  require(std::isfinite(u.real()) && std::isfinite(u.imag()), "u must be finite");
  const Complex iu = Complex(0.0, 1.0) * u;
  return h.spectral_function([iu](double e) { return std::exp(iu * e); });
}

/// Ordered rank-1 orthogonal projectors Pi_k = |v_k><v_k| with outcomes o_k.
class MeasurementBasis {
 public:
  // Columns of `vectors` are the basis states; they must be orthonormal.
  static MeasurementBasis from_vectors(const ComplexMatrix& vectors, std::vector<double> outcomes = {}) {
    require(vectors.rows() >= 1 && vectors.rows() == vectors.cols(), "basis needs dim orthonormal columns");
    require(all_finite(vectors), "basis has non-finite entries");
    const auto dim = static_cast<std::size_t>(vectors.cols());
    if (outcomes.empty()) {
      outcomes.resize(dim);
      for (std::size_t k = 0; k < dim; ++k) outcomes[k] = static_cast<double>(k);
    }
    require(outcomes.size() == dim, "one outcome per basis vector required");
    const ComplexMatrix gram = vectors.adjoint() * vectors;
    const double residual = (gram - ComplexMatrix::Identity(vectors.cols(), vectors.cols())).cwiseAbs().maxCoeff();
    require(residual < tol::constructed, "basis vectors are not orthonormal (residual " + std::to_string(residual) + ")");
    ComplexMatrix fixed = vectors;
    for (Eigen::Index j = 0; j < fixed.cols(); ++j) fix_phase(fixed.col(j));
    return MeasurementBasis(std::move(fixed), std::move(outcomes));
  }

  // Validates Pi_k Pi_l = delta_kl Pi_l, sum Pi_k = I and rank one.
  static MeasurementBasis from_projectors(std::span<const ComplexMatrix> projectors, std::vector<double> outcomes = {}) {
    require(!projectors.empty(), "empty projector list");
    const Eigen::Index dim = projectors.front().rows();
    require(static_cast<std::size_t>(dim) == projectors.size(), "rank-1 basis needs exactly dim projectors");
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix vectors(dim, dim);
    for (std::size_t k = 0; k < projectors.size(); ++k) {
      const ComplexMatrix& p = projectors[k];
      require(p.rows() == dim && p.cols() == dim, "projector dimension mismatch");
      require(hermiticity_defect(p) < tol::constructed, "projector " + std::to_string(k) + " is not Hermitian");
      require(std::abs(p.trace() - Complex(1.0, 0.0)) < tol::constructed, "projector " + std::to_string(k) + " has trace != 1");
      for (std::size_t l = 0; l < projectors.size(); ++l) {
        const ComplexMatrix expected = k == l ? p : ComplexMatrix::Zero(dim, dim);
        require((p * projectors[l] - expected).cwiseAbs().maxCoeff() < tol::constructed,
                "projectors " + std::to_string(k) + "," + std::to_string(l) + " violate Pi_k Pi_l = delta_kl Pi_l");
      }
      sum += p;
      Eigen::Index col = 0;
      p.colwise().norm().maxCoeff(&col);
      vectors.col(static_cast<Eigen::Index>(k)) = p.col(col).normalized();
    }
    require((sum - ComplexMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < tol::constructed,
            "projectors do not sum to identity");
    return from_vectors(vectors, std::move(outcomes));
  }

  std::size_t size() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.rows()); }
  const ComplexMatrix& vectors() const { return vectors_; }
  ComplexVector vector(std::size_t k) const { return vectors_.col(static_cast<Eigen::Index>(k)); }
  ComplexMatrix projector(std::size_t k) const {
    const ComplexVector v = vector(k);
    return v * v.adjoint();
  }
  const std::vector<double>& outcomes() const { return outcomes_; }

  // Observable O = sum_k o_k Pi_k.
  ComplexMatrix observable() const {
    ComplexMatrix o = ComplexMatrix::Zero(vectors_.rows(), vectors_.rows());
    for (std::size_t k = 0; k < size(); ++k) o += outcomes_[k] * projector(k);
    return o;
  }

 private:
  MeasurementBasis(ComplexMatrix vectors, std::vector<double> outcomes)
      : vectors_(std::move(vectors)), outcomes_(std::move(outcomes)) {}

  ComplexMatrix vectors_;
  std::vector<double> outcomes_;
};

inline MeasurementBasis energy_basis(const HermitianOperator& h) {
  std::vector<double> energies(h.eigenvalues().data(), h.eigenvalues().data() + h.eigenvalues().size());
  return MeasurementBasis::from_vectors(h.eigenvectors(), std::move(energies));
}

class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    require(matrix_.rows() >= 1 && matrix_.rows() == matrix_.cols(), "density matrix must be square");
    require(all_finite(matrix_), "density matrix has non-finite entries");
    require(hermiticity_defect(matrix_) < tol::constructed, "density matrix is not Hermitian");
    require(std::abs(matrix_.trace() - Complex(1.0, 0.0)) < tol::constructed, "density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
    require(solver.eigenvalues().minCoeff() >= -tol::constructed, "density matrix is not positive semidefinite");
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// exp(-beta H) / Z.
inline DensityMatrix thermal_state(const HermitianOperator& h, double beta) {
  require(beta >= 0.0 && std::isfinite(beta), "beta must be finite and >= 0");
  // Shift by the ground energy so large beta*E does not overflow.
  const double e0 = h.eigenvalues().minCoeff();
  ComplexMatrix w = h.spectral_function([beta, e0](double e) { return Complex(std::exp(-beta * (e - e0)), 0.0); });
  w /= w.trace().real();
  return DensityMatrix(0.5 * (w + w.adjoint()));
}

/// sum_n populations[n] |E_n><E_n|.
inline DensityMatrix diagonal_state(const HermitianOperator& h, std::span<const double> populations) {
  require(populations.size() == h.dim(), "one population per energy level required");
  ComplexVector d(static_cast<Eigen::Index>(h.dim()));
  for (std::size_t n = 0; n < h.dim(); ++n) {
    require(populations[n] >= 0.0, "populations must be non-negative");
    d(static_cast<Eigen::Index>(n)) = populations[n];
  }
  const ComplexMatrix m = h.eigenvectors() * d.asDiagonal() * h.eigenvectors().adjoint();
  return DensityMatrix(0.5 * (m + m.adjoint()));
}

struct OutcomeSequence {
  std::vector<std::size_t> ks;
  std::vector<double> taus;

  std::size_t length() const { return ks.size(); }
  double total_time() const {
    double t = 0.0;
    for (double tau : taus) t += tau;
    return t;
  }
};

inline void validate(const OutcomeSequence& seq, const MeasurementBasis& basis) {
  require(seq.ks.size() == seq.taus.size(), "outcome and waiting-time sequences differ in length");
  for (std::size_t i = 0; i < seq.ks.size(); ++i) {
    require(seq.ks[i] < basis.size(), "outcome index out of range");
    require(seq.taus[i] >= 0.0 && std::isfinite(seq.taus[i]), "waiting times must be finite and >= 0");
  }
}

/// V(k, tau) = Pi_{k_M} U(tau_M) ... Pi_{k_1} U(tau_1); the rightmost factor acts first.
inline ComplexMatrix sequence_superop(const MeasurementBasis& basis, const HermitianOperator& h, const OutcomeSequence& seq) {
  validate(seq, basis);
  require(basis.dim() == h.dim(), "basis and Hamiltonian dimensions differ");
  const auto d = static_cast<Eigen::Index>(h.dim());
  ComplexMatrix v = ComplexMatrix::Identity(d, d);
  for (std::size_t i = 0; i < seq.length(); ++i) v = basis.projector(seq.ks[i]) * (propagator(h, seq.taus[i]) * v);
  return v;
}

/// p_{m|n}(k, tau) = Tr[Pi_m V Pi_n V^dagger Pi_m] = |<E_m|V|E_n>|^2.
inline double conditioned_transition_prob(const MeasurementBasis& basis, const HermitianOperator& h,
                                          const OutcomeSequence& seq, std::size_t n, std::size_t m) {
  require(n < h.dim() && m < h.dim(), "energy index out of range");
  const ComplexMatrix v = sequence_superop(basis, h, seq);
  const Complex amplitude = h.eigenvector(m).dot(v * h.eigenvector(n));
  return std::clamp(std::norm(amplitude), 0.0, 1.0);
}

/// p_n = <E_n|rho0|E_n>.
inline std::vector<double> first_measurement_probs(const DensityMatrix& rho0, const HermitianOperator& h) {
  require(rho0.dim() == h.dim(), "state and Hamiltonian dimensions differ");
  std::vector<double> p(h.dim());
  for (std::size_t n = 0; n < h.dim(); ++n) {
    const ComplexVector e = h.eigenvector(n);
    p[n] = std::max(0.0, e.dot(rho0.matrix() * e).real());
  }
  return p;
}

}  // namespace qheat
