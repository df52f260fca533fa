#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "atorsion/discretization.hpp"
#include "atorsion/errors.hpp"

namespace atorsion {

/// Implicit-shift QL on a symmetric tridiagonal matrix (diagonal d, coupling
/// e(i) between i and i+1; e has the size of d, last entry ignored). On exit
/// d holds the eigenvalues, unsorted. If z is non-null its columns are
/// rotated along, so passing the tridiagonalizing Q yields eigenvectors.
template <typename Scalar>
void tridiagonal_ql(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& e,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* z, int max_sweeps = 30,
                    Scalar tol = Scalar(1e-14)) {
  using std::abs;
  using std::hypot;
  const Eigen::Index n = d.size();
  if (n == 0) return;
  e(n - 1) = 0;
  for (Eigen::Index l = 0; l < n; ++l) {
    int iter = 0;
    Eigen::Index m;
    do {
      for (m = l; m < n - 1; ++m) {
        const Scalar dd = abs(d(m)) + abs(d(m + 1));
        if (abs(e(m)) <= tol * dd) break;
      }
      if (m != l) {
        if (iter++ == max_sweeps)
          throw ConvergenceError("implicit QL did not converge for eigenvalue index " + std::to_string(l), l);
        Scalar g = (d(l + 1) - d(l)) / (2 * e(l));
        Scalar r = hypot(g, Scalar(1));
        g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
        Scalar s = 1, c = 1, p = 0;
        Eigen::Index i;
        bool deflated = false;
        for (i = m - 1; i >= l; --i) {
          Scalar f = s * e(i);
          const Scalar b = c * e(i);
          r = hypot(f, g);
          e(i + 1) = r;
          if (r == 0) {
            d(i + 1) -= p;
            e(m) = 0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d(i + 1) - p;
          r = (d(i) - g) * s + 2 * c * b;
          p = s * r;
          d(i + 1) = g + p;
          g = c * r - b;
          if (z) {
            auto zi = z->col(i);
            auto zj = z->col(i + 1);
            for (Eigen::Index k = 0; k < z->rows(); ++k) {
              f = zj(k);
              zj(k) = s * zi(k) + c * f;
              zi(k) = c * zi(k) - s * f;
            }
          }
        }
        if (deflated) continue;
        d(l) -= p;
        e(l) = g;
        e(m) = 0;
      }
    } while (m != l);
  }
}

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns; empty in values-only mode
  int kernel_dim = 0;
  std::string metric_id;
  int basis_L = -1;

  bool has_vectors() const { return eigenvectors.size() > 0; }
  Eigen::Index size() const { return eigenvalues.size(); }
  /// Eigenvalues with the kernel removed.
  Eigen::VectorXd nonzero() const { return eigenvalues.tail(eigenvalues.size() - kernel_dim); }
  double lambda1() const;
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
};

struct EigOptions {
  bool vectors = true;
  int max_sweeps = 30;
  double tolerance = 1e-14;
};

/// Number of leading eigenvalues with |lambda_k| <= 1e-8 lambda_{k+1}.
int kernel_dimension(const Eigen::Ref<const Eigen::VectorXd>& ascending);

/// Full spectrum of K v = lambda M v. Throws IndefiniteMassError if the
/// Cholesky factorization of M fails and ConvergenceError from QL.
Spectrum generalized_eigs(const Eigen::Ref<const Eigen::MatrixXd>& K, const Eigen::Ref<const Eigen::MatrixXd>& M,
                          const EigOptions& options = {});
Spectrum generalized_eigs(const OperatorPair& pair, const EigOptions& options = {});

/// max_k ||K v_k - lambda_k M v_k|| / (||K|| + |lambda_k| ||M||), 2-norms.
double max_relative_residual(const OperatorPair& pair, const Spectrum& spectrum);
/// max |V^T M V - I|.
double m_orthonormality_error(const Eigen::Ref<const Eigen::MatrixXd>& M, const Spectrum& spectrum);

/// Spectral function V diag(f(lambda)) V^T M acting on coefficient vectors.
template <typename F>
Eigen::MatrixXd spectral_function(const OperatorPair& pair, const Spectrum& spectrum, F&& f) {
  if (!spectrum.has_vectors()) throw SpectrumError("spectral function needs eigenvectors");
  Eigen::VectorXd fl(spectrum.size());
  for (Eigen::Index k = 0; k < spectrum.size(); ++k)
    fl(k) = f(k < spectrum.kernel_dim ? 0.0 : spectrum.eigenvalues(k));
  return spectrum.eigenvectors * (fl.asDiagonal() * (spectrum.eigenvectors.transpose() * pair.M));
}

/// (I + M^{-1} K)^{-1} in basis coordinates.
Eigen::MatrixXd resolvent(const OperatorPair& pair, const Spectrum& spectrum);
Eigen::MatrixXd resolvent(const OperatorPair& pair);

/// Operator norm induced by the inner product with Gram matrix M.
double m_operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& M, const Eigen::Ref<const Eigen::MatrixXd>& A);

}  // namespace atorsion
