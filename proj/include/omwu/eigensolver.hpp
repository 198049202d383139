#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace omwu {

class EigenSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Eigen::Index kMaxEigenDimension = 2000;

/// Full spectrum of a real square matrix: balancing, Householder reduction
/// to upper Hessenberg form, then Francis double-shift QR. Eigenvalues come
/// back sorted by decreasing modulus (ties by real, then imaginary part).
/// Throws EigenSolverError if an eigenvalue fails to converge within
/// `max_sweeps` QR sweeps.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M, int max_sweeps = 60);

struct EigenPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  // unit 2-norm
  double residual = 0.0;    // |M v - value v|_2
};

/// Eigenvalues as above plus eigenvectors by inverse iteration on M.
std::vector<EigenPair> eigenpairs(const Eigen::MatrixXd& M, int max_sweeps = 60);

double spectral_radius(std::span<const std::complex<double>> values);

namespace detail {

/// Diagonal similarity D^-1 M D with powers of two. Returns the scaling.
Eigen::VectorXd balance(Eigen::MatrixXd& a);
/// In-place orthogonal similarity to upper Hessenberg form.
void reduce_to_hessenberg(Eigen::MatrixXd& a);

}  // namespace detail

}  // namespace omwu
