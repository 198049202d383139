#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "omwu/dynamics.hpp"
#include "omwu/game.hpp"
#include "omwu/oracle.hpp"

namespace omwu {

/// Jacobian of the quadruple map g(x, y, z, w) = (x', y', x, y). Rows and
/// columns are block-ordered x (n), y (m), z (n), w (m).
struct JacobianMatrix {
  Eigen::MatrixXd M;
  Eigen::Index n = 0;
  Eigen::Index m = 0;

  Eigen::Index x_offset() const { return 0; }
  Eigen::Index y_offset() const { return n; }
  Eigen::Index z_offset() const { return n + m; }
  Eigen::Index w_offset() const { return 2 * n + m; }
};

/// Flattens a state into (x^t, y^t, x^{t-1}, y^{t-1}).
Eigen::VectorXd pack(const DynamicsState& state);
DynamicsState unpack(const Eigen::VectorXd& q, Eigen::Index n, Eigen::Index m);

/// Direct evaluation of g on an arbitrary positive quadruple (no log-space
/// shift, no simplex check). Used for finite differences and as a second
/// code path against omwu_step.
Eigen::VectorXd g_map(const Eigen::VectorXd& q, const MatrixGame& game, double eta);

/// Jacobian of g at any point; the finite-difference oracle needs an interior
/// point but the formulas are defined everywhere.
JacobianMatrix jacobian_general(const Eigen::VectorXd& q, const MatrixGame& game, double eta);
JacobianMatrix jacobian_general(const DynamicsState& state, const MatrixGame& game, double eta);

/// Closed-form Jacobian at (x*, y*, x*, y*). Throws std::invalid_argument
/// unless eq.unique.
JacobianMatrix jacobian_at_equilibrium(const Equilibrium& eq, const MatrixGame& game,
                                       double eta);

struct ReducedBlocks {
  Eigen::MatrixXd B;   // A restricted to support_x x support_y
  Eigen::VectorXd Dx;  // diagonal of D_x
  Eigen::VectorXd Dy;
  Eigen::Index k1 = 0;
  Eigen::Index k2 = 0;
  double value = 0.0;
  Eigen::MatrixXd J;        // 2k x 2k, support block of the equilibrium Jacobian
  Eigen::MatrixXd J_new;    // 2k x 2k, J with the v and D 1 1^T terms dropped
  Eigen::MatrixXd J_small;  // k x k, [[0, eta D_x B], [-eta D_y B^T, 0]]
};

/// Drops the off-support x/y coordinates, then the z/w selector rows that
/// became zero together with their columns.
ReducedBlocks reduce(const Equilibrium& eq, const MatrixGame& game, double eta);

/// Spectrum of rb.J. The two zero eigenvalues carried by the left null
/// vectors (1, 0, 0, 0) and (0, 1, 0, 0) are split off exactly by an
/// orthogonal similarity; left in place they sit in 2x2 Jordan blocks and
/// any backward-stable solver scatters them to about sqrt(eps) |J|.
std::vector<std::complex<double>> reduced_spectrum(const ReducedBlocks& rb);

/// Both roots of lambda (lambda - 1) / (2 lambda - 1) = i sigma, namely
/// (1 + 2 i sigma +- sqrt(1 - 4 sigma^2)) / 2, "+" root first.
std::pair<std::complex<double>, std::complex<double>> lambda_from_sigma(double sigma);

/// Same map for a complex argument mu in place of i sigma.
std::pair<std::complex<double>, std::complex<double>> lambda_from_mu(std::complex<double> mu);

/// Greedy nearest-neighbour matching: each entry of `values` claims the
/// closest unclaimed entry of `targets` within `radius`. Returns the number
/// of values left unmatched.
std::size_t unmatched_count(const std::vector<std::complex<double>>& values,
                            const std::vector<std::complex<double>>& targets, double radius);

struct ContractionCertificate {
  std::vector<std::complex<double>> eigenvalues;  // full equilibrium Jacobian
  double spectral_radius = 0.0;
  std::vector<double> off_support_multipliers;
  std::vector<double> sigma_values;  // Im of the J_small spectrum

  // Structure checks on the reduced blocks.
  std::vector<std::complex<double>> reduced_eigenvalues;  // reduced_spectrum(J)
  double skew_residual = 0.0;       // max |S + S^T| for S = J_small diag(D_x, D_y)
  double max_real_part = 0.0;       // max |Re| over the J_small spectrum
  double imaginary_tolerance = 0.0;  // 1e-10 |J_small|_F
  std::size_t unpaired = 0;         // nonzero J eigenvalues with no lambda(sigma) partner
  double min_distance_to_one = 0.0;  // over the J spectrum

  bool contraction = false;  // rho and multiplier thresholds
  bool structure_ok = false;
  bool certified = false;
};

inline constexpr double kRadiusMargin = 1e-10;
inline constexpr double kMultiplierMargin = 1e-12;
inline constexpr double kNonzeroEigenvalue = 1e-9;
inline constexpr double kPairingRadius = 1e-7;
inline constexpr double kUnitExclusion = 1e-8;

/// Spectrum of the equilibrium Jacobian plus the structural cross-checks
/// linking J, J_new and J_small. Throws std::invalid_argument for a
/// non-unique equilibrium and EigenSolverError if QR fails.
ContractionCertificate certify_contraction(const Equilibrium& eq, const MatrixGame& game,
                                           double eta);

std::string certificate_to_json(const ContractionCertificate& cert, int indent = 2);

}  // namespace omwu
