#include "omwu/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "omwu/eigensolver.hpp"

namespace omwu {

namespace {

void check_quadruple(const Eigen::VectorXd& q, const MatrixGame& game) {
  const Eigen::Index expected = 2 * (game.rows() + game.cols());
  if (q.size() != expected) {
    throw std::invalid_argument(
        fmt::format("quadruple has {} coordinates, game needs {}", q.size(), expected));
  }
}

Eigen::VectorXd restrict(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
  return out;
}

}  // namespace

std::vector<std::complex<double>> reduced_spectrum(const ReducedBlocks& rb) {
  const Eigen::Index k1 = rb.k1;
  const Eigen::Index k = rb.k1 + rb.k2;
  // (1, 0, 0, 0) and (0, 1, 0, 0) span a left null space of J, so J maps into
  // their orthogonal complement W. With Q = [W, U] orthogonal, Q^T J Q is
  // block upper triangular with a zero 2x2 corner.
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(2 * k, 2);
  U.block(0, 0, k1, 1).setOnes();
  U.block(k1, 1, rb.k2, 1).setOnes();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd W = Q.rightCols(2 * k - 2);
  auto spec = eigenvalues(W.transpose() * rb.J * W);
  spec.emplace_back(0.0, 0.0);
  spec.emplace_back(0.0, 0.0);
  return spec;
}

Eigen::VectorXd pack(const DynamicsState& state) {
  const Eigen::Index n = state.x_cur.size();
  const Eigen::Index m = state.y_cur.size();
  Eigen::VectorXd q(2 * (n + m));
  q << state.x_cur.values(), state.y_cur.values(), state.x_prev.values(), state.y_prev.values();
  return q;
}

DynamicsState unpack(const Eigen::VectorXd& q, Eigen::Index n, Eigen::Index m) {
  return DynamicsState{SimplexPoint(q.segment(0, n)), SimplexPoint(q.segment(n, m)),
                       SimplexPoint(q.segment(n + m, n)), SimplexPoint(q.segment(2 * n + m, m))};
}

Eigen::VectorXd g_map(const Eigen::VectorXd& q, const MatrixGame& game, double eta) {
  check_quadruple(q, game);
  const Eigen::Index n = game.rows();
  const Eigen::Index m = game.cols();
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::VectorXd x = q.segment(0, n);
  const Eigen::VectorXd y = q.segment(n, m);
  const Eigen::VectorXd z = q.segment(n + m, n);
  const Eigen::VectorXd w = q.segment(2 * n + m, m);

  const Eigen::VectorXd ux = x.array() * (2.0 * eta * (A * y) - eta * (A * w)).array().exp();
  const Eigen::VectorXd uy =
      y.array() * (-2.0 * eta * (A.transpose() * x) + eta * (A.transpose() * z)).array().exp();

  Eigen::VectorXd out(q.size());
  out << ux / ux.sum(), uy / uy.sum(), x, y;
  return out;
}

JacobianMatrix jacobian_general(const Eigen::VectorXd& q, const MatrixGame& game, double eta) {
  check_quadruple(q, game);
  const Eigen::Index n = game.rows();
  const Eigen::Index m = game.cols();
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::VectorXd x = q.segment(0, n);
  const Eigen::VectorXd y = q.segment(n, m);
  const Eigen::VectorXd z = q.segment(n + m, n);
  const Eigen::VectorXd w = q.segment(2 * n + m, m);

  // e_i / S with a common shift; the ratio is shift invariant.
  Eigen::VectorXd ax = 2.0 * eta * (A * y) - eta * (A * w);
  Eigen::VectorXd ay = -2.0 * eta * (A.transpose() * x) + eta * (A.transpose() * z);
  const Eigen::VectorXd ex = (ax.array() - ax.maxCoeff()).exp();
  const Eigen::VectorXd ey = (ay.array() - ay.maxCoeff()).exp();
  const Eigen::VectorXd rx = ex / x.dot(ex);
  const Eigen::VectorXd ry = ey / y.dot(ey);
  const Eigen::VectorXd px = x.cwiseProduct(rx);  // g_1
  const Eigen::VectorXd py = y.cwiseProduct(ry);  // g_2

  JacobianMatrix J;
  J.n = n;
  J.m = m;
  J.M = Eigen::MatrixXd::Zero(2 * (n + m), 2 * (n + m));

  // dg1/dx = diag(e/S) - g1 (e/S)^T
  J.M.block(0, 0, n, n) = rx.asDiagonal();
  J.M.block(0, 0, n, n) -= px * rx.transpose();
  // dg1_i/dy_j = 2 eta g1_i (A_ij - (A^T g1)_j), dg1/dw = -1/2 of that
  const Eigen::RowVectorXd col_avg = px.transpose() * A;
  const Eigen::MatrixXd Gx = px.asDiagonal() * (A.rowwise() - col_avg);
  J.M.block(0, n, n, m) = 2.0 * eta * Gx;
  J.M.block(0, 2 * n + m, n, m) = -eta * Gx;

  J.M.block(n, n, m, m) = ry.asDiagonal();
  J.M.block(n, n, m, m) -= py * ry.transpose();
  // dg2_i/dx_j = -2 eta g2_i (A_ji - (A g2)_j), dg2/dz = -1/2 of that
  const Eigen::RowVectorXd row_avg = (A * py).transpose();
  const Eigen::MatrixXd Gy = py.asDiagonal() * (A.transpose().rowwise() - row_avg);
  J.M.block(n, 0, m, n) = -2.0 * eta * Gy;
  J.M.block(n, n + m, m, n) = eta * Gy;

  J.M.block(n + m, 0, n, n).setIdentity();
  J.M.block(2 * n + m, n, m, m).setIdentity();
  return J;
}

JacobianMatrix jacobian_general(const DynamicsState& state, const MatrixGame& game, double eta) {
  return jacobian_general(pack(state), game, eta);
}

JacobianMatrix jacobian_at_equilibrium(const Equilibrium& eq, const MatrixGame& game,
                                       double eta) {
  if (!eq.unique) {
    throw std::invalid_argument("jacobian_at_equilibrium: equilibrium is not unique");
  }
  const Eigen::Index n = game.rows();
  const Eigen::Index m = game.cols();
  if (eq.x_star.size() != n || eq.y_star.size() != m) {
    throw std::invalid_argument("jacobian_at_equilibrium: equilibrium does not match the game");
  }
  const Eigen::MatrixXd& A = game.payoffs();
  const Eigen::VectorXd& xs = eq.x_star.values();
  const Eigen::VectorXd& ys = eq.y_star.values();
  const double v = eq.value;
  std::vector<bool> in_x(static_cast<std::size_t>(n), false);
  std::vector<bool> in_y(static_cast<std::size_t>(m), false);
  for (auto i : eq.support_x) in_x[static_cast<std::size_t>(i)] = true;
  for (auto j : eq.support_y) in_y[static_cast<std::size_t>(j)] = true;

  // Payoff gaps: zero on the supports, strictly signed off them.
  const Eigen::VectorXd Ay = A * ys;
  const Eigen::VectorXd Atx = A.transpose() * xs;
  Eigen::VectorXd mult_x(n);
  Eigen::VectorXd mult_y(m);
  Eigen::VectorXd col_payoff(m);  // (A^T x*)_j, exactly v on the support
  Eigen::VectorXd row_payoff(n);  // (A y*)_i, exactly v on the support
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool s = in_x[static_cast<std::size_t>(i)];
    mult_x[i] = s ? 1.0 : std::exp(eta * (Ay[i] - v));
    row_payoff[i] = s ? v : Ay[i];
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const bool s = in_y[static_cast<std::size_t>(j)];
    mult_y[j] = s ? 1.0 : std::exp(-eta * (Atx[j] - v));
    col_payoff[j] = s ? v : Atx[j];
  }

  JacobianMatrix J;
  J.n = n;
  J.m = m;
  J.M = Eigen::MatrixXd::Zero(2 * (n + m), 2 * (n + m));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!in_x[static_cast<std::size_t>(i)]) {
      J.M(i, i) = mult_x[i];
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      J.M(i, j) = (i == j ? 1.0 : 0.0) - xs[i] * mult_x[j];
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      J.M(i, n + j) = xs[i] * (2.0 * eta * A(i, j) - 2.0 * eta * col_payoff[j]);
      J.M(i, 2 * n + m + j) = xs[i] * (-eta * A(i, j) + eta * col_payoff[j]);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index r = n + i;
    if (!in_y[static_cast<std::size_t>(i)]) {
      J.M(r, r) = mult_y[i];
      continue;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      J.M(r, n + j) = (i == j ? 1.0 : 0.0) - ys[i] * mult_y[j];
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      J.M(r, j) = ys[i] * (-2.0 * eta * A(j, i) + 2.0 * eta * row_payoff[j]);
      J.M(r, n + m + j) = ys[i] * (eta * A(j, i) - eta * row_payoff[j]);
    }
  }
  J.M.block(n + m, 0, n, n).setIdentity();
  J.M.block(2 * n + m, n, m, m).setIdentity();
  return J;
}

ReducedBlocks reduce(const Equilibrium& eq, const MatrixGame& game, double eta) {
  const JacobianMatrix full = jacobian_at_equilibrium(eq, game, eta);
  const Eigen::Index k1 = static_cast<Eigen::Index>(eq.support_x.size());
  const Eigen::Index k2 = static_cast<Eigen::Index>(eq.support_y.size());
  const Eigen::Index k = k1 + k2;

  // Surviving coordinates in (x, y, z, w) order.
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(2 * k));
  for (auto i : eq.support_x) keep.push_back(full.x_offset() + i);
  for (auto j : eq.support_y) keep.push_back(full.y_offset() + j);
  for (auto i : eq.support_x) keep.push_back(full.z_offset() + i);
  for (auto j : eq.support_y) keep.push_back(full.w_offset() + j);

  ReducedBlocks rb;
  rb.k1 = k1;
  rb.k2 = k2;
  rb.value = eq.value;
  rb.Dx = restrict(eq.x_star.values(), eq.support_x);
  rb.Dy = restrict(eq.y_star.values(), eq.support_y);
  rb.B.resize(k1, k2);
  for (Eigen::Index a = 0; a < k1; ++a) {
    for (Eigen::Index b = 0; b < k2; ++b) {
      rb.B(a, b) = game(eq.support_x[static_cast<std::size_t>(a)],
                        eq.support_y[static_cast<std::size_t>(b)]);
    }
  }

  rb.J.resize(2 * k, 2 * k);
  for (Eigen::Index r = 0; r < 2 * k; ++r) {
    for (Eigen::Index c = 0; c < 2 * k; ++c) {
      rb.J(r, c) = full.M(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
    }
  }

  const Eigen::MatrixXd DxB = rb.Dx.asDiagonal() * rb.B;
  const Eigen::MatrixXd DyBt = rb.Dy.asDiagonal() * rb.B.transpose();
  rb.J_new = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  rb.J_new.block(0, 0, k1, k1).setIdentity();
  rb.J_new.block(0, k1, k1, k2) = 2.0 * eta * DxB;
  rb.J_new.block(0, k + k1, k1, k2) = -eta * DxB;
  rb.J_new.block(k1, 0, k2, k1) = -2.0 * eta * DyBt;
  rb.J_new.block(k1, k1, k2, k2).setIdentity();
  rb.J_new.block(k1, k, k2, k1) = eta * DyBt;
  rb.J_new.block(k, 0, k, k).setIdentity();

  rb.J_small = Eigen::MatrixXd::Zero(k, k);
  rb.J_small.block(0, k1, k1, k2) = eta * DxB;
  rb.J_small.block(k1, 0, k2, k1) = -eta * DyBt;
  return rb;
}

std::pair<std::complex<double>, std::complex<double>> lambda_from_mu(std::complex<double> mu) {
  // lambda^2 - lambda = mu (2 lambda - 1)  =>  lambda^2 - (1 + 2 mu) lambda + mu = 0
  const std::complex<double> b = 1.0 + 2.0 * mu;
  const std::complex<double> root = std::sqrt(1.0 + 4.0 * mu * mu);
  return {(b + root) / 2.0, (b - root) / 2.0};
}

std::pair<std::complex<double>, std::complex<double>> lambda_from_sigma(double sigma) {
  return lambda_from_mu({0.0, sigma});
}

std::size_t unmatched_count(const std::vector<std::complex<double>>& values,
                            const std::vector<std::complex<double>>& targets, double radius) {
  std::vector<bool> used(targets.size(), false);
  std::size_t missing = 0;
  for (const auto& v : values) {
    std::size_t best = targets.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (used[t]) continue;
      const double d = std::abs(v - targets[t]);
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    if (best < targets.size() && best_d <= radius) {
      used[best] = true;
    } else {
      ++missing;
    }
  }
  return missing;
}

ContractionCertificate certify_contraction(const Equilibrium& eq, const MatrixGame& game,
                                           double eta) {
  if (!eq.unique) throw std::invalid_argument("certify_contraction: equilibrium is not unique");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument(fmt::format("certify_contraction: eta must be positive, got {}", eta));
  }
  ContractionCertificate cert;

  const JacobianMatrix full = jacobian_at_equilibrium(eq, game, eta);
  cert.eigenvalues = eigenvalues(full.M);
  cert.spectral_radius = spectral_radius(cert.eigenvalues);

  const Eigen::VectorXd Ay = game.payoffs() * eq.y_star.values();
  const Eigen::VectorXd Atx = game.payoffs().transpose() * eq.x_star.values();
  for (Eigen::Index i = 0; i < game.rows(); ++i) {
    if (!std::binary_search(eq.support_x.begin(), eq.support_x.end(), i)) {
      cert.off_support_multipliers.push_back(std::exp(eta * (Ay[i] - eq.value)));
    }
  }
  for (Eigen::Index j = 0; j < game.cols(); ++j) {
    if (!std::binary_search(eq.support_y.begin(), eq.support_y.end(), j)) {
      cert.off_support_multipliers.push_back(std::exp(-eta * (Atx[j] - eq.value)));
    }
  }

  const ReducedBlocks rb = reduce(eq, game, eta);
  Eigen::VectorXd d(rb.k1 + rb.k2);
  d << rb.Dx, rb.Dy;
  const Eigen::MatrixXd S = rb.J_small * d.asDiagonal();
  cert.skew_residual = (S + S.transpose()).cwiseAbs().maxCoeff();

  const auto small_spec = eigenvalues(rb.J_small);
  cert.imaginary_tolerance = 1e-10 * rb.J_small.norm();
  for (const auto& mu : small_spec) {
    cert.max_real_part = std::max(cert.max_real_part, std::abs(mu.real()));
    cert.sigma_values.push_back(mu.imag());
  }

  cert.reduced_eigenvalues = reduced_spectrum(rb);
  std::vector<std::complex<double>> nonzero;
  cert.min_distance_to_one = std::numeric_limits<double>::infinity();
  for (const auto& lam : cert.reduced_eigenvalues) {
    cert.min_distance_to_one = std::min(cert.min_distance_to_one, std::abs(lam - 1.0));
    if (std::abs(lam) > kNonzeroEigenvalue) nonzero.push_back(lam);
  }
  // Each sigma yields two candidate eigenvalues of J.
  std::vector<std::complex<double>> images;
  for (double sigma : cert.sigma_values) {
    const auto [plus, minus] = lambda_from_sigma(sigma);
    images.push_back(plus);
    images.push_back(minus);
  }
  cert.unpaired = unmatched_count(nonzero, images, kPairingRadius);

  bool multipliers_ok = true;
  for (double mu : cert.off_support_multipliers) {
    if (!(mu < 1.0 - kMultiplierMargin)) multipliers_ok = false;
  }
  cert.contraction = cert.spectral_radius < 1.0 - kRadiusMargin && multipliers_ok;
  cert.structure_ok = cert.max_real_part <= cert.imaginary_tolerance && cert.unpaired == 0 &&
                      cert.min_distance_to_one >= kUnitExclusion;
  cert.certified = cert.contraction && cert.structure_ok;
  return cert;
}

std::string certificate_to_json(const ContractionCertificate& cert, int indent) {
  nlohmann::json j;
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& e : cert.eigenvalues) eig.push_back({e.real(), e.imag()});
  j["eigenvalues"] = eig;
  j["spectral_radius"] = cert.spectral_radius;
  j["off_support_multipliers"] = cert.off_support_multipliers;
  j["sigma_values"] = cert.sigma_values;
  j["certified"] = cert.certified;
  j["checks"] = {
      {"contraction", cert.contraction},
      {"structure_ok", cert.structure_ok},
      {"skew_residual", cert.skew_residual},
      {"max_real_part", cert.max_real_part},
      {"unpaired_eigenvalues", cert.unpaired},
      {"min_distance_to_one", cert.min_distance_to_one},
  };
  return j.dump(indent);
}

}  // namespace omwu
