#include "omwu/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace omwu {
namespace detail {

Eigen::VectorXd balance(Eigen::MatrixXd& a) {
  constexpr double kRadix = 2.0;
  constexpr double kRadixSq = kRadix * kRadix;
  const Eigen::Index n = a.rows();
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kRadixSq;
      }
      g = r * kRadix;
      while (c > g) {
        f /= kRadix;
        c /= kRadixSq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        scale[i] *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return scale;
}

void reduce_to_hessenberg(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index len = n - k - 1;
    Eigen::VectorXd v = a.col(k).tail(len);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    const double alpha = v[0] > 0.0 ? -norm : norm;
    v[0] -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H = I - 2 v v^T applied from both sides.
    auto rows = a.bottomRows(len);
    const Eigen::RowVectorXd vt_rows = v.transpose() * rows;
    rows.noalias() -= 2.0 * v * vt_rows;
    auto cols = a.rightCols(len);
    const Eigen::VectorXd cols_v = cols * v;
    cols.noalias() -= 2.0 * cols_v * v.transpose();
    a(k + 1, k) = alpha;
    a.col(k).tail(len - 1).setZero();
  }
}

namespace {

// Francis double-shift QR on an upper Hessenberg matrix, destroying it.
std::vector<std::complex<double>> hessenberg_qr(Eigen::MatrixXd& a, int max_sweeps) {
  const Eigen::Index n = a.rows();
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  auto sign = [](double mag, double s) { return s >= 0.0 ? std::abs(mag) : -std::abs(mag); };

  double anorm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }
  // Normwise floor: dropping a subdiagonal entry below eps |H|_F is a
  // backward-stable perturbation, and it stops the iteration from crawling
  // through tiny (nearly nilpotent) trailing blocks.
  const double floor = kEps * a.norm();

  Eigen::Index nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    Eigen::Index l = 0;
    do {
      for (l = nn; l > 0; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= kEps * s || std::abs(a(l, l - 1)) <= floor) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        w[static_cast<std::size_t>(nn)] = {x + t, 0.0};
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double ww = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + ww;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            w[static_cast<std::size_t>(nn - 1)] = w[static_cast<std::size_t>(nn)] = {x + z, 0.0};
            if (z != 0.0) w[static_cast<std::size_t>(nn)] = {x - ww / z, 0.0};
          } else {
            w[static_cast<std::size_t>(nn)] = {x + p, -z};
            w[static_cast<std::size_t>(nn - 1)] = {x + p, z};
          }
          nn -= 2;
        } else {
          if (its >= max_sweeps) {
            throw EigenSolverError(fmt::format(
                "QR iteration did not converge for eigenvalue {} of a {}x{} matrix after {} sweeps",
                nn, n, n, its));
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (Eigen::Index i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          Eigen::Index m = nn - 2;
          double p = 0.0;
          double q = 0.0;
          double r = 0.0;
          double z = 0.0;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= kEps * v) break;
          }
          for (Eigen::Index i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (Eigen::Index k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (Eigen::Index j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k + 1 != nn) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const Eigen::Index mmin = nn < k + 3 ? nn : k + 3;
            for (Eigen::Index i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k + 1 != nn) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return w;
}

}  // namespace
}  // namespace detail

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M, int max_sweeps) {
  if (M.rows() != M.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  if (M.rows() > kMaxEigenDimension) {
    throw std::invalid_argument(
        fmt::format("eigenvalues: size {} exceeds {}", M.rows(), kMaxEigenDimension));
  }
  if (!M.allFinite()) throw std::invalid_argument("eigenvalues: matrix has non-finite entries");
  if (M.rows() == 0) return {};

  Eigen::MatrixXd a = M;
  detail::balance(a);
  detail::reduce_to_hessenberg(a);
  auto w = detail::hessenberg_qr(a, max_sweeps);
  std::sort(w.begin(), w.end(), [](const auto& p, const auto& q) {
    const double ap = std::abs(p);
    const double aq = std::abs(q);
    if (ap != aq) return ap > aq;
    if (p.real() != q.real()) return p.real() > q.real();
    return p.imag() > q.imag();
  });
  return w;
}

std::vector<EigenPair> eigenpairs(const Eigen::MatrixXd& M, int max_sweeps) {
  const auto values = eigenvalues(M, max_sweeps);
  const Eigen::Index n = M.rows();
  const Eigen::MatrixXcd Mc = M.cast<std::complex<double>>();
  const double mnorm = std::max(M.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);

  std::vector<EigenPair> pairs;
  pairs.reserve(values.size());
  for (const auto& lambda : values) {
    // Shift slightly off the eigenvalue so the factorization stays regular.
    const std::complex<double> shifted = lambda + std::complex<double>(1e-10, 1e-10) * mnorm;
    Eigen::MatrixXcd K = Mc;
    K.diagonal().array() -= shifted;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = {1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3)};
    }
    v.normalize();
    for (int it = 0; it < 3; ++it) {
      v = lu.solve(v);
      const double nv = v.norm();
      if (!(nv > 0.0) || !std::isfinite(nv)) break;
      v /= nv;
    }
    EigenPair ep;
    ep.value = lambda;
    ep.vector = v;
    ep.residual = (Mc * v - lambda * v).norm();
    pairs.push_back(std::move(ep));
  }
  return pairs;
}

double spectral_radius(std::span<const std::complex<double>> values) {
  double rho = 0.0;
  for (const auto& v : values) rho = std::max(rho, std::abs(v));
  return rho;
}

}  // namespace omwu
