#include "omwu/lp.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace omwu::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(Eigen::MatrixXd T, std::vector<Eigen::Index> basis, const Options& opt)
      : T_(std::move(T)), basis_(std::move(basis)), opt_(opt) {}

  Eigen::Index rows() const { return T_.rows(); }
  Eigen::Index rhs_col() const { return T_.cols() - 1; }
  double rhs(Eigen::Index i) const { return T_(i, rhs_col()); }
  double at(Eigen::Index i, Eigen::Index j) const { return T_(i, j); }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double objective() const { return z_[rhs_col()]; }
  int iterations() const { return iterations_; }

  void pivot(Eigen::Index r, Eigen::Index col) {
    T_.row(r) /= T_(r, col);
    for (Eigen::Index i = 0; i < T_.rows(); ++i) {
      if (i == r) continue;
      const double f = T_(i, col);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    const double fz = z_[col];
    if (fz != 0.0) z_ -= fz * T_.row(r).transpose();
    basis_[static_cast<std::size_t>(r)] = col;
    ++iterations_;
  }

  /// Runs primal simplex for max cost^T x over columns [0, allowed_cols).
  Status optimize(const Eigen::VectorXd& cost, Eigen::Index allowed_cols) {
    price(cost);
    int degenerate_run = 0;
    bool bland = false;
    for (;;) {
      if (iterations_ >= opt_.max_iterations) return Status::kIterationLimit;

      Eigen::Index enter = -1;
      double best = -opt_.cost_tolerance;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (z_[j] < best) {
          enter = j;
          if (bland) break;
          best = z_[j];
        }
      }
      if (enter < 0) return Status::kOptimal;

      Eigen::Index leave = -1;
      double best_ratio = 0.0;
      for (Eigen::Index i = 0; i < T_.rows(); ++i) {
        const double a = T_(i, enter);
        if (a <= opt_.pivot_tolerance) continue;
        const double ratio = T_(i, rhs_col()) / a;
        if (leave < 0 || ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return Status::kUnbounded;

      if (best_ratio <= opt_.pivot_tolerance) {
        if (++degenerate_run > opt_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(leave, enter);
    }
  }

 private:
  void price(const Eigen::VectorXd& cost) {
    z_ = -cost;
    z_.conservativeResize(T_.cols());
    z_[rhs_col()] = 0.0;
    for (Eigen::Index i = 0; i < T_.rows(); ++i) {
      const double cb = cost[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) z_ += cb * T_.row(i).transpose();
    }
  }

  Eigen::MatrixXd T_;
  Eigen::VectorXd z_;
  std::vector<Eigen::Index> basis_;
  Options opt_;
  int iterations_ = 0;
};

}  // namespace

Solution maximize(const Problem& p, const Options& opt) {
  const Eigen::Index nv = p.c.size();
  const Eigen::Index mu = p.A_ub.rows();
  const Eigen::Index me = p.A_eq.rows();
  if ((mu > 0 && p.A_ub.cols() != nv) || p.b_ub.size() != mu ||
      (me > 0 && p.A_eq.cols() != nv) || p.b_eq.size() != me) {
    throw std::invalid_argument("lp: inconsistent problem dimensions");
  }
  const Eigen::Index nrow = mu + me;
  const Eigen::Index nstd = nv + mu;

  // Standard form with nonnegative right-hand side.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nrow, nstd);
  Eigen::VectorXd rhs(nrow);
  std::vector<bool> needs_artificial(static_cast<std::size_t>(nrow), false);
  for (Eigen::Index i = 0; i < mu; ++i) {
    const double sign = p.b_ub[i] < 0.0 ? -1.0 : 1.0;
    S.row(i).head(nv) = sign * p.A_ub.row(i);
    S(i, nv + i) = sign;
    rhs[i] = sign * p.b_ub[i];
    needs_artificial[static_cast<std::size_t>(i)] = sign < 0.0;
  }
  for (Eigen::Index e = 0; e < me; ++e) {
    const double sign = p.b_eq[e] < 0.0 ? -1.0 : 1.0;
    S.row(mu + e).head(nv) = sign * p.A_eq.row(e);
    rhs[mu + e] = sign * p.b_eq[e];
    needs_artificial[static_cast<std::size_t>(mu + e)] = true;
  }

  Eigen::Index na = 0;
  for (bool b : needs_artificial) na += b ? 1 : 0;
  const Eigen::Index ncol = nstd + na;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nrow, ncol + 1);
  T.leftCols(nstd) = S;
  T.col(ncol) = rhs;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(nrow));
  Eigen::Index next_art = nstd;
  for (Eigen::Index i = 0; i < nrow; ++i) {
    if (needs_artificial[static_cast<std::size_t>(i)]) {
      T(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art++;
    } else {
      basis[static_cast<std::size_t>(i)] = nv + i;
    }
  }

  Tableau tab(std::move(T), std::move(basis), opt);
  Solution sol;

  if (na > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncol);
    phase1.tail(na).setConstant(-1.0);
    const Status s1 = tab.optimize(phase1, ncol);
    if (s1 == Status::kIterationLimit) {
      sol.status = s1;
      sol.iterations = tab.iterations();
      return sol;
    }
    const double scale = std::max(1.0, rhs.size() > 0 ? rhs.cwiseAbs().maxCoeff() : 1.0);
    if (tab.objective() < -1e-9 * scale) {
      sol.status = Status::kInfeasible;
      sol.iterations = tab.iterations();
      return sol;
    }
    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant and stay inert.
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < nstd) continue;
      for (Eigen::Index j = 0; j < nstd; ++j) {
        if (std::abs(tab.at(i, j)) > opt.pivot_tolerance) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ncol);
  phase2.head(nv) = p.c;
  sol.status = tab.optimize(phase2, nstd);
  sol.iterations = tab.iterations();
  if (sol.status != Status::kOptimal) return sol;

  // Recompute the basic solution from the original data.
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < tab.rows(); ++i) {
    const Eigen::Index b = tab.basis()[static_cast<std::size_t>(i)];
    if (b < nstd) {
      rows.push_back(i);
      cols.push_back(b);
    }
  }
  Eigen::VectorXd xstd = Eigen::VectorXd::Zero(nstd);
  for (Eigen::Index i = 0; i < tab.rows(); ++i) {
    const Eigen::Index b = tab.basis()[static_cast<std::size_t>(i)];
    if (b < nstd) xstd[b] = tab.rhs(i);
  }
  if (!rows.empty()) {
    const auto k = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd B(k, k);
    Eigen::VectorXd rb(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      rb[r] = rhs[rows[static_cast<std::size_t>(r)]];
      for (Eigen::Index c = 0; c < k; ++c) {
        B(r, c) = S(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.isInvertible()) {
      const Eigen::VectorXd xb = lu.solve(rb);
      if ((B * xb - rb).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, rb.cwiseAbs().maxCoeff())) {
        for (Eigen::Index c = 0; c < k; ++c) xstd[cols[static_cast<std::size_t>(c)]] = xb[c];
      }
    }
  }

  sol.x = xstd.head(nv);
  sol.objective = p.c.dot(sol.x);
  sol.basis.assign(tab.basis().begin(), tab.basis().end());
  return sol;
}

}  // namespace omwu::lp
