#include "omwu/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace omwu {
namespace {

void require_dims(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y) {
  if (x.size() != game.rows() || y.size() != game.cols()) {
    throw std::invalid_argument(fmt::format(
        "dimension mismatch: game is {}x{}, strategies have sizes {} and {}",
        game.rows(), game.cols(), x.size(), y.size()));
  }
}

}  // namespace

MatrixGame::MatrixGame(Eigen::MatrixXd payoffs) : A_(std::move(payoffs)) {
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw std::invalid_argument("payoff matrix must have at least one row and column");
  }
  if (!A_.allFinite()) {
    throw std::invalid_argument("payoff matrix has non-finite entries");
  }
  max_abs_ = A_.cwiseAbs().maxCoeff();
}

MatrixGame MatrixGame::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("payoff matrix must have at least one row and column");
  }
  const auto m = rows.front().size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) {
      throw std::invalid_argument(
          fmt::format("payoff matrix is not rectangular: row {} has {} entries, expected {}",
                      i, rows[i].size(), m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return MatrixGame(std::move(A));
}

SimplexPoint::SimplexPoint(Eigen::VectorXd p) : p_(std::move(p)) {
  if (p_.size() < 1) throw std::invalid_argument("simplex point must be nonempty");
  if (!p_.allFinite()) throw std::invalid_argument("simplex point has non-finite entries");
  if (p_.minCoeff() < 0.0) throw std::invalid_argument("simplex point has a negative entry");
  const double s = p_.sum();
  if (std::abs(s - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument(fmt::format("simplex point sums to {:.17g}", s));
  }
}

SimplexPoint SimplexPoint::uniform(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("simplex dimension must be positive");
  return SimplexPoint(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

SimplexPoint SimplexPoint::vertex(Eigen::Index n, Eigen::Index i) {
  if (i < 0 || i >= n) throw std::invalid_argument("vertex index out of range");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p[i] = 1.0;
  return SimplexPoint(std::move(p));
}

SimplexPoint SimplexPoint::normalized(Eigen::VectorXd p, double neg_tol) {
  if (p.size() < 1 || !p.allFinite()) {
    throw std::invalid_argument("cannot normalize an empty or non-finite vector");
  }
  if (p.minCoeff() < -neg_tol) {
    throw std::invalid_argument(
        fmt::format("entry {:.3e} is below the clamp tolerance", p.minCoeff()));
  }
  p = p.cwiseMax(0.0);
  const double s = p.sum();
  if (!(s > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  p /= s;
  return SimplexPoint(std::move(p));
}

std::vector<Eigen::Index> SimplexPoint::support() const {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (p_[i] > kSupportTolerance) s.push_back(i);
  }
  return s;
}

double payoff(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y) {
  require_dims(game, x, y);
  return x.values().dot(game.payoffs() * y.values());
}

double epsilon_gap(const Eigen::VectorXd& Ay, const Eigen::VectorXd& Atx, double value) {
  // Best unilateral deviations in a bilinear game are pure strategies.
  const double max_gain = Ay.maxCoeff() - value;
  const double min_gain = value - Atx.minCoeff();
  return std::max({max_gain, min_gain, 0.0});
}

double alpha_closeness(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& Ay, const Eigen::VectorXd& Atx,
                       double value) {
  double alpha = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    alpha = std::max(alpha, std::min(x[i], std::abs(value - Ay[i])));
  }
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    alpha = std::max(alpha, std::min(y[j], std::abs(value - Atx[j])));
  }
  return alpha;
}

double epsilon_gap(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y) {
  return quality(game, x, y).epsilon;
}

double alpha_closeness(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y) {
  return quality(game, x, y).alpha;
}

QualityReport quality(const MatrixGame& game, const SimplexPoint& x, const SimplexPoint& y) {
  require_dims(game, x, y);
  const Eigen::VectorXd Ay = game.payoffs() * y.values();
  const Eigen::VectorXd Atx = game.payoffs().transpose() * x.values();
  QualityReport r;
  r.value = x.values().dot(Ay);
  r.epsilon = epsilon_gap(Ay, Atx, r.value);
  r.alpha = alpha_closeness(x.values(), y.values(), Ay, Atx, r.value);
  return r;
}

MatrixGame parse_game_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("game file is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("A") || !doc["A"].is_array()) {
    throw std::invalid_argument("game file must be an object with an array field \"A\"");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : doc["A"]) {
    if (!row.is_array()) throw std::invalid_argument("each row of \"A\" must be an array");
    std::vector<double>& out = rows.emplace_back();
    for (const auto& entry : row) {
      if (!entry.is_number()) {
        throw std::invalid_argument("payoff entries must be numbers");
      }
      out.push_back(entry.get<double>());
    }
  }
  return MatrixGame::from_rows(rows);
}

MatrixGame load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open game file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_game_json(buf.str());
}

std::string game_to_json(const MatrixGame& game) {
  std::string out = "{\"A\": [";
  for (Eigen::Index i = 0; i < game.rows(); ++i) {
    out += i == 0 ? "[" : ", [";
    for (Eigen::Index j = 0; j < game.cols(); ++j) {
      if (j > 0) out += ", ";
      out += fmt::format("{:.17g}", game(i, j));
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

}  // namespace omwu
