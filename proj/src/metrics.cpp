#include "tpaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tpaug/errors.hpp"

namespace tpaug {
namespace {

void check_pairs(std::span<const Eigen::MatrixXd> repros, std::span<const Eigen::MatrixXd> demos) {
  if (repros.size() != demos.size()) {
    throw ArgumentError("cost needs as many reproductions as demonstrations");
  }
  if (repros.empty()) throw ArgumentError("cost needs at least one pair");
}

CostReport finish(std::vector<double> per_demo, CostKind kind) {
  CostReport r;
  r.kind = kind;
  double sum = 0.0;
  for (double v : per_demo) sum += v;
  r.mean = sum / static_cast<double>(per_demo.size());
  r.per_demo = std::move(per_demo);
  return r;
}

}  // namespace

std::string_view to_string(CostKind kind) { return kind == CostKind::Rms ? "rms" : "dtw"; }

CostKind cost_kind_from_string(std::string_view text) {
  if (text == "rms") return CostKind::Rms;
  if (text == "dtw") return CostKind::Dtw;
  throw ArgumentError("unknown cost '" + std::string(text) + "' (expected rms|dtw)");
}

CostReport rms_cost(std::span<const Eigen::MatrixXd> repros, std::span<const Eigen::MatrixXd> demos) {
  check_pairs(repros, demos);
  std::vector<double> per;
  per.reserve(demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& y = repros[i];
    const auto& x = demos[i];
    if (y.rows() != x.rows() || y.cols() != x.cols() || x.rows() == 0) {
      throw ArgumentError("rms_cost pair " + std::to_string(i) + " has mismatched shapes");
    }
    per.push_back(std::sqrt((y - x).rowwise().squaredNorm().mean()));
  }
  return finish(std::move(per), CostKind::Rms);
}

double dtw_distance(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x) {
  const auto n = y.rows();
  const auto m = x.rows();
  if (n < 1 || m < 1) throw ArgumentError("dtw_distance needs non-empty trajectories");
  if (y.cols() != x.cols()) throw DimensionError("dtw_distance trajectories differ in dimension");

  // Rolling rows of the accumulated cost g(i, j).
  std::vector<double> prev(m), cur(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = (y.row(i) - x.row(j)).norm();
      if (i == 0 && j == 0) {
        cur[j] = 2.0 * d;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      if (i > 0) best = std::min(best, prev[j] + d);
      if (j > 0) best = std::min(best, cur[j - 1] + d);
      if (i > 0 && j > 0) best = std::min(best, prev[j - 1] + 2.0 * d);
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1] / static_cast<double>(n + m);
}

CostReport dtw_cost(std::span<const Eigen::MatrixXd> repros, std::span<const Eigen::MatrixXd> demos) {
  check_pairs(repros, demos);
  std::vector<double> per;
  per.reserve(demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) per.push_back(dtw_distance(repros[i], demos[i]));
  return finish(std::move(per), CostKind::Dtw);
}

CostReport cost(CostKind kind, std::span<const Eigen::MatrixXd> repros,
                std::span<const Eigen::MatrixXd> demos) {
  return kind == CostKind::Rms ? rms_cost(repros, demos) : dtw_cost(repros, demos);
}

}  // namespace tpaug
