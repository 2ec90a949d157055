#pragma once

// Reproduction costs used as the augmentation selection criterion.

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tpaug {

enum class CostKind { Rms, Dtw };

std::string_view to_string(CostKind kind);
CostKind cost_kind_from_string(std::string_view text);

/// Identifies the DTW variant: symmetric step pattern {(1,0),(0,1),(1,1)}
/// with weights 1/1/2, g(1,1) = 2 d(1,1), normalized by T_y + T_x.
inline constexpr std::string_view kDtwVariant = "symmetric2/norm=n+m";

struct CostReport {
  std::vector<double> per_demo;
  double mean = 0.0;
  CostKind kind = CostKind::Rms;
};

/// Per pair: sqrt((1/T) sum_t ||y(t) - x(t)||^2). Shapes must match.
CostReport rms_cost(std::span<const Eigen::MatrixXd> repros, std::span<const Eigen::MatrixXd> demos);

/// Normalized DTW distance between two trajectories (rows = samples),
/// Euclidean point distance, no warping window.
double dtw_distance(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x);

CostReport dtw_cost(std::span<const Eigen::MatrixXd> repros, std::span<const Eigen::MatrixXd> demos);

CostReport cost(CostKind kind, std::span<const Eigen::MatrixXd> repros,
                std::span<const Eigen::MatrixXd> demos);

}  // namespace tpaug
