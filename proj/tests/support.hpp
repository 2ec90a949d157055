#pragma once

// Random fixtures and independent reference implementations shared by the
// unit tests and the acceptance binary. The oracles deliberately avoid the
// library's own algorithms: explicit inverses instead of Cholesky solves,
// path enumeration instead of dynamic programming.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tpaug/frames.hpp"
#include "tpaug/gmm.hpp"
#include "tpaug/tpgmm.hpp"

namespace tpaug::test {

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

// Proper rotation from the QR factor of a Gaussian matrix, sign-fixed.
inline Eigen::MatrixXd random_rotation(Rng& rng, int p) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, p, p));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd d = qr.matrixQR().diagonal();
  for (int j = 0; j < p; ++j) {
    if (d[j] < 0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0) q.col(0) *= -1.0;
  // One Gram-Schmidt pass keeps orthonormality well inside 1e-9.
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q;
}

inline Frame random_frame(Rng& rng, int p, double trans_scale = 2.0) {
  return Frame(random_rotation(rng, p), random_matrix(rng, p, 1, trans_scale).col(0));
}

inline Situation random_situation(Rng& rng, int p, int n_frames) {
  std::vector<Frame> frames;
  for (int n = 0; n < n_frames; ++n) frames.push_back(random_frame(rng, p));
  return Situation(std::move(frames));
}

// Well-conditioned SPD matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(Rng& rng, int d, double lo = 0.05, double hi = 2.0) {
  const Eigen::MatrixXd q = random_rotation(rng, d < 2 ? 2 : d).topLeftCorner(d, d);
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = uniform(rng, lo, hi);
  if (d == 1) return Eigen::MatrixXd::Constant(1, 1, ev[0]);
  Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

inline Eigen::VectorXd random_simplex(Rng& rng, int k) {
  Eigen::VectorXd w(k);
  for (int i = 0; i < k; ++i) w[i] = uniform(rng, 0.1, 1.0);
  return w / w.sum();
}

inline TpGmm random_tpgmm(Rng& rng, Mode mode, int p, int n_frames, int k) {
  TpGmm m;
  m.mode = mode;
  m.input_dim = mode == Mode::TimeBased ? 1 : p;
  const int d = mode == Mode::TimeBased ? p + 1 : 2 * p;
  m.weights = random_simplex(rng, k);
  m.per_frame.resize(n_frames);
  for (auto& comps : m.per_frame) {
    for (int c = 0; c < k; ++c) comps.push_back({random_matrix(rng, d, 1).col(0), random_spd(rng, d)});
  }
  return m;
}

// Â Σ Âᵀ and Â μ + b̂ written out with explicit block matrices.
inline Eigen::MatrixXd naive_block_matrix(Mode mode, const Frame& f) {
  const int p = f.dim();
  const int d = mode == Mode::TimeBased ? p + 1 : 2 * p;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  if (mode == Mode::TimeBased) {
    a(0, 0) = 1.0;
    a.bottomRightCorner(p, p) = f.rotation();
  } else {
    a.topLeftCorner(p, p) = f.rotation();
    a.bottomRightCorner(p, p) = f.rotation();
  }
  return a;
}

inline Eigen::VectorXd naive_block_offset(Mode mode, const Frame& f) {
  const int p = f.dim();
  const int d = mode == Mode::TimeBased ? p + 1 : 2 * p;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  if (mode == Mode::TimeBased) {
    b.tail(p) = f.translation();
  } else {
    b.head(p) = f.translation();
  }
  return b;
}

// Product of Gaussians by accumulating precisions and precision-weighted
// means with explicit inverses.
inline Gmm naive_fusion(const TpGmm& model, const Situation& sit) {
  Gmm out;
  out.weights = model.weights;
  out.input_dim = model.input_dim;
  const int d = model.dim();
  for (int c = 0; c < model.components(); ++c) {
    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd info = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < model.frames(); ++n) {
      const Eigen::MatrixXd a = naive_block_matrix(model.mode, sit[n]);
      const Eigen::VectorXd b = naive_block_offset(model.mode, sit[n]);
      const auto& g = model.per_frame[n][c];
      const Eigen::VectorXd mu = a * g.mean + b;
      const Eigen::MatrixXd lambda = (a * g.cov * a.transpose()).inverse();
      precision += lambda;
      info += lambda * mu;
    }
    const Eigen::MatrixXd cov = precision.inverse();
    out.components.push_back({cov * info, cov});
  }
  return out;
}

// Exhaustive minimum over every monotone, boundary-complete warping path
// with steps (1,0), (0,1) weight 1 and (1,1) weight 2; the first cell
// counts twice; the total is divided by n + m. Branches whose partial cost
// already reaches the best complete path are cut, which never discards a
// strictly better path because every step adds a non-negative amount.
//
// With a finite `ceiling` on the unnormalized path cost, only paths strictly
// below it are considered; infinity is returned when none exists.
inline double brute_force_dtw(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                              double ceiling = std::numeric_limits<double>::infinity()) {
  const auto n = y.rows();
  const auto m = x.rows();
  Eigen::MatrixXd dist(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) dist(i, j) = (y.row(i) - x.row(j)).norm();
  }
  double best = ceiling;
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j,
                                                                     double acc) {
    if (acc >= best) return;
    if (i == n - 1 && j == m - 1) {
      best = acc;
      return;
    }
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc + 2.0 * dist(i + 1, j + 1));
    if (i + 1 < n) walk(i + 1, j, acc + dist(i + 1, j));
    if (j + 1 < m) walk(i, j + 1, acc + dist(i, j + 1));
  };
  walk(0, 0, 2.0 * dist(0, 0));
  if (best == ceiling && std::isfinite(ceiling)) return std::numeric_limits<double>::infinity();
  return best / static_cast<double>(n + m);
}

// Conditional of a single joint Gaussian, via explicit inverse.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> conditional_gaussian(const GaussianComponent& g,
                                                                        int input_dim,
                                                                        const Eigen::VectorXd& x) {
  const int d = g.dim();
  const int o = d - input_dim;
  const Eigen::MatrixXd sii = g.cov.topLeftCorner(input_dim, input_dim);
  const Eigen::MatrixXd soi = g.cov.bottomLeftCorner(o, input_dim);
  const Eigen::MatrixXd soo = g.cov.bottomRightCorner(o, o);
  const Eigen::MatrixXd gain = soi * sii.inverse();
  return {g.mean.tail(o) + gain * (x - g.mean.head(input_dim)), soo - gain * soi.transpose()};
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace tpaug::test
