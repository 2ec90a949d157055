#include "tpaug/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "tpaug/errors.hpp"

namespace tpaug {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
// Responsibilities below this are zeroed so the M-step never touches
// subnormal numbers.
constexpr double kNegligibleResponsibility = 1e-250;

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive-definite");
  return llt;
}

double half_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd floored_cov(const Eigen::MatrixXd& scatter, double floor) {
  Eigen::MatrixXd cov = 0.5 * (scatter + scatter.transpose());
  cov.diagonal().array() += floor;
  return cov;
}

}  // namespace

Gmm init_from_labels(const Eigen::MatrixXd& data, const std::vector<int>& labels, int k,
                    int input_dim, double cov_floor) {
  const double floor = cov_floor;
  const auto t = data.rows();
  const auto d = data.cols();
  const Eigen::RowVectorXd global_mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - global_mean;
  const Eigen::MatrixXd global_cov = centered.transpose() * centered / static_cast<double>(t);

  Gmm g;
  g.input_dim = input_dim;
  g.weights = Eigen::VectorXd::Zero(k);
  g.components.resize(k);
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < t; ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    if (idx.empty()) {
      g.weights[c] = 1.0;
      g.components[c] = {global_mean.transpose(), floored_cov(global_cov, floor)};
      continue;
    }
    Eigen::MatrixXd sub(idx.size(), d);
    for (std::size_t j = 0; j < idx.size(); ++j) sub.row(j) = data.row(idx[j]);
    const Eigen::RowVectorXd mu = sub.colwise().mean();
    const Eigen::MatrixXd cen = sub.rowwise() - mu;
    g.weights[c] = static_cast<double>(idx.size());
    g.components[c] = {mu.transpose(),
                       floored_cov(cen.transpose() * cen / static_cast<double>(idx.size()), floor)};
  }
  g.weights /= g.weights.sum();
  return g;
}

namespace {

std::vector<int> kmeans_labels(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
  const auto t = x.rows();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(k, x.cols());

  // k-means++ seeding
  std::uniform_int_distribution<Eigen::Index> first(0, t - 1);
  centers.row(0) = x.row(first(rng));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < t - 1; ++pick) {
        r -= d2[pick];
        if (r < 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(t, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < t; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[i] != static_cast<int>(best)) {
        labels[i] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < t; ++i) {
      sums.row(labels[i]) += x.row(i);
      counts[labels[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) centers.row(c) = sums.row(c) / counts[c];
    }
  }
  return labels;
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double log_density(const GaussianComponent& comp, const Eigen::VectorXd& x) {
  if (x.size() != comp.dim()) throw DimensionError("sample dimension does not match component");
  const auto llt = checked_llt(comp.cov);
  const Eigen::VectorXd z = llt.matrixL().solve(x - comp.mean);
  return -0.5 * (comp.dim() * kLog2Pi + z.squaredNorm()) - half_log_det(llt);
}

Eigen::VectorXd log_density_rows(const GaussianComponent& comp, const Eigen::MatrixXd& samples) {
  if (samples.cols() != comp.dim()) throw DimensionError("sample dimension does not match component");
  const auto llt = checked_llt(comp.cov);
  const double c = -0.5 * comp.dim() * kLog2Pi - half_log_det(llt);
  // z = L^-1 (x - mu) one coordinate at a time, vectorized across samples.
  const Eigen::MatrixXd l_inv = llt.matrixL().solve(Eigen::MatrixXd::Identity(comp.dim(), comp.dim()));
  const Eigen::MatrixXd centered = samples.rowwise() - comp.mean.transpose();
  Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(samples.rows());
  Eigen::ArrayXd z(samples.rows());
  for (Eigen::Index i = 0; i < comp.dim(); ++i) {
    z = l_inv(i, 0) * centered.col(0).array();
    for (Eigen::Index j = 1; j <= i; ++j) z += l_inv(i, j) * centered.col(j).array();
    sq += z.square();
  }
  return (c - 0.5 * sq).matrix();
}

void Gmm::validate() const {
  if (components.empty()) throw ArgumentError("mixture has no components");
  if (weights.size() != size()) throw DimensionError("weight count does not match component count");
  const int d = dim();
  for (const auto& c : components) {
    if (c.dim() != d || c.cov.rows() != d || c.cov.cols() != d) {
      throw DimensionError("mixture components have inconsistent dimensions");
    }
  }
  if (input_dim <= 0 || input_dim >= d) throw ArgumentError("input_dim must satisfy 0 < input_dim < D");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ArgumentError("mixture weights must form a simplex");
  }
}

void EmConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(log_lik_tol > 0.0)) throw ArgumentError("log_lik_tol must be > 0");
  if (!(cov_floor > 0.0)) throw ArgumentError("cov_floor must be > 0");
}

std::vector<int> initial_labels(const Eigen::MatrixXd& features, int k, const EmConfig& cfg) {
  const auto t = features.rows();
  if (k < 1 || t < k) throw ArgumentError("need at least K samples to initialize K components");
  if (cfg.init == InitMethod::KMeans) return kmeans_labels(features, k, cfg.seed);

  std::vector<Eigen::Index> order(t);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return features(a, 0) < features(b, 0); });
  std::vector<int> labels(t);
  for (Eigen::Index r = 0; r < t; ++r) labels[order[r]] = static_cast<int>(r * k / t);
  return labels;
}

double mean_log_likelihood(const Gmm& gmm, const Eigen::MatrixXd& data) {
  Eigen::MatrixXd lp(data.rows(), gmm.size());
  for (int c = 0; c < gmm.size(); ++c) {
    lp.col(c) = log_density_rows(gmm.components[c], data).array() + std::log(gmm.weights[c]);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) total += log_sum_exp(lp.row(i).transpose());
  return total / static_cast<double>(data.rows());
}

Eigen::VectorXd column_scales(const Eigen::MatrixXd& data) {
  Eigen::VectorXd scale(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const auto col = data.col(j).array();
    const double sd = std::sqrt((col - col.mean()).square().mean());
    // Spread at rounding level counts as none.
    scale[j] = sd > 1e-12 * (1.0 + col.abs().maxCoeff()) ? sd : 1.0;
  }
  return scale;
}

GaussianComponent unnormalize(const GaussianComponent& comp, const Eigen::VectorXd& scale) {
  Eigen::MatrixXd cov = scale.asDiagonal() * comp.cov * scale.asDiagonal();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {comp.mean.cwiseProduct(scale), std::move(cov)};
}

Gmm em_fit(const Eigen::MatrixXd& raw, int k, int input_dim, const EmConfig& cfg, EmTrace* trace) {
  cfg.validate();
  const auto t = raw.rows();
  const auto d = raw.cols();
  if (k < 1) throw ArgumentError("K must be >= 1");
  if (t < k) {
    throw ArgumentError("em_fit needs T >= K (T=" + std::to_string(t) + ", K=" + std::to_string(k) + ")");
  }
  if (d < 2) throw DimensionError("em_fit needs D >= 2");
  if (!raw.allFinite()) throw NumericError("training data contains non-finite values");

  const Eigen::VectorXd scale = column_scales(raw);
  const Eigen::MatrixXd data = raw.array().rowwise() / scale.transpose().array();
  // Per-sample log-likelihood offset between normalized and caller units.
  const double log_jacobian = scale.array().log().sum();
  Gmm g = init_from_labels(data, initial_labels(data, k, cfg), k, input_dim, cfg.cov_floor);
  Eigen::MatrixXd resp(t, k);

  // E-step: fills `resp` and returns the mean log-likelihood.
  auto expect = [&]() {
    for (int c = 0; c < k; ++c) {
      resp.col(c) = log_density_rows(g.components[c], data).array() + std::log(g.weights[c]);
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
      const double lse = log_sum_exp(resp.row(i).transpose());
      resp.row(i) = (resp.row(i).array() - lse).max(-700.0).exp();
      total += lse;
    }
    resp = (resp.array() < kNegligibleResponsibility).select(0.0, resp);
    return total / static_cast<double>(t);
  };

  EmTrace local;
  double ll = expect();
  local.log_likelihood.push_back(ll - log_jacobian);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int c = 0; c < k; ++c) {
      const double nk = resp.col(c).sum();
      if (!(nk > 0.0)) {
        g.weights[c] = 0.0;
        continue;
      }
      const Eigen::VectorXd mu = data.transpose() * resp.col(c) / nk;
      const Eigen::MatrixXd cen = data.rowwise() - mu.transpose();
      const Eigen::MatrixXd weighted = cen.array().colwise() * resp.col(c).array();
      const Eigen::MatrixXd scatter = cen.transpose().lazyProduct(weighted) / nk;
      g.weights[c] = nk / static_cast<double>(t);
      g.components[c] = {mu, floored_cov(scatter, cfg.cov_floor)};
    }
    g.weights /= g.weights.sum();
    const double next = expect();
    local.log_likelihood.push_back(next - log_jacobian);
    const bool done = std::abs(next - ll) < cfg.log_lik_tol;
    ll = next;
    if (done) {
      local.converged = true;
      break;
    }
  }
  for (auto& c : g.components) c = unnormalize(c, scale);
  if (trace) *trace = std::move(local);
  return g;
}

GmrResult gmr(const Gmm& gmm, const Eigen::VectorXd& input) {
  return GmrConditioner(gmm).condition(input);
}

}  // namespace tpaug

namespace tpaug {

GmrConditioner::GmrConditioner(const Gmm& gmm)
    : input_dim_(gmm.input_dim), output_dim_(gmm.output_dim()) {
  gmm.validate();
  const int di = input_dim_;
  const int dout = output_dim_;
  terms_.reserve(gmm.size());
  for (int c = 0; c < gmm.size(); ++c) {
    const auto& comp = gmm.components[c];
    const Eigen::MatrixXd s_ii = comp.cov.topLeftCorner(di, di);
    const Eigen::MatrixXd s_oi = comp.cov.bottomLeftCorner(dout, di);
    Eigen::LLT<Eigen::MatrixXd> llt(s_ii);
    if (llt.info() != Eigen::Success) throw NumericError("input covariance block is not positive-definite");
    Term term;
    term.log_weight = std::log(gmm.weights[c]);
    term.log_norm = -0.5 * di * 1.8378770664093454835606594728112 -
                    llt.matrixLLT().diagonal().array().log().sum();
    term.mean_in = comp.mean.head(di);
    term.mean_out = comp.mean.tail(dout);
    term.chol_in = llt.matrixL();
    term.gain = llt.solve(s_oi.transpose()).transpose();
    term.cond_cov = comp.cov.bottomRightCorner(dout, dout) - term.gain * s_oi.transpose();
    term.cond_cov = 0.5 * (term.cond_cov + term.cond_cov.transpose()).eval();
    terms_.push_back(std::move(term));
  }
}

GmrResult GmrConditioner::condition(const Eigen::VectorXd& input) const {
  if (input.size() != input_dim_) throw DimensionError("GMR input dimension mismatch");
  const auto k = static_cast<Eigen::Index>(terms_.size());
  Eigen::VectorXd logits(k);
  Eigen::VectorXd mahal(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& term = terms_[c];
    const Eigen::VectorXd z =
        term.chol_in.triangularView<Eigen::Lower>().solve(input - term.mean_in);
    mahal[c] = z.stableNorm();
    logits[c] = term.log_weight + term.log_norm - 0.5 * mahal[c] * mahal[c];
  }

  GmrResult out;
  const double lse = log_sum_exp(logits);
  if (std::isfinite(lse)) {
    out.responsibilities = (logits.array() - lse).exp();
    out.responsibilities /= out.responsibilities.sum();
  } else {
    Eigen::Index nearest = 0;
    mahal.minCoeff(&nearest);
    out.responsibilities = Eigen::VectorXd::Zero(k);
    out.responsibilities[nearest] = 1.0;
    out.fallback = true;
  }

  out.mean = Eigen::VectorXd::Zero(output_dim_);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(output_dim_, output_dim_);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double h = out.responsibilities[c];
    if (h == 0.0) continue;
    const auto& term = terms_[c];
    const Eigen::VectorXd m = term.mean_out + term.gain * (input - term.mean_in);
    out.mean += h * m;
    second += h * (term.cond_cov + m * m.transpose());
  }
  out.cov = second - out.mean * out.mean.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace tpaug
