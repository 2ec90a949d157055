#pragma once

// Plain Gaussian mixture machinery: log-density, EM fitting with a
// covariance floor, and Gaussian Mixture Regression.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace tpaug {

struct GaussianComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
  bool operator==(const GaussianComponent& o) const {
    return mean.size() == o.mean.size() && mean == o.mean && cov == o.cov;
  }
};

/// Multivariate normal log-pdf via Cholesky. Throws NumericError when the
/// covariance is not positive-definite.
double log_density(const GaussianComponent& comp, const Eigen::VectorXd& x);

/// Log-pdf of every row of `samples` (T x D).
Eigen::VectorXd log_density_rows(const GaussianComponent& comp, const Eigen::MatrixXd& samples);

/// Mixture over a joint [input; output] space. The first `input_dim`
/// coordinates are the regression input.
struct Gmm {
  Eigen::VectorXd weights;
  std::vector<GaussianComponent> components;
  int input_dim = 1;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }
  int output_dim() const { return dim() - input_dim; }
  /// Throws ArgumentError / DimensionError on violated invariants.
  void validate() const;
};

enum class InitMethod { TimeBinning, KMeans };

struct EmConfig {
  int max_iters = 200;
  double log_lik_tol = 1e-6;  // on the mean per-sample log-likelihood
  double cov_floor = 1e-6;  // in normalized data units, see em_fit
  InitMethod init = InitMethod::TimeBinning;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-iteration mean log-likelihood; entry 0 is the initialization.
struct EmTrace {
  std::vector<double> log_likelihood;
  bool converged = false;
};

/// Hard cluster labels used to seed EM.
///
/// TimeBinning sorts samples by `features.col(0)` (stable) and cuts K
/// contiguous bins of near-equal size. KMeans runs k-means++ seeded by
/// `cfg.seed` followed by Lloyd iterations on the rows of `features`.
std::vector<int> initial_labels(const Eigen::MatrixXd& features, int k, const EmConfig& cfg);

/// Mixture whose component k is the (floored) sample mean/covariance of the
/// rows labelled k; weights are label frequencies. Empty labels fall back to
/// the global statistics with unit count.
Gmm init_from_labels(const Eigen::MatrixXd& data, const std::vector<int>& labels, int k,
                     int input_dim, double cov_floor);

/// Per-column scales that put data into normalized units: the population
/// standard deviation, or 1 for a column with no spread.
Eigen::VectorXd column_scales(const Eigen::MatrixXd& data);

/// Maps a component fitted to data divided column-wise by `scale` back to
/// the original units.
GaussianComponent unnormalize(const GaussianComponent& comp, const Eigen::VectorXd& scale);

/// Fits a K-component mixture to the rows of `data` (T x D).
///
/// EM runs on the data divided column-wise by column_scales(data), and every
/// covariance receives cov_floor * I after each M-step in those units. The
/// returned mixture and the trace are in the caller's units, so for K=1 the
/// covariance is the sample covariance plus cov_floor * diag(scale^2).
Gmm em_fit(const Eigen::MatrixXd& data, int k, int input_dim, const EmConfig& cfg,
           EmTrace* trace = nullptr);

/// Mean per-sample log-likelihood of `data` under `gmm`.
double mean_log_likelihood(const Gmm& gmm, const Eigen::MatrixXd& data);

struct GmrResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd responsibilities;
  /// True when every responsibility underflowed and the nearest component
  /// (Mahalanobis distance in input space) was used alone.
  bool fallback = false;
};

/// Conditions `gmm` on its input block. The covariance includes the
/// between-component spread (law of total variance).
GmrResult gmr(const Gmm& gmm, const Eigen::VectorXd& input);

/// Precomputed per-component conditioning terms for repeated GMR queries
/// on one mixture. `gmr()` is a one-shot wrapper around this class.
class GmrConditioner {
 public:
  explicit GmrConditioner(const Gmm& gmm);

  GmrResult condition(const Eigen::VectorXd& input) const;
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

 private:
  struct Term {
    double log_weight;
    double log_norm;                          // -0.5 (d_in log 2pi) - 0.5 log|S_II|
    Eigen::VectorXd mean_in;
    Eigen::VectorXd mean_out;
    Eigen::MatrixXd chol_in;                  // lower Cholesky factor of S_II
    Eigen::MatrixXd gain;                     // S_OI S_II^-1
    Eigen::MatrixXd cond_cov;                 // S_OO - S_OI S_II^-1 S_IO
  };
  int input_dim_;
  int output_dim_;
  std::vector<Term> terms_;
};

/// log(sum(exp(v))) without overflow; -inf for an all -inf vector.
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace tpaug
