#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/timeseries.hpp"

namespace netreduce {

/// The projected diffusion vanishes at every sample, so no loss can be formed.
class DegenerateMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PseudoInverse {
  Matrix inverse;
  double log_det = 0.0;  // sum of logs of the retained eigenvalues
  std::size_t rank = 0;
};

/// Moore-Penrose inverse of a symmetric positive semidefinite matrix. Eigenvalues
/// at or below rtol * (largest eigenvalue) are treated as zero.
PseudoInverse pseudo_inverse(const Matrix& m, double rtol = 1e-12);

struct FullLoss {
  double relative_entropy = 0.0;  // sum over samples of the covariance mismatch term
  double drift = 0.0;             // sum over samples of the drift mismatch, weighted by dt
  double total() const { return relative_entropy + drift; }
};

/**
 * Pathwise losses of a reduced model against full-model data. Samples are the
 * records x_0..x_{T-1}, each weighted by the following step. The full model's
 * projected drift and diffusion at each sample are computed once.
 */
class LossEvaluator {
 public:
  LossEvaluator(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                double rtol = 1e-12);

  /// 1/2 sum_i |b_red(Pi x_i; theta) - Pi b(x_i)|^2 dt_i in the metric (Pi Sigma Pi^T)^+.
  double loss(ConstVectorRef theta) const;
  /// Same, with the gradient with respect to theta (natural scale).
  double loss_and_gradient(ConstVectorRef theta, Eigen::Ref<Vector> grad) const;
  /// Relative-entropy-rate form with the reduced model's own diffusion as metric.
  FullLoss loss_full(ConstVectorRef theta) const;

  std::size_t num_samples() const { return samples_.size(); }
  const Network& reduced_network() const { return reduced_; }

 private:
  struct Sample {
    Vector x_bar;
    Vector target;  // Pi b(x)
    Matrix proj_diffusion;
    Matrix metric;  // pseudo-inverse of proj_diffusion
    std::size_t rank = 0;
    double dt = 0.0;
  };

  Vector reduced_drift(const Sample& s, ConstVectorRef theta) const;

  Network reduced_;
  std::vector<Sample> samples_;
  double rtol_;
};

double loss_simplified(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                       ConstVectorRef theta);
FullLoss loss_full(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                   ConstVectorRef theta);

enum class Optimizer { nelder_mead, gradient_descent };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct TrainOptions {
  Optimizer optimizer = Optimizer::nelder_mead;
  double lambda = 0.0;  // weight of |theta - theta0|^2
  std::size_t max_iter = 20000;
  double tol = 1e-12;
  bool compute_full_loss = false;
};

struct TrainingResult {
  Vector theta0;
  Vector theta_star;
  double loss_value = 0.0;  // simplified loss at theta_star, without the penalty
  double objective = 0.0;   // loss plus penalty
  std::optional<FullLoss> full_loss;
  std::size_t iterations = 0;
  bool converged = false;
  Optimizer optimizer = Optimizer::nelder_mead;
  double lambda = 0.0;
  std::vector<double> history;
};

/// Fits theta in log coordinates starting from the reduced model's nominal values.
TrainingResult train(const ReducedModel& reduced, const Network& full, ConstVectorRef c, const TimeSeries& ts,
                     const TrainOptions& opts = {});

/// Reduced model with theta_star as its nominal parameters.
ReducedModel apply_fit(const ReducedModel& reduced, const TrainingResult& fit);

Json fitted_to_json(const Network& full, const ReducedModel& fitted, const TrainingResult& fit);

}  // namespace netreduce
