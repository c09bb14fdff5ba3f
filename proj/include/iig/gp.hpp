#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "iig/geometry.hpp"

namespace iig {

enum class KernelFamily { SquaredExponential, SquaredExponentialArd, Matern52 };

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  /// Scalar lengthscale for isotropic families; per-dimension for ARD.
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Constant(1, 1.0);
  double signal_variance = 1.0;

  double lengthscale() const { return lengthscales[0]; }
  void validate() const;
};

struct TrainingSet {
  Eigen::MatrixXd inputs;   // d x n
  Eigen::VectorXd targets;  // n
  double noise_variance = 0.0;

  int size() const { return static_cast<int>(targets.size()); }
  void validate() const;

  /// CSV rows "x1,...,xd,y"; one optional header line.
  static TrainingSet from_csv(const std::string& path, double noise_variance);
};

struct GaussHermiteScheme {
  int order = 11;
  Eigen::VectorXd nodes;    // roots of the physicists' Hermite polynomial
  Eigen::VectorXd weights;  // sum to sqrt(pi)

  static GaussHermiteScheme make(int order = 11);
};

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

/// Kernel value as a function of distance (isotropic families only).
double kernel_eval(const KernelSpec& spec, double r);
/// Kernel value for an input pair; supports ARD.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Gram matrix K(A, B); columns of A/B are points.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

struct GpPrediction {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
};

/// Predictive mean/variance per query column via Cholesky of K + sigma_n^2 I.
/// An empty training set returns the prior.
GpPrediction gp_predict(const TrainingSet& data, const Eigen::MatrixXd& queries,
                        const KernelSpec& spec);

/// log p(y | X, theta) in nats.
double log_marginal_likelihood(const TrainingSet& data, const KernelSpec& spec);

struct FitOptions {
  int restarts = 5;
  int max_iterations = 200;
  std::uint64_t seed = 0;
};

/// Maximizes the log marginal likelihood with a Nelder-Mead simplex in
/// log-parameter space, restarted over perturbed copies of the initial guess.
KernelSpec fit_hyperparameters(const TrainingSet& data, const KernelSpec& initial,
                               const FitOptions& options = {});

/// E[k(x, other)] for x ~ N(mean, cov), tensorized Gauss-Hermite over the two
/// position dimensions. Exactly kernel_eval when cov is zero.
double expected_kernel(const KernelSpec& spec, const Point2& input_mean,
                       const Eigen::Matrix2d& input_cov, const Point2& other,
                       const GaussHermiteScheme& scheme);

/// 0.5 (logdet prior - logdet posterior), via Cholesky.
double mi_gaussian_exact(const GaussianBelief& prior, const GaussianBelief& posterior);

/// Marginal-variance approximation: 0.5 (sum log prior_ii - sum log post_ii).
double mi_gaussian_marginal(const GaussianBelief& prior, const GaussianBelief& posterior);

}  // namespace iig
