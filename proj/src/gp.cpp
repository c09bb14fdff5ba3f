#include "iig/gp.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace iig {

namespace {

constexpr double kCholeskyJitter = 1e-10;

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& k, double noise_variance) {
  Eigen::MatrixXd m = k;
  const double diag = noise_variance > 0.0 ? noise_variance : kCholeskyJitter;
  m.diagonal().array() += diag;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gp: Cholesky factorization failed");
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

void KernelSpec::validate() const {
  if ((lengthscales.array() <= 0.0).any())
    throw std::invalid_argument("KernelSpec: lengthscales must be > 0");
  if (signal_variance <= 0.0)
    throw std::invalid_argument("KernelSpec: signal_variance must be > 0");
}

void TrainingSet::validate() const {
  if (inputs.cols() != targets.size())
    throw std::invalid_argument("TrainingSet: input column count != target length");
  if (noise_variance < 0.0)
    throw std::invalid_argument("TrainingSet: noise_variance must be >= 0");
}

TrainingSet TrainingSet::from_csv(const std::string& path, double noise_variance) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("TrainingSet: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header line
      throw std::runtime_error("TrainingSet: non-numeric row in " + path);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("TrainingSet: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("TrainingSet: no data rows in " + path);
  const int d = static_cast<int>(rows.front().size()) - 1;
  if (d < 1) throw std::runtime_error("TrainingSet: rows need at least two fields");
  TrainingSet out;
  out.inputs.resize(d, static_cast<int>(rows.size()));
  out.targets.resize(static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    for (int j = 0; j < d; ++j) out.inputs(j, i) = rows[i][j];
    out.targets[i] = rows[i][d];
  }
  out.noise_variance = noise_variance;
  out.validate();
  return out;
}

GaussHermiteScheme GaussHermiteScheme::make(int order) {
  if (order < 1) throw std::invalid_argument("GaussHermiteScheme: order must be >= 1");
  GaussHermiteScheme scheme;
  scheme.order = order;
  if (order == 1) {
    scheme.nodes = Eigen::VectorXd::Zero(1);
    scheme.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
    return scheme;
  }
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    const double off = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  scheme.nodes = solver.eigenvalues();
  scheme.weights.resize(order);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < order; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    scheme.weights[i] = sqrt_pi * v0 * v0;
  }
  return scheme;
}

void GaussianBelief::validate() const {
  if (covariance.rows() != dim() || covariance.cols() != dim())
    throw std::invalid_argument("GaussianBelief: covariance shape mismatch");
  if (!covariance.isApprox(covariance.transpose(), 1e-12))
    throw std::invalid_argument("GaussianBelief: covariance not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("GaussianBelief: covariance not positive definite");
}

double kernel_eval(const KernelSpec& spec, double r) {
  if (r < 0.0) throw std::invalid_argument("kernel_eval: distance must be >= 0");
  spec.validate();
  const double l = spec.lengthscale();
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
    case KernelFamily::SquaredExponentialArd:
      return spec.signal_variance * std::exp(-0.5 * r * r / (l * l));
    case KernelFamily::Matern52: {
      const double s = std::sqrt(5.0) * r / l;
      return spec.signal_variance * (1.0 + s + 5.0 * r * r / (3.0 * l * l)) * std::exp(-s);
    }
  }
  throw std::logic_error("kernel_eval: unknown family");
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (spec.family == KernelFamily::SquaredExponentialArd) {
    spec.validate();
    if (spec.lengthscales.size() != a.size())
      throw std::invalid_argument("kernel_eval: ARD lengthscale dimension mismatch");
    const double q = ((a - b).array() / spec.lengthscales.array()).square().sum();
    return spec.signal_variance * std::exp(-0.5 * q);
  }
  return kernel_eval(spec, (a - b).norm());
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j) k(i, j) = kernel_eval(spec, a.col(i), b.col(j));
  return k;
}

GpPrediction gp_predict(const TrainingSet& data, const Eigen::MatrixXd& queries,
                        const KernelSpec& spec) {
  data.validate();
  spec.validate();
  const int m = static_cast<int>(queries.cols());
  GpPrediction out;
  out.means = Eigen::VectorXd::Zero(m);
  out.variances.resize(m);
  if (data.size() == 0) {
    for (int i = 0; i < m; ++i)
      out.variances[i] = kernel_eval(spec, queries.col(i), queries.col(i));
    return out;
  }
  const Eigen::MatrixXd k_xx = kernel_matrix(spec, data.inputs, data.inputs);
  const Eigen::MatrixXd k_xs = kernel_matrix(spec, data.inputs, queries);
  const auto llt = factorize(k_xx, data.noise_variance);
  const Eigen::VectorXd alpha = llt.solve(data.targets);
  const Eigen::MatrixXd v = llt.matrixL().solve(k_xs);
  out.means = k_xs.transpose() * alpha;
  for (int i = 0; i < m; ++i) {
    const double prior = kernel_eval(spec, queries.col(i), queries.col(i));
    out.variances[i] = std::max(0.0, prior - v.col(i).squaredNorm());
  }
  return out;
}

double log_marginal_likelihood(const TrainingSet& data, const KernelSpec& spec) {
  data.validate();
  spec.validate();
  const int n = data.size();
  if (n < 1) throw std::invalid_argument("log_marginal_likelihood: empty training set");
  const Eigen::MatrixXd k_xx = kernel_matrix(spec, data.inputs, data.inputs);
  const auto llt = factorize(k_xx, data.noise_variance);
  const Eigen::VectorXd alpha = llt.solve(data.targets);
  return -0.5 * data.targets.dot(alpha) - 0.5 * log_det_from_llt(llt) -
         0.5 * n * std::log(2.0 * M_PI);
}

namespace {

// Minimal Nelder-Mead on an objective to minimize.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& start, int max_iterations) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += 0.25;
  for (int i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  auto order = [&]() {
    for (int i = 1; i <= n; ++i)
      for (int j = i; j > 0 && values[j] < values[j - 1]; --j) {
        std::swap(values[j], values[j - 1]);
        std::swap(simplex[j], simplex[j - 1]);
      }
  };
  order();
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (std::abs(values[n] - values[0]) < 1e-10) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;
    const Eigen::VectorXd reflected = centroid + (centroid - simplex[n]);
    const double fr = f(reflected);
    if (fr < values[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = f(expanded);
      simplex[n] = fe < fr ? expanded : reflected;
      values[n] = std::min(fe, fr);
    } else if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[n] - centroid);
      const double fc = f(contracted);
      if (fc < values[n]) {
        simplex[n] = contracted;
        values[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          values[i] = f(simplex[i]);
        }
      }
    }
    order();
  }
  return simplex[0];
}

}  // namespace

KernelSpec fit_hyperparameters(const TrainingSet& data, const KernelSpec& initial,
                               const FitOptions& options) {
  data.validate();
  initial.validate();
  if (data.size() < 2) throw std::invalid_argument("fit_hyperparameters: need n >= 2");
  const int nl = static_cast<int>(initial.lengthscales.size());

  auto to_spec = [&](const Eigen::VectorXd& theta) {
    KernelSpec spec = initial;
    for (int i = 0; i < nl; ++i) spec.lengthscales[i] = std::exp(theta[i]);
    spec.signal_variance = std::exp(theta[nl]);
    return spec;
  };
  auto objective = [&](const Eigen::VectorXd& theta) {
    try {
      return -log_marginal_likelihood(data, to_spec(theta));
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd base(nl + 1);
  for (int i = 0; i < nl; ++i) base[i] = std::log(initial.lengthscales[i]);
  base[nl] = std::log(initial.signal_variance);

  SeededRng rng(options.seed);
  Eigen::VectorXd best = base;
  double best_value = objective(base);
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    Eigen::VectorXd guess = base;
    if (restart > 0)
      for (int i = 0; i < guess.size(); ++i) guess[i] += rng.uniform(-1.5, 1.5);
    const double guess_value = objective(guess);
    if (guess_value < best_value) {
      best_value = guess_value;
      best = guess;
    }
    if (options.max_iterations <= 0) continue;
    const Eigen::VectorXd result = nelder_mead(objective, guess, options.max_iterations);
    const double value = objective(result);
    if (value < best_value) {
      best_value = value;
      best = result;
    }
  }
  if (!std::isfinite(best_value))
    throw std::runtime_error("fit_hyperparameters: all candidates failed factorization");
  return to_spec(best);
}

double expected_kernel(const KernelSpec& spec, const Point2& input_mean,
                       const Eigen::Matrix2d& input_cov, const Point2& other,
                       const GaussHermiteScheme& scheme) {
  if (!input_cov.isApprox(input_cov.transpose(), 1e-9))
    throw std::invalid_argument("expected_kernel: covariance not symmetric");
  Eigen::Vector2d mean(input_mean.x, input_mean.y);
  Eigen::Vector2d target(other.x, other.y);
  if (input_cov.isZero(0.0)) return kernel_eval(spec, mean, target);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(input_cov);
  Eigen::Vector2d eigs = solver.eigenvalues().cwiseMax(0.0);
  const Eigen::Matrix2d transform =
      solver.eigenvectors() * eigs.cwiseSqrt().asDiagonal();

  // x = mean + sqrt(2) * T * t, weights normalized by 1/pi for 2D.
  double sum = 0.0;
  for (int i = 0; i < scheme.order; ++i) {
    for (int j = 0; j < scheme.order; ++j) {
      const Eigen::Vector2d t(scheme.nodes[i], scheme.nodes[j]);
      const Eigen::Vector2d x = mean + std::sqrt(2.0) * (transform * t);
      sum += scheme.weights[i] * scheme.weights[j] * kernel_eval(spec, x, target);
    }
  }
  return sum / M_PI;
}

double mi_gaussian_exact(const GaussianBelief& prior, const GaussianBelief& posterior) {
  if (prior.dim() != posterior.dim())
    throw std::invalid_argument("mi_gaussian_exact: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.covariance);
  Eigen::LLT<Eigen::MatrixXd> post_llt(posterior.covariance);
  if (prior_llt.info() != Eigen::Success || post_llt.info() != Eigen::Success)
    throw std::runtime_error("mi_gaussian_exact: covariance not positive definite");
  return 0.5 * (log_det_from_llt(prior_llt) - log_det_from_llt(post_llt));
}

double mi_gaussian_marginal(const GaussianBelief& prior, const GaussianBelief& posterior) {
  if (prior.dim() != posterior.dim())
    throw std::invalid_argument("mi_gaussian_marginal: dimension mismatch");
  if ((prior.covariance.diagonal().array() <= 0.0).any() ||
      (posterior.covariance.diagonal().array() <= 0.0).any())
    throw std::runtime_error("mi_gaussian_marginal: nonpositive diagonal entry");
  return 0.5 * (prior.covariance.diagonal().array().log().sum() -
                posterior.covariance.diagonal().array().log().sum());
}

}  // namespace iig
