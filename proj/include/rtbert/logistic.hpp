#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rtbert/error.hpp"

namespace rtbert {

struct HeadParams {
  std::vector<double> weight;
  double bias = 0.0;

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

/// Overflow-safe logistic function.
inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double head_logit(const HeadParams& head, std::span<const double> x) {
  if (x.size() != head.weight.size()) throw InputError("embedding dimension does not match head");
  double z = head.bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += head.weight[k] * x[k];
  return z;
}

struct LogisticOptions {
  int max_iter = 100;
  double grad_tol = 1e-10;
};

namespace detail {

// log(1 + exp(-m))
inline double log1p_exp_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

}  // namespace detail

/// L2-regularized logistic regression by damped Newton steps.
/// Minimizes mean_i log(1 + exp(-y_i (w.x_i + b))) + ||w||^2 / (2C), with
/// y_i = +1 where `positive[i]` is nonzero, -1 otherwise, and the bias left unregularized.
inline HeadParams fit_logistic(std::span<const std::vector<double>> x, std::span<const int> positive, double c,
                               const LogisticOptions& opt = {}) {
  if (x.empty() || x.size() != positive.size()) throw InputError("logistic regression needs matching, nonempty inputs");
  if (!(c > 0)) throw InputError("C must be positive");
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto d = static_cast<Eigen::Index>(x.front().size());
  bool any_pos = false, any_neg = false;
  Eigen::MatrixXd design(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(x[i].size()) != d) throw InputError("ragged embedding matrix");
    for (Eigen::Index k = 0; k < d; ++k) design(i, k) = x[i][k];
    design(i, d) = 1.0;
    y(i) = positive[i] ? 1.0 : -1.0;
    (positive[i] ? any_pos : any_neg) = true;
  }
  if (!any_pos || !any_neg) throw InputError("logistic regression needs both classes");

  const double lambda = 1.0 / c;
  Eigen::VectorXd reg = Eigen::VectorXd::Constant(d + 1, lambda);
  reg(d) = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd margin = (design * theta).cwiseProduct(y);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += detail::log1p_exp_neg(margin(i));
    return loss * inv_n + 0.5 * theta.cwiseProduct(reg).dot(theta);
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  double f = objective(theta);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    const Eigen::VectorXd z = design * theta;
    Eigen::VectorXd resid(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(z(i));
      resid(i) = p - (y(i) > 0 ? 1.0 : 0.0);
      curv(i) = std::max(p * (1.0 - p), 1e-12);
    }
    const Eigen::VectorXd grad = design.transpose() * resid * inv_n + reg.cwiseProduct(theta);
    if (grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) break;
    Eigen::MatrixXd hess = design.transpose() * curv.asDiagonal() * design * inv_n;
    hess.diagonal() += reg + Eigen::VectorXd::Constant(d + 1, 1e-12);
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::VectorXd cand = theta - t * step;
      const double fc = objective(cand);
      if (fc <= f - 1e-4 * t * grad.dot(step)) {
        theta = cand;
        f = fc;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  if (!theta.allFinite()) throw NumericError("logistic regression diverged");

  HeadParams head;
  head.weight.assign(theta.data(), theta.data() + d);
  head.bias = theta(d);
  return head;
}

inline void save_head(const std::filesystem::path& path, const HeadParams& head) {
  nlohmann::ordered_json j;
  j["format"] = "rtbert-head";
  j["version"] = 1;
  j["weight"] = head.weight;
  j["bias"] = head.bias;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline HeadParams load_head(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != "rtbert-head" || j.at("version") != 1) throw IoError(path.string() + ": not a head file");
    HeadParams head{j.at("weight").get<std::vector<double>>(), j.at("bias").get<double>()};
    for (double w : head.weight) {
      if (!std::isfinite(w)) throw NumericError("non-finite head weight");
    }
    return head;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace rtbert
