#pragma once

#include <string>
#include <vector>

namespace parsrec {

struct TrainConfig {
    double l2 = 1.0;            // penalty on weights, never on the intercept
    int max_iterations = 100;
    double tolerance = 1e-6;    // gradient-norm stopping criterion
    // Armijo backtracking on the Newton step keeps the penalized loss
    // non-increasing across iterations.
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 40;
};

struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double l2 = 0.0;
    bool converged = false;
    int iterations = 0;

    std::size_t dim() const { return weights.size(); }
};

// L2-penalized logistic regression, fitted by damped Newton iterations from
// a zero initialization. Deterministic for fixed inputs and config. When
// given, `loss_trace` records the penalized loss after every accepted step.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& x,
                           const std::vector<int>& y, const TrainConfig& config,
                           std::vector<double>* loss_trace = nullptr);

// sigmoid(w.x + b), clamped to the open interval (0, 1).
double predict_proba(const LogisticModel& model, const std::vector<double>& x);

// Penalized negative log-likelihood and its gradient at (weights, intercept);
// the gradient layout is [d weight coords, intercept]. Exposed so tests can
// check the optimizer against finite differences.
double logistic_loss(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<double>& weights, double intercept, double l2);
std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& x,
                                      const std::vector<int>& y,
                                      const std::vector<double>& weights, double intercept,
                                      double l2);

std::string logistic_model_to_json(const LogisticModel& model, const std::string& fingerprint);
LogisticModel logistic_model_from_json(const std::string& text, std::string* fingerprint = nullptr);

}  // namespace parsrec
