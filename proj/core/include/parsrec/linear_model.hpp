#pragma once

#include <string>
#include <vector>

namespace parsrec {

// Ridge-regularized linear regressor. Weights are the exact minimizer of
// ||Xw + b - y||^2 + l2 ||w||^2 with the intercept left unpenalized,
// obtained from the regularized normal equations.
struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double l2 = 0.0;
    // The l2 = 0 normal equations were singular and the minimum-norm
    // solution was taken instead.
    bool min_norm = false;

    std::size_t dim() const { return weights.size(); }
};

LinearModel fit_linear(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       double l2);

struct LinearPrediction {
    double raw;      // used for ranking
    double clamped;  // min(1, max(0, raw)), display only
};

LinearPrediction predict_linear(const LinearModel& model, const std::vector<double>& x);

std::string linear_model_to_json(const LinearModel& model, const std::string& fingerprint);
LinearModel linear_model_from_json(const std::string& text, std::string* fingerprint = nullptr);

}  // namespace parsrec
