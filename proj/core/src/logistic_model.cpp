#include "parsrec/logistic_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/linalg.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(s)), overflow-safe
double log1pexp(double s) {
    if (s > 30.0) return s;
    if (s < -30.0) return std::exp(s);
    return std::log1p(std::exp(s));
}

double dot_row(const std::vector<double>& row, const std::vector<double>& w, double b) {
    double s = b;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * w[j];
    return s;
}

}  // namespace

double logistic_loss(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<double>& weights, double intercept, double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = dot_row(x[i], weights, intercept);
        loss += log1pexp(s) - (y[i] != 0 ? s : 0.0);
    }
    double pen = 0.0;
    for (double w : weights) pen += w * w;
    return loss + 0.5 * l2 * pen;
}

std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& x,
                                      const std::vector<int>& y,
                                      const std::vector<double>& weights, double intercept,
                                      double l2) {
    const std::size_t d = weights.size();
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = sigmoid(dot_row(x[i], weights, intercept)) - (y[i] != 0 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) g[j] += r * x[i][j];
        g[d] += r;
    }
    for (std::size_t j = 0; j < d; ++j) g[j] += l2 * weights[j];
    return g;
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           const TrainConfig& config, std::vector<double>* loss_trace) {
    const std::size_t n = x.size();
    if (n == 0) throw InvalidInput("fit_logistic: empty training set");
    if (y.size() != n) throw InvalidInput("fit_logistic: row/label count mismatch");
    if (config.l2 < 0.0 || config.max_iterations < 1 || config.tolerance <= 0.0)
        throw InvalidInput("fit_logistic: bad train config");
    const std::size_t d = x[0].size();
    for (const auto& row : x)
        if (row.size() != d) throw InvalidInput("fit_logistic: ragged feature rows");

    std::vector<double> w(d, 0.0);
    double b = 0.0;
    double loss = logistic_loss(x, y, w, b, config.l2);
    if (loss_trace) loss_trace->push_back(loss);

    LogisticModel model;
    model.l2 = config.l2;

    std::vector<double> p(n);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        auto grad = logistic_gradient(x, y, w, b, config.l2);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm < config.tolerance) {
            model.converged = true;
            break;
        }

        // Newton system: [X'WX + l2 I, X'w1; w1'X, sum W] step = -grad
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = sigmoid(dot_row(x[i], w, b));
            p[i] = std::max(pi * (1.0 - pi), 1e-10);
        }
        const std::size_t m = d + 1;
        Matrix h(m, m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& row = x[i];
            const double wi = p[i];
            for (std::size_t a = 0; a < d; ++a) {
                const double wa = wi * row[a];
                if (wa == 0.0) continue;
                for (std::size_t c = a; c < d; ++c) h.at(a, c) += wa * row[c];
                h.at(a, d) += wa;
            }
            h.at(d, d) += wi;
        }
        for (std::size_t a = 0; a < d; ++a) {
            h.at(a, a) += config.l2 + 1e-12;
            for (std::size_t c = a + 1; c <= d; ++c) h.at(c, a) = h.at(a, c);
        }

        std::vector<double> step;
        Matrix chol = h;
        if (cholesky_factor(chol)) {
            step = cholesky_solve(chol, grad);
        } else {
            step = grad;  // gradient direction fallback
        }

        // Armijo backtracking on t -> (w, b) - t * step.
        double gdotstep = 0.0;
        for (std::size_t j = 0; j < m; ++j) gdotstep += grad[j] * step[j];
        if (gdotstep <= 0.0) {
            step = grad;
            gdotstep = gnorm * gnorm;
        }
        double t = 1.0;
        bool accepted = false;
        std::vector<double> w_new(d);
        for (int bt = 0; bt < config.max_backtracks; ++bt) {
            for (std::size_t j = 0; j < d; ++j) w_new[j] = w[j] - t * step[j];
            const double b_new = b - t * step[d];
            const double loss_new = logistic_loss(x, y, w_new, b_new, config.l2);
            if (loss_new <= loss - config.armijo_c * t * gdotstep) {
                w = w_new;
                b = b_new;
                loss = loss_new;
                accepted = true;
                break;
            }
            t *= config.backtrack_factor;
        }
        if (!accepted) break;  // no further progress at working precision
        model.iterations = iter + 1;
        if (loss_trace) loss_trace->push_back(loss);
    }
    if (!model.converged) {
        const auto grad = logistic_gradient(x, y, w, b, config.l2);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        if (std::sqrt(gnorm) < config.tolerance) model.converged = true;
    }
    model.weights = std::move(w);
    model.intercept = b;
    return model;
}

double predict_proba(const LogisticModel& model, const std::vector<double>& x) {
    if (x.size() != model.weights.size())
        throw InvalidInput("predict_proba: feature dimension mismatch");
    const double p = sigmoid(dot_row(x, model.weights, model.intercept));
    return std::min(1.0 - 1e-16, std::max(1e-300, p));
}

std::string logistic_model_to_json(const LogisticModel& model, const std::string& fingerprint) {
    ordered_json j;
    j["version"] = kVersion;
    j["kind"] = "logistic";
    j["dim"] = model.weights.size();
    j["weights"] = model.weights;
    j["intercept"] = model.intercept;
    j["l2"] = model.l2;
    j["converged"] = model.converged;
    j["iterations"] = model.iterations;
    j["train_fingerprint"] = fingerprint;
    return j.dump(2);
}

LogisticModel logistic_model_from_json(const std::string& text, std::string* fingerprint) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", "") != "logistic") throw InvalidInput("model file is not a logistic model");
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.l2 = j.value("l2", 0.0);
    m.converged = j.value("converged", false);
    m.iterations = j.value("iterations", 0);
    if (fingerprint) *fingerprint = j.value("train_fingerprint", "");
    return m;
}

}  // namespace parsrec
