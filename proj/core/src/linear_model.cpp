#include "parsrec/linear_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/linalg.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

LinearModel fit_linear(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       double l2) {
    const std::size_t n = x.size();
    if (n == 0) throw InvalidInput("fit_linear: empty training set");
    if (y.size() != n) throw InvalidInput("fit_linear: row/response count mismatch");
    const std::size_t d = x[0].size();
    for (const auto& row : x)
        if (row.size() != d) throw InvalidInput("fit_linear: ragged feature rows");
    for (double v : y)
        if (!std::isfinite(v)) throw InvalidInput("fit_linear: non-finite response");
    if (l2 < 0.0) throw InvalidInput("fit_linear: negative l2");

    // Normal equations over [X | 1]; the intercept coordinate is not
    // penalized.
    const std::size_t m = d + 1;
    Matrix a(m, m, 0.0);
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = x[i];
        for (std::size_t p = 0; p < d; ++p) {
            const double xp = row[p];
            if (xp == 0.0) continue;
            for (std::size_t q = p; q < d; ++q) a.at(p, q) += xp * row[q];
            a.at(p, d) += xp;
            rhs[p] += xp * y[i];
        }
        a.at(d, d) += 1.0;
        rhs[d] += y[i];
    }
    for (std::size_t p = 0; p < d; ++p) {
        a.at(p, p) += l2;
        for (std::size_t q = p + 1; q <= d; ++q) a.at(q, p) = a.at(p, q);
    }

    LinearModel model;
    model.l2 = l2;
    Matrix chol = a;
    std::vector<double> sol;
    if (cholesky_factor(chol)) {
        sol = cholesky_solve(chol, rhs);
    } else {
        sol = solve_min_norm(a, rhs);
        model.min_norm = true;
    }
    model.weights.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(d));
    model.intercept = sol[d];
    return model;
}

LinearPrediction predict_linear(const LinearModel& model, const std::vector<double>& x) {
    if (x.size() != model.weights.size())
        throw InvalidInput("predict_linear: feature dimension mismatch");
    double s = model.intercept;
    for (std::size_t i = 0; i < x.size(); ++i) s += model.weights[i] * x[i];
    return {s, std::min(1.0, std::max(0.0, s))};
}

std::string linear_model_to_json(const LinearModel& model, const std::string& fingerprint) {
    ordered_json j;
    j["version"] = kVersion;
    j["kind"] = "linear";
    j["dim"] = model.weights.size();
    j["weights"] = model.weights;
    j["intercept"] = model.intercept;
    j["l2"] = model.l2;
    j["min_norm"] = model.min_norm;
    j["train_fingerprint"] = fingerprint;
    return j.dump(2);
}

LinearModel linear_model_from_json(const std::string& text, std::string* fingerprint) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", "") != "linear") throw InvalidInput("model file is not a linear model");
    LinearModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.l2 = j.value("l2", 0.0);
    m.min_norm = j.value("min_norm", false);
    if (fingerprint) *fingerprint = j.value("train_fingerprint", "");
    return m;
}

}  // namespace parsrec
