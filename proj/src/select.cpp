#include "healthgrade/select.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "healthgrade/learn.hpp"

namespace hg {

std::string_view evaluator_tag(Evaluator e) {
    switch (e) {
        case Evaluator::Pearson: return "CoAE-PC";
        case Evaluator::LogReg: return "ClAE-LR";
        case Evaluator::Forest: return "ClAE-RF";
    }
    return "?";
}

Evaluator parse_evaluator(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (n == "pc" || n == "pearson" || n == "coae-pc") return Evaluator::Pearson;
    if (n == "lr" || n == "clae-lr") return Evaluator::LogReg;
    if (n == "rf" || n == "clae-rf") return Evaluator::Forest;
    throw UsageError("unknown selector '" + std::string(name) + "' (pc, lr, rf)");
}

namespace {

double pearson_column(const Matrix& x, std::size_t f, std::span<const double> yc) {
    const std::size_t n = x.rows();
    double lo = x(0, f), hi = x(0, f), mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x(i, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v;
    }
    if (lo == hi) return 0.0;
    mean /= static_cast<double>(n);
    double cov = 0.0, var = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x(i, f) - mean;
        cov += d * yc[i];
        var += d * d;
        var_y += yc[i] * yc[i];
    }
    if (var <= 0.0) return 0.0;
    return std::min(1.0, std::abs(cov) / std::sqrt(var * var_y));
}

std::vector<double> centred_labels(const Matrix& x, const Labels& y) {
    check_training_input(x, y);
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    if (pos < 2 || y.size() - pos < 2) throw DataError("Pearson scoring needs at least 2 instances per class");
    const double mean = static_cast<double>(pos) / static_cast<double>(y.size());
    std::vector<double> yc(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yc[i] = y[i] - mean;
    return yc;
}

}  // namespace

FeatureScores pearson_scores(const Matrix& x, const Labels& y) {
    const auto yc = centred_labels(x, y);
    FeatureScores out{Evaluator::Pearson, std::vector<double>(x.cols(), 0.0), {}};
    const auto m = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < m; ++f) out.scores[f] = pearson_column(x, static_cast<std::size_t>(f), yc);
    return out;
}

FeatureScores pearson_scores_serial(const Matrix& x, const Labels& y) {
    const auto yc = centred_labels(x, y);
    FeatureScores out{Evaluator::Pearson, std::vector<double>(x.cols(), 0.0), {}};
    for (std::size_t f = 0; f < x.cols(); ++f) out.scores[f] = pearson_column(x, f, yc);
    return out;
}

namespace {

struct LogLoss {
    const Matrix& z;  // standardized features
    std::vector<double> s;  // labels in {-1, +1}
    double l2;

    // Objective at (w, b); fills the gradient when asked.
    double eval(std::span<const double> w, double b, std::vector<double>* grad_w, double* grad_b) const {
        const std::size_t n = z.rows(), m = z.cols();
        const double inv_n = 1.0 / static_cast<double>(n);
        double loss = 0.0;
        if (grad_w) grad_w->assign(m, 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = z.row(i);
            const double margin = s[i] * (dot(row, w) + b);
            // log(1 + exp(-margin)), stable for both signs
            loss += margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
            if (grad_w) {
                const double sig = margin > 0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                              : 1.0 / (1.0 + std::exp(margin));
                const double coef = -s[i] * sig * inv_n;
                for (std::size_t j = 0; j < m; ++j) (*grad_w)[j] += coef * row[j];
                gb += coef;
            }
        }
        loss *= inv_n;
        double reg = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            reg += w[j] * w[j];
            if (grad_w) (*grad_w)[j] += l2 * w[j];
        }
        if (grad_b) *grad_b = gb;
        return loss + 0.5 * l2 * reg;
    }
};

double norm2(std::span<const double> g, double gb) { return std::sqrt(dot(g, g) + gb * gb); }

}  // namespace

LogRegFit fit_logistic(const Matrix& x, const Labels& y, const LogRegConfig& config) {
    check_training_input(x, y);
    if (!(config.l2_strength >= 0.0)) throw UsageError("l2_strength must be >= 0");
    const Standardizer scaler = Standardizer::fit(x);
    const Matrix z = scaler.apply(x);
    LogLoss f{z, {}, config.l2_strength};
    for (int v : y) f.s.push_back(v == 1 ? 1.0 : -1.0);

    const std::size_t m = x.cols();
    LogRegFit fit;
    fit.weights.assign(m, 0.0);
    std::vector<double> g, g_new, w_new(m), prev_w, prev_g;
    double gb = 0.0, gb_new = 0.0, prev_b = 0.0, prev_gb = 0.0;
    double value = f.eval(fit.weights, fit.intercept, &g, &gb);
    double step = 1.0;
    constexpr double kArmijo = 1e-4;

    for (std::size_t it = 0;; ++it) {
        fit.gradient_norm = norm2(g, gb);
        fit.iterations = it;
        if (fit.gradient_norm < config.tolerance) break;
        if (it >= config.max_iterations)
            throw ConvergenceError("logistic regression did not converge after " + std::to_string(it) +
                                       " iterations (gradient norm " + std::to_string(fit.gradient_norm) + ")",
                                   it, fit.gradient_norm);
        if (it > 0) {
            // Barzilai-Borwein initial step from the last displacement.
            double ss = 0.0, sy = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double dw = fit.weights[j] - prev_w[j];
                const double dg = g[j] - prev_g[j];
                ss += dw * dw;
                sy += dw * dg;
            }
            const double db = fit.intercept - prev_b, dgb = gb - prev_gb;
            ss += db * db;
            sy += db * dgb;
            step = sy > 0.0 ? ss / sy : 1.0;
        }
        const double gg = fit.gradient_norm * fit.gradient_norm;
        double value_new = 0.0, b_new = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t j = 0; j < m; ++j) w_new[j] = fit.weights[j] - step * g[j];
            b_new = fit.intercept - step * gb;
            value_new = f.eval(w_new, b_new, nullptr, nullptr);
            if (value_new <= value - kArmijo * step * gg || halvings >= 60) break;
            step *= 0.5;
        }
        prev_w = fit.weights;
        prev_g = g;
        prev_b = fit.intercept;
        prev_gb = gb;
        fit.weights = w_new;
        fit.intercept = b_new;
        value = f.eval(fit.weights, fit.intercept, &g_new, &gb_new);
        g.swap(g_new);
        gb = gb_new;
    }
    return fit;
}

FeatureScores lr_importance(const Matrix& x, const Labels& y, const LogRegConfig& config) {
    const auto fit = fit_logistic(x, y, config);
    FeatureScores out{Evaluator::LogReg, fit.weights, {}};
    for (auto& v : out.scores) v = std::abs(v);
    return out;
}

FeatureScores rf_importance(const Matrix& x, const Labels& y, std::size_t n_trees, std::uint64_t seed) {
    const auto rf = RandomForest::fit(x, y, n_trees, MaxFeaturesRule::Sqrt, seed);
    return {Evaluator::Forest, rf.importances(), {}};
}

FeatureScores score_features(Evaluator e, const Matrix& x, const Labels& y, std::uint64_t seed) {
    switch (e) {
        case Evaluator::Pearson: return pearson_scores(x, y);
        case Evaluator::LogReg: return lr_importance(x, y);
        case Evaluator::Forest: return rf_importance(x, y, 100, seed);
    }
    throw UsageError("unknown evaluator");
}

namespace {

std::vector<std::size_t> ordering(const FeatureScores& scores, std::size_t k) {
    for (double v : scores.scores)
        if (!std::isfinite(v)) throw DataError("feature scores must be finite");
    std::vector<std::size_t> idx(scores.scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto& s = scores.scores;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
    idx.resize(k);
    return idx;
}

}  // namespace

std::vector<std::size_t> top_k(const FeatureScores& scores, std::size_t k) {
    if (k < 1 || k > scores.scores.size())
        throw UsageError("top_k: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(scores.scores.size()) + "]");
    return ordering(scores, k);
}

std::vector<std::size_t> ranks_of(const FeatureScores& scores) {
    const auto order = ordering(scores, scores.scores.size());
    std::vector<std::size_t> rank(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
    return rank;
}

std::vector<CombinedFeature> combined_top(const std::array<FeatureScores, 3>& scores, const FeatureSpace& space,
                                          std::size_t k) {
    const std::size_t m = space.size();
    for (const auto& s : scores) {
        if (s.scores.size() != m)
            throw DataError("score set for " + std::string(evaluator_tag(s.evaluator)) + " has " +
                            std::to_string(s.scores.size()) + " entries, feature space has " + std::to_string(m));
        if (!s.fingerprint.empty() && s.fingerprint != space.fingerprint())
            throw DataError("score set for " + std::string(evaluator_tag(s.evaluator)) +
                            " belongs to a different feature space");
    }
    if (k < 1 || k > m) throw UsageError("combined_top: k outside [1, |space|]");
    std::array<std::vector<std::size_t>, 3> rank;
    for (std::size_t e = 0; e < 3; ++e) rank[e] = ranks_of(scores[e]);
    FeatureScores points{Evaluator::Pearson, std::vector<double>(m, 0.0), {}};
    for (std::size_t f = 0; f < m; ++f)
        for (std::size_t e = 0; e < 3; ++e) points.scores[f] += static_cast<double>(m - rank[e][f]);
    std::vector<CombinedFeature> out;
    for (auto f : top_k(points, k)) {
        CombinedFeature c;
        c.index = f;
        c.name = space[f].name;
        c.family = space[f].family;
        c.points = static_cast<std::size_t>(points.scores[f]);
        c.common = true;
        for (std::size_t e = 0; e < 3; ++e) {
            c.ranks[e] = rank[e][f];
            c.common = c.common && rank[e][f] <= k;
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string format_scores(const FeatureScores& scores, const FeatureSpace& space) {
    if (scores.scores.size() != space.size()) throw DataError("score count does not match the feature space");
    std::ostringstream os;
    os.precision(10);
    os << "rank\tindex\tfamily\tname\tscore\n";
    const auto order = ordering(scores, scores.scores.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto f = order[r];
        os << r + 1 << '\t' << f << '\t' << family_name(space[f].family) << '\t' << space[f].name << '\t'
           << scores.scores[f] << '\n';
    }
    return os.str();
}

std::string format_combined(const std::vector<CombinedFeature>& features, const std::array<FeatureScores, 3>& scores) {
    std::ostringstream os;
    os << "rank\tfeature\tfamily\tpoints";
    for (const auto& s : scores) os << '\t' << evaluator_tag(s.evaluator);
    os << "\tcommon\n";
    for (std::size_t r = 0; r < features.size(); ++r) {
        const auto& c = features[r];
        os << r + 1 << '\t' << c.name << '\t' << family_name(c.family) << '\t' << c.points;
        for (auto rk : c.ranks) os << '\t' << rk;
        os << '\t' << (c.common ? "*" : "") << '\n';
    }
    return os.str();
}

}  // namespace hg
