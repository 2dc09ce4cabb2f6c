#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "healthgrade/select.hpp"
#include "test_util.hpp"

using namespace hg;

namespace {

Matrix from_columns(const std::vector<std::vector<double>>& cols) {
    Matrix m(cols.front().size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
    return m;
}

double oracle_abs_r(const Matrix& x, std::size_t c, const Labels& y) {
    const double n = static_cast<double>(y.size());
    double mx = 0, my = 0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        mx += x(r, c);
        my += y[r];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        sxy += (x(r, c) - mx) * (y[r] - my);
        sxx += (x(r, c) - mx) * (x(r, c) - mx);
        syy += (y[r] - my) * (y[r] - my);
    }
    if (sxx == 0) return 0.0;
    return std::abs(sxy / std::sqrt(sxx * syy));
}

FeatureScores scores_of(std::vector<double> s) { return {Evaluator::Pearson, std::move(s), ""}; }

FeatureSpace space_of(std::size_t n) {
    std::vector<FeatureInfo> f;
    for (std::size_t i = 0; i < n; ++i) f.push_back({"TFIDF:f" + std::to_string(i), Family::TFIDF});
    return FeatureSpace(f);
}

// Random data where column 0 is y plus noise and the rest is noise.
std::pair<Matrix, Labels> planted(std::size_t n, std::size_t m, std::uint64_t seed, double noise = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Labels y(n);
    Matrix x(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        y[r] = static_cast<int>(r % 2);
        x(r, 0) = y[r] + noise * g(rng);
        for (std::size_t c = 1; c < m; ++c) x(r, c) = g(rng);
    }
    return {x, y};
}

}  // namespace

TEST_CASE("evaluator names") {
    CHECK(evaluator_tag(Evaluator::Pearson) == "CoAE-PC");
    CHECK(evaluator_tag(Evaluator::LogReg) == "ClAE-LR");
    CHECK(evaluator_tag(Evaluator::Forest) == "ClAE-RF");
    CHECK(parse_evaluator("pc") == Evaluator::Pearson);
    CHECK(parse_evaluator("ClAE-rf") == Evaluator::Forest);
    CHECK(parse_evaluator("LR") == Evaluator::LogReg);
    CHECK_THROWS_AS(parse_evaluator("chi2"), UsageError);
}

TEST_CASE("pearson worked examples") {
    const Labels y{0, 1, 0, 1, 1, 0};
    std::vector<double> same(y.begin(), y.end()), flipped, constant(6, 3.0);
    for (int v : y) flipped.push_back(1.0 - v);
    const auto s = pearson_scores(from_columns({same, constant, flipped}), y);
    CHECK(s.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.scores[1] == 0.0);
    CHECK(s.scores[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.evaluator == Evaluator::Pearson);
    CHECK_THROWS_AS(pearson_scores(from_columns({same}), Labels{1, 1, 1, 1, 1, 0}), DataError);
}

TEST_CASE("pearson matches the two-pass oracle and is affine invariant") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 6 + rng() % 40, m = 1 + rng() % 12;
        Matrix x(n, m);
        Labels y(n);
        for (std::size_t r = 0; r < n; ++r) {
            y[r] = r < 2 ? static_cast<int>(r) : static_cast<int>(rng() % 2);
            for (std::size_t c = 0; c < m; ++c) x(r, c) = (c % 3 == 0 ? 5.0 : g(rng)) + (c % 3 == 1 ? y[r] : 0);
        }
        std::swap(y[0], y[n - 1]);
        y[0] = 0;
        y[1] = 1;
        if (std::count(y.begin(), y.end(), 0) < 2 || std::count(y.begin(), y.end(), 1) < 2) continue;
        const auto s = pearson_scores(x, y);
        const auto serial = pearson_scores_serial(x, y);
        CHECK(s.scores == serial.scores);
        Matrix scaled = x;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < m; ++c) scaled(r, c) = 3.5 * x(r, c) - 2.0;
        const auto t = pearson_scores(scaled, y);
        for (std::size_t c = 0; c < m; ++c) {
            CHECK(s.scores[c] >= 0.0);
            CHECK(s.scores[c] <= 1.0);
            CHECK(std::abs(s.scores[c] - oracle_abs_r(x, c, y)) <= 1e-12);
            CHECK(std::abs(t.scores[c] - s.scores[c]) <= 1e-12);
        }
    }
}

TEST_CASE("logistic regression reaches a stationary point") {
    auto [x, y] = planted(120, 4, 3, 0.8);
    LogRegConfig cfg;
    const auto fit = fit_logistic(x, y, cfg);
    CHECK(fit.gradient_norm <= cfg.tolerance);
    CHECK(fit.iterations < cfg.max_iterations);

    // Independent gradient on population-standardized columns.
    const std::size_t n = x.rows(), m = x.cols();
    std::vector<double> mean(m, 0), sd(m, 0);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < n; ++r) mean[c] += x(r, c) / n;
        for (std::size_t r = 0; r < n; ++r) sd[c] += (x(r, c) - mean[c]) * (x(r, c) - mean[c]) / n;
        sd[c] = std::sqrt(sd[c]);
    }
    std::vector<double> grad(m, 0);
    double grad_b = 0;
    for (std::size_t r = 0; r < n; ++r) {
        double z = fit.intercept;
        for (std::size_t c = 0; c < m; ++c) z += fit.weights[c] * (x(r, c) - mean[c]) / sd[c];
        const double p = 1 / (1 + std::exp(-z));
        grad_b += (p - y[r]) / n;
        for (std::size_t c = 0; c < m; ++c) grad[c] += (p - y[r]) * (x(r, c) - mean[c]) / sd[c] / n;
    }
    CHECK(std::abs(grad_b) < 1e-6);
    for (std::size_t c = 0; c < m; ++c) CHECK(std::abs(grad[c] + cfg.l2_strength * fit.weights[c]) < 1e-6);
}

TEST_CASE("logistic regression importance examples") {
    auto [x, y] = planted(100, 2, 4, 0.05);
    const auto s = lr_importance(x, y);
    CHECK(s.scores[0] > s.scores[1]);
    CHECK(s.evaluator == Evaluator::LogReg);

    Matrix z(x.rows(), 3);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        z(r, 0) = x(r, 0);
        z(r, 1) = 0.0;
        z(r, 2) = x(r, 0);
    }
    const auto d = lr_importance(z, y);
    CHECK(d.scores[1] == 0.0);
    CHECK(d.scores[0] == doctest::Approx(d.scores[2]).epsilon(1e-9));

    LogRegConfig tight;
    tight.max_iterations = 2;
    tight.tolerance = 1e-300;
    try {
        fit_logistic(x, y, tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.residual() > 0);
    }
}

TEST_CASE("random forest importance") {
    auto [x, y] = planted(200, 10, 5, 0.2);
    for (std::size_t r = 0; r < x.rows(); ++r) x(r, 9) = 1.0;
    const auto s = rf_importance(x, y, 50, 7);
    const auto top = top_k(s, 1);
    CHECK(top[0] == 0);
    CHECK(s.scores[9] == 0.0);
    CHECK(std::accumulate(s.scores.begin(), s.scores.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rf_importance(x, y, 50, 7).scores == s.scores);
    CHECK(score_features(Evaluator::Forest, x, y, 7).scores.size() == 10);
}

TEST_CASE("top k") {
    CHECK(top_k(scores_of({0.1, 0.9, 0.5}), 2) == std::vector<std::size_t>{1, 2});
    CHECK(top_k(scores_of({0.5, 0.9, 0.5}), 2) == std::vector<std::size_t>{1, 0});
    auto all = top_k(scores_of({0.3, 0.1, 0.2, 0.3}), 4);
    CHECK(all == std::vector<std::size_t>{0, 3, 2, 1});
    CHECK_THROWS_AS(top_k(scores_of({0.1}), 0), UsageError);
    CHECK_THROWS_AS(top_k(scores_of({0.1}), 2), UsageError);
    CHECK(ranks_of(scores_of({0.1, 0.9, 0.5})) == std::vector<std::size_t>{3, 1, 2});

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s(1 + rng() % 30);
        for (auto& v : s) v = static_cast<double>(rng() % 5);
        const auto sc = scores_of(s);
        for (std::size_t k = 1; k < s.size(); ++k) {
            const auto a = top_k(sc, k), b = top_k(sc, k + 1);
            CHECK(std::equal(a.begin(), a.end(), b.begin()));
        }
        auto perm = top_k(sc, s.size());
        std::sort(perm.begin(), perm.end());
        for (std::size_t i = 0; i < perm.size(); ++i) CHECK(perm[i] == i);
    }
}

TEST_CASE("combined top") {
    std::mt19937_64 rng(2);
    std::vector<double> s(40);
    for (auto& v : s) v = std::uniform_real_distribution<double>()(rng);
    const auto space = space_of(40);
    const auto one = scores_of(s);
    std::array<FeatureScores, 3> same{one, one, one};
    same[1].evaluator = Evaluator::LogReg;
    same[2].evaluator = Evaluator::Forest;
    const auto combined = combined_top(same, space, 16);
    const auto single = top_k(one, 16);
    REQUIRE(combined.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(combined[i].index == single[i]);
        CHECK(combined[i].common);
        CHECK(combined[i].name == space[single[i]].name);
        CHECK(combined[i].points == 3 * (40 - (i + 1)));
    }

    // A feature first for all three evaluators is first overall.
    std::array<FeatureScores, 3> mixed{scores_of(s), scores_of(s), scores_of(s)};
    for (auto& m : mixed) {
        std::shuffle(m.scores.begin(), m.scores.end(), rng);
        m.scores[7] = 2.0;
    }
    const auto c2 = combined_top(mixed, space, 5);
    CHECK(c2[0].index == 7);
    CHECK(c2[0].ranks == std::array<std::size_t, 3>{1, 1, 1});

    std::array<FeatureScores, 3> bad = same;
    bad[2].scores.pop_back();
    CHECK_THROWS_AS(combined_top(bad, space, 5), DataError);
    std::array<FeatureScores, 3> other = same;
    other[0].fingerprint = "aaaa";
    other[1].fingerprint = "bbbb";
    CHECK_THROWS_AS(combined_top(other, space, 5), DataError);

    CHECK(contains(format_combined(combined, same), "*"));
    const auto table = format_scores(one, space);
    CHECK(split_lines(table)[0].rfind("rank", 0) == 0);
}
