#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "healthgrade/learn.hpp"
#include "test_util.hpp"

using namespace hg;

namespace {

Matrix rows_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
}

double accuracy(const Matrix& x, const Labels& y, const auto& model) {
    std::size_t ok = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) ok += model.predict(x.row(r)) == y[r];
    return static_cast<double>(ok) / static_cast<double>(x.rows());
}

// Two Gaussian blobs in d dimensions, separated along every axis.
std::pair<Matrix, Labels> blobs(std::size_t n, std::size_t d, double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix x(n, d);
    Labels y(n);
    for (std::size_t r = 0; r < n; ++r) {
        y[r] = static_cast<int>(r % 2);
        for (std::size_t c = 0; c < d; ++c) x(r, c) = g(rng) + (y[r] ? gap : -gap);
    }
    return {x, y};
}

std::pair<Matrix, Labels> xor_data() {
    Matrix x = rows_matrix({{1, 1}, {-1, -1}, {1, -1}, {-1, 1}});
    return {x, Labels{1, 1, 0, 0}};
}

TrainConfig config_for(Algorithm a, int degree = 1) {
    TrainConfig c;
    c.algorithm = a;
    c.svm_kernel_degree = degree;
    c.seed = 42;
    return c;
}

}  // namespace

TEST_CASE("algorithm and balancing names") {
    CHECK(parse_algorithm("SVM") == Algorithm::SVM);
    CHECK(parse_algorithm("nb") == Algorithm::GNB);
    CHECK(algorithm_name(Algorithm::ENSEMBLE) == "ensemble");
    CHECK_THROWS_AS(parse_algorithm("knn"), UsageError);
    CHECK(parse_balancing("smote") == Balancing::Smote);
    CHECK(balancing_name(Balancing::Under) == "under");
    CHECK_THROWS_AS(parse_balancing("tomek"), UsageError);
}

TEST_CASE("train config invariants") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.rf_n_trees = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = {};
    c.svm_c = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = {};
    c.svm_kernel_degree = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = {};
    c.smote_k = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("training input checks") {
    const Matrix x = rows_matrix({{1}, {2}, {3}});
    CHECK_THROWS_AS(check_training_input(x, Labels{1, 1, 1}), DataError);
    CHECK_THROWS_AS(check_training_input(x, Labels{0, 1}), DataError);
    CHECK_THROWS_AS(check_training_input(x, Labels{0, 1, 2}), DataError);
    CHECK_NOTHROW(check_training_input(x, Labels{0, 1, 1}));
}

TEST_CASE("gaussian naive bayes closed form") {
    const Matrix x = rows_matrix({{-2}, {-1}, {1}, {2}});
    const Labels y{0, 0, 1, 1};
    const auto nb = GaussianNB::fit(x, y);
    CHECK(nb.mean[0][0] == doctest::Approx(-1.5));
    CHECK(nb.var[1][0] == doctest::Approx(0.25));
    const std::vector<double> zero{0.0};
    CHECK(nb.posterior(zero) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(accuracy(x, y, nb) == 1.0);
    for (double v : {-3.0, -0.3, 0.1, 5.0}) {
        const std::vector<double> row{v};
        const auto jll = nb.joint_log_likelihood(row);
        const double p1 = nb.posterior(row);
        const double p0 = 1.0 / (1.0 + std::exp(jll[1] - jll[0]));
        CHECK(std::abs(p0 + p1 - 1.0) <= 1e-12);
        CHECK(nb.predict(row) == (v > 0));
    }

    const Matrix unbalanced = rows_matrix({{0}, {1}, {2}, {3}});
    const auto nb3 = GaussianNB::fit(unbalanced, Labels{1, 1, 1, 0});
    CHECK(nb3.log_prior[1] - nb3.log_prior[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    const Matrix constant = rows_matrix({{5, -1}, {5, -2}, {5, 1}, {5, 2}});
    const auto nbc = GaussianNB::fit(constant, y);
    CHECK(nbc.var[0][0] > 0.0);
    const std::vector<double> probe{5.0, 1.5};
    CHECK(std::isfinite(nbc.posterior(probe)));
    CHECK(nbc.predict(probe) == 1);
}

TEST_CASE("decision trees and forests") {
    auto [x, y] = blobs(300, 6, 0.8, 1);
    set_worker_count(4);
    const auto f4 = RandomForest::fit(x, y, 30, MaxFeaturesRule::Sqrt, 9);
    set_worker_count(1);
    const auto f1 = RandomForest::fit(x, y, 30, MaxFeaturesRule::Sqrt, 9);
    set_worker_count(0);
    const auto fs = RandomForest::fit_serial(x, y, 30, MaxFeaturesRule::Sqrt, 9);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        CHECK(f4.score(x.row(r)) == f1.score(x.row(r)));
        CHECK(fs.score(x.row(r)) == f1.score(x.row(r)));
        const double votes = f1.score(x.row(r)) * 30.0;
        CHECK(votes == doctest::Approx(std::round(votes)));
    }
    CHECK(f4.importances() == fs.importances());
    CHECK(accuracy(x, y, f1) >= 0.95);

    Matrix sep(40, 1);
    Labels ys(40);
    for (std::size_t r = 0; r < 40; ++r) {
        ys[r] = r < 20 ? 0 : 1;
        sep(r, 0) = static_cast<double>(r) + (ys[r] ? 10.0 : 0.0);
    }
    const auto fsep = RandomForest::fit(sep, ys, 100, MaxFeaturesRule::Sqrt, 3);
    const std::vector<double> far{50.0};
    CHECK(fsep.score(far) == 1.0);

    CHECK(max_features_for(MaxFeaturesRule::Sqrt, 100) == 10);
    CHECK(max_features_for(MaxFeaturesRule::Log2, 1024) == 10);
    CHECK(max_features_for(MaxFeaturesRule::All, 7) == 7);
    CHECK(max_features_for(MaxFeaturesRule::Sqrt, 1) == 1);
}

TEST_CASE("forest vote tie goes to NotSatisfactory") {
    RandomForest f;
    DecisionTree yes, no;
    yes.nodes.push_back({-1, 0, -1, -1, 1});
    no.nodes.push_back({-1, 0, -1, -1, 0});
    f.trees_ = {yes, no};
    const std::vector<double> row{0.0};
    CHECK(f.score(row) == 0.5);
    CHECK(f.predict(row) == 0);
}

TEST_CASE("kernels") {
    const std::vector<double> u{1, 2}, v{3, -1};
    CHECK(poly_kernel(u, v, 1) == 1.0);
    CHECK(poly_kernel(u, v, 3) == 1.0);
    CHECK(poly_kernel(u, u, 2) == 25.0);
    auto [x, y] = blobs(40, 5, 1.0, 2);
    (void)y;
    const auto k = kernel_matrix(x, 2);
    CHECK(k.data() == kernel_matrix_serial(x, 2).data());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) CHECK(k(i, j) == k(j, i));
}

TEST_CASE("svm on two points") {
    const Matrix x = rows_matrix({{0, 0}, {1, 1}});
    const Labels y{0, 1};
    const auto m = SvmModel::fit(x, y, config_for(Algorithm::SVM));
    CHECK(m.predict(x.row(0)) == 0);
    CHECK(m.predict(x.row(1)) == 1);
    const std::vector<double> mid{0.5, 0.5};
    CHECK(std::abs(m.decision(mid)) < 1e-9);
}

TEST_CASE("svm dual feasibility and KKT on separable data") {
    auto [x, y] = blobs(200, 10, 1.5, 3);
    const auto cfg = config_for(Algorithm::SVM);
    const auto m = SvmModel::fit(x, y, cfg);
    CHECK(accuracy(x, y, m) == 1.0);
    double balance = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = m.solution.alpha[i];
        CHECK(a >= 0.0);
        CHECK(a <= cfg.svm_c + 1e-12);
        balance += a * (y[i] ? 1.0 : -1.0);
    }
    CHECK(std::abs(balance) < 1e-9);

    // KKT checked directly on the scaled training data.
    const auto z = m.scaler.apply(x);
    const auto k = kernel_matrix(z, 1);
    CHECK(max_kkt_violation(k, y, m.solution, cfg.svm_c) < 1e-3);
}

TEST_CASE("svm xor needs degree 2") {
    auto [x, y] = xor_data();
    const auto lin = SvmModel::fit(x, y, config_for(Algorithm::SVM, 1));
    const auto quad = SvmModel::fit(x, y, config_for(Algorithm::SVM, 2));
    CHECK(accuracy(x, y, lin) <= 0.75);
    CHECK(accuracy(x, y, quad) == 1.0);
}

TEST_CASE("smo update cap raises ConvergenceError") {
    auto [x, y] = blobs(100, 3, 0.1, 4);
    const auto k = kernel_matrix(x, 1);
    try {
        solve_smo(k, y, 1.0, 1e-3, 3);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 3);
        CHECK(e.residual() > 1e-3);
    }
}

TEST_CASE("ensemble votes") {
    auto [x, y] = blobs(120, 4, 1.2, 5);
    const auto model = train_model(x, y, config_for(Algorithm::ENSEMBLE), "fp");
    const auto& e = std::get<EnsembleModel>(model.params());
    std::array<double, 3> member_acc{};
    std::size_t ok = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto v = e.votes(x.row(r));
        CHECK(v[0] == e.gnb.predict(x.row(r)));
        CHECK(v[1] == e.rf.predict(x.row(r)));
        CHECK(v[2] == e.svm.predict(x.row(r)));
        const int majority = v[0] + v[1] + v[2] >= 2 ? 1 : 0;
        CHECK(e.predict(x.row(r)) == majority);
        for (int i = 0; i < 3; ++i) member_acc[i] += v[i] == y[r];
        ok += majority == y[r];
        const double s = e.score(x.row(r));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    const double worst = *std::min_element(member_acc.begin(), member_acc.end());
    CHECK(static_cast<double>(ok) >= worst);
}

TEST_CASE("model persistence and compatibility") {
    auto [x, y] = blobs(80, 4, 1.0, 6);
    for (Algorithm a : {Algorithm::GNB, Algorithm::RF, Algorithm::SVM, Algorithm::ENSEMBLE}) {
        CAPTURE(algorithm_name(a));
        auto cfg = config_for(a, 2);
        cfg.rf_n_trees = 15;
        const auto m = train_model(x, y, cfg, "abc123");
        CHECK(m.algorithm() == a);
        CHECK(m.feature_count() == 4);
        const auto back = Model::from_bytes(m.to_bytes());
        CHECK(back.to_bytes() == m.to_bytes());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            CHECK(back.score(x.row(r)) == m.score(x.row(r)));
            CHECK(back.predict(x.row(r)) == m.predict(x.row(r)));
        }
        CHECK_NOTHROW(m.ensure_compatible("abc123"));
        CHECK_THROWS_AS(m.ensure_compatible("other"), DataError);
        const std::vector<double> narrow{1.0};
        CHECK_THROWS_AS(m.score(narrow), DataError);
    }
    CHECK_THROWS_AS(Model::from_bytes("HGBUNDLE........"), DataError);
}

TEST_CASE("under and over sampling") {
    Matrix x(100, 2);
    Labels y(100);
    for (std::size_t r = 0; r < 100; ++r) {
        x(r, 0) = static_cast<double>(r);
        x(r, 1) = -static_cast<double>(r);
        y[r] = r < 90 ? 0 : 1;
    }
    const auto under = resample(x, y, Balancing::Under, 1);
    CHECK(under.x.rows() == 20);
    CHECK(std::count(under.y.begin(), under.y.end(), 1) == 10);
    double prev = -1;
    for (std::size_t r = 0; r < under.x.rows(); ++r) {
        const auto orig = static_cast<std::size_t>(under.x(r, 0));
        CHECK(under.y[r] == y[orig]);
        CHECK(under.x(r, 0) > prev);
        prev = under.x(r, 0);
    }

    const auto over = resample(x, y, Balancing::Over, 1);
    CHECK(over.x.rows() == 180);
    CHECK(std::count(over.y.begin(), over.y.end(), 1) == 90);
    for (std::size_t r = 0; r < 100; ++r) {
        CHECK(over.x(r, 0) == x(r, 0));
        CHECK(over.y[r] == y[r]);
    }
    for (std::size_t r = 100; r < 180; ++r) CHECK(over.x(r, 0) >= 90);

    const auto none = resample(x, y, Balancing::None, 1);
    CHECK(none.x.data() == x.data());
    CHECK(resample(x, y, Balancing::Under, 1).x.data() == under.x.data());
}

TEST_CASE("smote geometry") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Matrix x(100, 3);
    Labels y(100);
    for (std::size_t r = 0; r < 100; ++r) {
        y[r] = r % 10 == 0 ? 1 : 0;
        for (std::size_t c = 0; c < 3; ++c) x(r, c) = g(rng);
    }
    const auto s = resample(x, y, Balancing::Smote, 3, 5);
    CHECK(s.x.rows() == 180);
    CHECK(std::count(s.y.begin(), s.y.end(), 1) == 90);
    CHECK(s.synthetic_from.size() == 80);
    for (std::size_t i = 0; i < 80; ++i) {
        const auto [base, nb] = s.synthetic_from[i];
        CHECK(y[base] == 1);
        CHECK(y[nb] == 1);
        CHECK(base != nb);
        const auto row = s.x.row(100 + i);
        double u = -1;
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = x(nb, c) - x(base, c);
            if (std::abs(d) > 1e-12) {
                u = (row[c] - x(base, c)) / d;
                break;
            }
        }
        CHECK(u >= -1e-9);
        CHECK(u <= 1 + 1e-9);
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(x(base, c) + u * (x(nb, c) - x(base, c)) - row[c]) <= 1e-9);
    }

    // Minority of exactly three: each synthetic point uses one of the other two.
    Matrix small(8, 1);
    Labels ys{0, 0, 0, 0, 0, 1, 1, 1};
    for (std::size_t r = 0; r < 8; ++r) small(r, 0) = static_cast<double>(r);
    const auto t = resample(small, ys, Balancing::Smote, 1, 5);
    CHECK(t.synthetic_from.size() == 2);
    for (const auto& [b, n] : t.synthetic_from) {
        CHECK(b >= 5);
        CHECK(n >= 5);
        CHECK(b != n);
    }

    Labels lonely{0, 0, 0, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS(resample(small, lonely, Balancing::Smote, 1, 5), DataError);
}
