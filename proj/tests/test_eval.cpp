#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "healthgrade/eval.hpp"
#include "healthgrade/synth.hpp"
#include "test_util.hpp"

using namespace hg;

namespace {

// Probability that a random positive outscores a random negative, ties counting one half.
double rank_statistic(const std::vector<double>& s, const Labels& y) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return wins / pairs;
}

Labels labels_with(std::size_t ones, std::size_t zeros) {
    Labels y(ones, 1);
    y.insert(y.end(), zeros, 0);
    return y;
}

const synth::PlantedCorpus& small_planted() {
    static const synth::PlantedCorpus pc = [] {
        synth::PlantedConfig cfg;
        cfg.articles = 200;
        return synth::make_planted_corpus(cfg);
    }();
    return pc;
}

const ExperimentData& small_data() {
    static const ExperimentData d = ExperimentData::prepare(small_planted().corpus, PipelineConfig::defaults(),
                                                            Analyzers::defaults(), CategoryLexicon::builtin(),
                                                            RankTable::builtin());
    return d;
}

}  // namespace

TEST_CASE("stratified folds: 70/30 into 10") {
    const auto y = labels_with(30, 70);
    const auto folds = stratified_kfold(y, 10, 1);
    REQUIRE(folds.size() == 10);
    for (const auto& f : folds) {
        std::size_t pos = 0;
        for (auto i : f) pos += y[i];
        CHECK(pos == 3);
        CHECK(f.size() - pos == 7);
    }
}

TEST_CASE("stratified folds: 70/31 gives one fold an extra minority instance") {
    const auto y = labels_with(31, 70);
    const auto folds = stratified_kfold(y, 10, 1);
    std::vector<std::size_t> pos;
    for (const auto& f : folds) {
        std::size_t p = 0;
        for (auto i : f) p += y[i];
        pos.push_back(p);
    }
    CHECK(std::count(pos.begin(), pos.end(), 4) == 1);
    CHECK(std::count(pos.begin(), pos.end(), 3) == 9);
}

TEST_CASE("stratified folds partition the indices") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 9;
        const std::size_t ones = k + rng() % 50, zeros = k + rng() % 50;
        auto y = labels_with(ones, zeros);
        std::shuffle(y.begin(), y.end(), rng);
        const auto folds = stratified_kfold(y, k, rng());
        std::vector<int> seen(y.size(), 0);
        for (const auto& f : folds) {
            std::size_t p = 0;
            for (auto i : f) {
                ++seen[i];
                p += y[i];
            }
            CHECK(std::abs(static_cast<double>(p) - static_cast<double>(ones) / k) <= 1.0);
            CHECK(std::abs(static_cast<double>(f.size() - p) - static_cast<double>(zeros) / k) <= 1.0);
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
        CHECK(stratified_kfold(y, k, 99) == stratified_kfold(y, k, 99));
    }
    CHECK_THROWS_AS(stratified_kfold(labels_with(5, 20), 10, 1), DataError);
    CHECK_THROWS_AS(stratified_kfold(labels_with(5, 5), 1, 1), UsageError);
}

TEST_CASE("weighted metrics worked examples") {
    // |CS| = 60 with P_CS = 48/60 = 0.8; |CNS| = 40 with P_CNS = 28/40 = 0.7.
    ConfusionMatrix cm{48, 12, 28, 12};
    const auto m = weighted_prf(cm);
    CHECK(m.satisfactory.precision == doctest::Approx(0.8));
    CHECK(m.not_satisfactory.precision == doctest::Approx(0.7));
    CHECK(m.wp == doctest::Approx((0.8 * 60 + 0.7 * 40) / 100).epsilon(1e-12));
    CHECK(m.wr == doctest::Approx(0.76).epsilon(1e-12));

    const auto perfect = weighted_prf(ConfusionMatrix{30, 0, 20, 0});
    CHECK(perfect.wp == 1.0);
    CHECK(perfect.wr == 1.0);
    CHECK(perfect.wf == 1.0);

    const auto all_positive = weighted_prf(ConfusionMatrix{10, 5, 0, 0});
    CHECK(all_positive.not_satisfactory.precision == 0.0);
    CHECK(all_positive.not_satisfactory.f1 == 0.0);
    CHECK(std::isfinite(all_positive.wf));

    CHECK_THROWS_AS(weighted_prf(ConfusionMatrix{}), DataError);

    ConfusionMatrix acc;
    acc.add(1, 1);
    acc.add(1, 0);
    acc.add(0, 0);
    acc.add(0, 1);
    acc.add(0, 0);
    CHECK(acc == ConfusionMatrix{1, 1, 2, 1});
    acc += ConfusionMatrix{1, 0, 0, 0};
    CHECK(acc.total() == 6);
}

TEST_CASE("weighted recall is accuracy on random matrices") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        ConfusionMatrix cm{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
        if (cm.total() == 0) continue;
        const auto m = weighted_prf(cm);
        const double n = static_cast<double>(cm.total());
        CHECK(m.wr == (cm.tp + cm.tn) / n);
        // Definitional oracle: per-class values, 0 where a ratio is 0/0, weighted by true class size.
        auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
        const double ps = ratio(cm.tp, cm.tp + cm.fp), rs = ratio(cm.tp, cm.tp + cm.fn);
        const double pn = ratio(cm.tn, cm.tn + cm.fn), rn = ratio(cm.tn, cm.tn + cm.fp);
        const double fs = ratio(2 * ps * rs, ps + rs), fn = ratio(2 * pn * rn, pn + rn);
        const double ws = (cm.tp + cm.fn) / n, wn = (cm.tn + cm.fp) / n;
        CHECK(std::abs(m.wp - (ws * ps + wn * pn)) <= 1e-12);
        CHECK(std::abs(m.wf - (ws * fs + wn * fn)) <= 1e-12);
        CHECK(std::abs(m.wr - (ws * rs + wn * rn)) <= 1e-12);
        for (double v : {m.wp, m.wr, m.wf}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("roc curves") {
    const Labels y{1, 1, 0, 1, 0, 0};
    const std::vector<double> perfect{0.9, 0.8, 0.1, 0.7, 0.2, 0.3};
    const auto r = roc_curve(perfect, y);
    CHECK(r.auc == 1.0);
    CHECK(r.points.front().fpr == 0.0);
    CHECK(r.points.front().tpr == 0.0);
    CHECK(r.points.back().fpr == 1.0);
    CHECK(r.points.back().tpr == 1.0);

    CHECK(roc_curve(std::vector<double>(6, 0.4), y).auc == 0.5);
    CHECK_THROWS_AS(roc_curve(perfect, Labels(6, 1)), DataError);

    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u;
    std::vector<double> s(10000);
    Labels yr(10000);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = u(rng);
        yr[i] = static_cast<int>(rng() % 2);
    }
    CHECK(std::abs(roc_curve(s, yr).auc - 0.5) <= 0.03);

    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng() % 60;
        std::vector<double> sc(n);
        Labels yy(n);
        for (std::size_t i = 0; i < n; ++i) {
            sc[i] = static_cast<double>(rng() % 7);
            yy[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2);
        }
        const auto c = roc_curve(sc, yy);
        CHECK(std::abs(c.auc - rank_statistic(sc, yy)) <= 1e-12);
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
            CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
        }
        std::vector<double> transformed;
        for (double v : sc) transformed.push_back(std::exp(3.0 * v) - 7.0);
        CHECK(roc_curve(transformed, yy).auc == c.auc);
    }
}

TEST_CASE("sweep sizes and labels") {
    CHECK(default_sweep_sizes() == std::vector<std::size_t>{1000, 2000, 3000, 4000, 5000, 10000, kAllFeatures});
    CHECK(size_label(kAllFeatures) == "all");
    CHECK(size_label(3000) == "3000");
}

TEST_CASE("fold pipelines only see fold-train documents") {
    const auto& data = small_data();
    const auto ds = filter_for_criterion(*data.corpus, CriterionId(2));
    const auto y = ds.binary_labels();
    const auto folds = stratified_kfold(y, 5, 3);
    for (const auto& fold : folds) {
        std::set<std::size_t> test(fold.begin(), fold.end());
        std::vector<std::size_t> train_articles;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (!test.contains(i)) train_articles.push_back(ds.instances[i].article_index);
        const auto p = fit_fold_pipeline(data, train_articles);
        CHECK(p.tfidf().n_docs == train_articles.size());
        std::map<std::string, std::size_t> df;
        for (auto a : train_articles) {
            const auto& toks = data.docs[a].clean.body_tokens;
            for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
        }
        for (std::size_t t = 0; t < p.tfidf().size(); ++t) CHECK(p.tfidf().df[t] == df[p.tfidf().terms[t]]);
    }
}

TEST_CASE("experiment grid on a small planted corpus") {
    const auto& data = small_data();
    ExperimentConfig cfg;
    cfg.criterion = CriterionId(1);
    cfg.sizes = {50, kAllFeatures};
    cfg.folds = 5;
    cfg.train.seed = 11;
    const auto a = run_grid(data, cfg);
    const auto b = run_grid(data, cfg);
    REQUIRE(a.size() == 2);
    const auto n = filter_for_criterion(*data.corpus, cfg.criterion).instances.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pooled == b[i].pooled);
        CHECK(a[i].roc.auc == b[i].roc.auc);
        CHECK(a[i].pooled.total() == n);
        CHECK(a[i].fold_confusions.size() == 5);
        ConfusionMatrix sum;
        for (const auto& f : a[i].fold_confusions) sum += f;
        CHECK(sum == a[i].pooled);
        CHECK(a[i].metrics.wf >= 0.0);
        CHECK(a[i].metrics.wf <= 1.0);
        CHECK(a[i].metrics.wf > 0.6);
    }
    CHECK(a[0].features_used == 50);
    CHECK(a[1].features_used > 50);

    const auto single = run_experiment(data, cfg, 50);
    CHECK(single.pooled == a[0].pooled);

    ExperimentConfig smote = cfg;
    smote.balancing = Balancing::Smote;
    smote.sizes = {50};
    smote.train.algorithm = Algorithm::GNB;
    const auto s = run_grid(data, smote);
    CHECK(s[0].pooled.total() == n);

    const auto csv = format_report_csv(a);
    const auto lines = split_lines(csv);
    CHECK(contains(lines[0], "pooled"));
    CHECK(lines[1] == "criterion,selector,classifier,size,balancing,WP,WR,WF,AUC,seconds");
    CHECK(lines[2].rfind("1,CoAE-PC,svm,50,none,", 0) == 0);
    CHECK(lines[3].rfind("1,CoAE-PC,svm,all,none,", 0) == 0);
    CHECK(roc_file_stem(a[0]) == "roc_c1_CoAE-PC_svm_50_none");
    CHECK(split_lines(format_roc_csv(a[0].roc))[0] == "fpr,tpr,threshold");

    ExperimentConfig bad = cfg;
    bad.sizes.clear();
    CHECK_THROWS_AS(run_grid(data, bad), UsageError);
}

TEST_CASE("model bundles") {
    const auto& data = small_data();
    const auto& corpus = *data.corpus;
    std::vector<std::size_t> all(corpus.articles.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto pipeline = fit_fold_pipeline(data, all);
    TrainConfig train;
    train.seed = 5;
    ModelBundle bundle;
    bundle.fingerprint = pipeline.space().fingerprint();
    for (int c : {1, 4})
        bundle.models.push_back(
            train_criterion_model(data, pipeline, CriterionId(c), Evaluator::Pearson, 100, Balancing::None, train));
    CHECK(bundle.models[0].selected.size() == 100);
    const auto back = ModelBundle::from_bytes(bundle.to_bytes());
    CHECK(back.to_bytes() == bundle.to_bytes());
    CHECK(back.models[1].criterion == CriterionId(4));

    // A training article the model places beyond its margin, processed again from the raw
    // text and scored by the reloaded bundle, keeps its training label.
    const auto ds = filter_for_criterion(corpus, CriterionId(1));
    const auto& m = bundle.models[0];
    const auto analyzers = Analyzers::defaults();
    auto row_of = [&](const AnalyzedDocument& doc) {
        std::vector<double> dense(pipeline.space().size(), 0.0);
        pipeline.transform(doc).scatter(dense);
        std::vector<double> row;
        for (auto f : m.selected) row.push_back(dense[f]);
        return row;
    };
    std::size_t checked = 0;
    for (const auto& inst : ds.instances) {
        const int truth = inst.label == Label::Satisfactory ? 1 : 0;
        if ((2 * truth - 1) * m.model.score(row_of(data.docs[inst.article_index])) < 1.0) continue;
        const auto& article = corpus.articles[inst.article_index];
        const auto fresh = analyze(article, preprocess(article, PipelineConfig::defaults()), analyzers);
        CHECK(back.models[0].model.predict(row_of(fresh)) == truth);
        ++checked;
    }
    CHECK(checked > 10);

    ModelBundle wrong = bundle;
    wrong.fingerprint = "different";
    CHECK_THROWS_AS(ModelBundle::from_bytes(wrong.to_bytes()), DataError);
}
