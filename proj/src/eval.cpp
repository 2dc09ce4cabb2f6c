#include "healthgrade/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "healthgrade/binio.hpp"

namespace hg {

std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw UsageError("cross-validation needs at least 2 folds");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw DataError("labels must be 0 or 1");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < k)
            throw DataError("class " + std::string(c == 1 ? "Satisfactory" : "NotSatisfactory") + " has " +
                            std::to_string(by_class[c].size()) + " instances, fewer than " + std::to_string(k) +
                            " folds");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (auto i : members) folds[next++ % k].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth == 1) (predicted == 1 ? tp : fn) += 1;
    else (predicted == 1 ? fp : tn) += 1;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t hit, std::size_t predicted, std::size_t actual) {
    ClassMetrics m;
    m.precision = ratio(hit, predicted);
    m.recall = ratio(hit, actual);
    const double s = m.precision + m.recall;
    m.f1 = s > 0 ? 2.0 * m.precision * m.recall / s : 0.0;
    return m;
}

}  // namespace

WeightedMetrics weighted_prf(const ConfusionMatrix& cm) {
    const std::size_t n = cm.total();
    if (n == 0) throw DataError("weighted metrics of an empty confusion matrix");
    WeightedMetrics w;
    w.satisfactory = class_metrics(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn);
    w.not_satisfactory = class_metrics(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp);
    const double ws = static_cast<double>(cm.tp + cm.fn), wn = static_cast<double>(cm.tn + cm.fp);
    const double total = static_cast<double>(n);
    w.wp = (w.satisfactory.precision * ws + w.not_satisfactory.precision * wn) / total;
    // recall_c * |c| is the count of correct predictions in c, so WR reduces to accuracy.
    w.wr = static_cast<double>(cm.tp + cm.tn) / total;
    w.wf = (w.satisfactory.f1 * ws + w.not_satisfactory.f1 * wn) / total;
    return w;
}

RocCurve roc_curve(std::span<const double> scores, const Labels& y) {
    if (scores.size() != y.size()) throw DataError("roc_curve: scores and labels differ in length");
    std::size_t pos = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(scores[i])) throw DataError("roc_curve: non-finite score");
        if (y[i] != 0 && y[i] != 1) throw DataError("labels must be 0 or 1");
        pos += static_cast<std::size_t>(y[i]);
    }
    const std::size_t neg = y.size() - pos;
    if (pos == 0 || neg == 0) throw DataError("roc_curve needs both classes");

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    double area2 = 0.0;  // twice the area, in tp*fp units
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        const std::size_t tp0 = tp, fp0 = fp;
        while (i < order.size() && scores[order[i]] == s) {
            (y[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
        roc.points.push_back({ratio(fp, neg), ratio(tp, pos), s});
    }
    roc.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    return roc;
}

std::vector<std::size_t> default_sweep_sizes() { return {1000, 2000, 3000, 4000, 5000, 10000, kAllFeatures}; }

ExperimentData ExperimentData::prepare(const Corpus& corpus, const PipelineConfig& pipeline,
                                       const Analyzers& analyzers, CategoryLexicon lexicon, RankTable ranks,
                                       FeaturizerConfig featurizer) {
    ExperimentData d;
    d.corpus = &corpus;
    const auto clean = preprocess_all(corpus.articles, pipeline);
    d.docs = analyze_all(corpus.articles, clean, analyzers);
    d.lexicon = std::move(lexicon);
    d.ranks = std::move(ranks);
    d.tagset = analyzers.tagger->tagset();
    d.featurizer = featurizer;
    return d;
}

namespace {

std::vector<AnalyzedDocument> gather(const ExperimentData& data, std::span<const std::size_t> article_indices) {
    std::vector<AnalyzedDocument> out;
    out.reserve(article_indices.size());
    for (auto i : article_indices) out.push_back(data.docs.at(i));
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> selection(const FeatureScores* scores, std::size_t size, std::size_t m) {
    std::vector<std::size_t> sel;
    if (size == kAllFeatures || size >= m) {
        sel.resize(m);
        std::iota(sel.begin(), sel.end(), 0);
        return sel;
    }
    sel = top_k(*scores, size);
    std::sort(sel.begin(), sel.end());
    return sel;
}

}  // namespace

FeaturePipeline fit_fold_pipeline(const ExperimentData& data, std::span<const std::size_t> article_indices) {
    const auto docs = gather(data, article_indices);
    return FeaturePipeline::fit(docs, data.lexicon, data.ranks, data.tagset, data.featurizer);
}

std::vector<EvaluationReport> run_grid(const ExperimentData& data, const ExperimentConfig& config) {
    if (!data.corpus) throw UsageError("experiment data not prepared");
    if (config.sizes.empty()) throw UsageError("no feature sizes requested");
    config.train.validate();
    const auto dataset = filter_for_criterion(*data.corpus, config.criterion);
    const Labels y = dataset.binary_labels();
    const auto folds = stratified_kfold(y, config.folds, config.train.seed);
    const std::size_t n = y.size();

    std::vector<EvaluationReport> reports(config.sizes.size());
    std::vector<std::vector<double>> scores(config.sizes.size(), std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < reports.size(); ++s) {
        auto& r = reports[s];
        r.criterion = config.criterion;
        r.selector = config.selector;
        r.classifier = config.train.algorithm;
        r.size = config.sizes[s];
        r.features_used = std::numeric_limits<std::size_t>::max();
        r.balancing = config.balancing;
    }

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<char> in_test(n, 0);
        for (auto i : folds[f]) in_test[i] = 1;
        std::vector<std::size_t> train_articles, test_articles;
        Labels y_train;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_test[i]) {
                test_articles.push_back(dataset.instances[i].article_index);
            } else {
                train_articles.push_back(dataset.instances[i].article_index);
                y_train.push_back(y[i]);
            }
        }
        const auto train_docs = gather(data, train_articles);
        const auto test_docs = gather(data, test_articles);
        const auto pipeline = fit_fold_pipeline(data, train_articles);
        const Matrix x_train = pipeline.transform_dense(train_docs);
        const Matrix x_test = pipeline.transform_dense(test_docs);
        const std::size_t m = x_train.cols();

        const bool needs_scores = std::any_of(config.sizes.begin(), config.sizes.end(),
                                              [&](std::size_t s) { return s != kAllFeatures && s < m; });
        FeatureScores fs;
        if (needs_scores) fs = score_features(config.selector, x_train, y_train, config.train.seed);
        const double shared = seconds_since(t0);

        for (std::size_t s = 0; s < reports.size(); ++s) {
            const auto t1 = std::chrono::steady_clock::now();
            auto& report = reports[s];
            const auto sel = selection(needs_scores ? &fs : nullptr, config.sizes[s], m);
            report.features_used = std::min(report.features_used, sel.size());
            const Matrix xtr = x_train.select_cols(sel);
            const Matrix xte = x_test.select_cols(sel);
            const auto balanced = resample(xtr, y_train, config.balancing, config.train.seed + f, config.train.smote_k);
            const Model model = train_model(balanced.x, balanced.y, config.train, pipeline.space().fingerprint());
            ConfusionMatrix cm;
            for (std::size_t t = 0; t < folds[f].size(); ++t) {
                const std::size_t i = folds[f][t];
                const auto row = xte.row(t);
                scores[s][i] = model.score(row);
                cm.add(y[i], model.predict(row));
            }
            report.fold_confusions.push_back(cm);
            report.pooled += cm;
            report.seconds += shared + seconds_since(t1);
        }
    }
    for (std::size_t s = 0; s < reports.size(); ++s) {
        reports[s].metrics = weighted_prf(reports[s].pooled);
        reports[s].roc = roc_curve(scores[s], y);
    }
    return reports;
}

EvaluationReport run_experiment(const ExperimentData& data, const ExperimentConfig& config, std::size_t size) {
    ExperimentConfig single = config;
    single.sizes = {size};
    return run_grid(data, single).front();
}

std::string size_label(std::size_t size) { return size == kAllFeatures ? "all" : std::to_string(size); }

std::string format_report_csv(const std::vector<EvaluationReport>& reports) {
    std::ostringstream os;
    os << "# metrics from one confusion matrix pooled over all cross-validation folds\n";
    os << "criterion,selector,classifier,size,balancing,WP,WR,WF,AUC,seconds\n";
    char buf[160];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f,%.2f", r.metrics.wp, r.metrics.wr, r.metrics.wf,
                      r.roc.auc, r.seconds);
        os << r.criterion.value() << ',' << evaluator_tag(r.selector) << ',' << algorithm_name(r.classifier) << ','
           << size_label(r.size) << ',' << balancing_name(r.balancing) << ',' << buf << '\n';
    }
    return os.str();
}

std::string format_roc_csv(const RocCurve& roc) {
    std::ostringstream os;
    os.precision(10);
    os << "fpr,tpr,threshold\n";
    for (const auto& p : roc.points) os << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
    return os.str();
}

std::string roc_file_stem(const EvaluationReport& r) {
    return "roc_c" + std::to_string(r.criterion.value()) + "_" + std::string(evaluator_tag(r.selector)) + "_" +
           std::string(algorithm_name(r.classifier)) + "_" + size_label(r.size) + "_" +
           std::string(balancing_name(r.balancing));
}

ExplainReport explain_criterion(const ExperimentData& data, CriterionId criterion, std::uint64_t seed,
                                std::size_t k) {
    if (!data.corpus) throw UsageError("experiment data not prepared");
    const auto dataset = filter_for_criterion(*data.corpus, criterion);
    const Labels y = dataset.binary_labels();
    std::vector<std::size_t> articles;
    for (const auto& inst : dataset.instances) articles.push_back(inst.article_index);
    const auto docs = gather(data, articles);
    const auto pipeline = FeaturePipeline::fit(docs, data.lexicon, data.ranks, data.tagset, data.featurizer);
    const Matrix x = pipeline.transform_dense(docs);

    ExplainReport report;
    report.criterion = criterion;
    report.space = pipeline.space();
    report.scores = {pearson_scores(x, y), lr_importance(x, y), rf_importance(x, y, 100, seed)};
    for (auto& s : report.scores) s.fingerprint = report.space.fingerprint();
    report.top = combined_top(report.scores, report.space, std::min(k, report.space.size()));
    return report;
}

namespace {
constexpr std::string_view kBundleMagic = "HGBUNDLE";
}

std::string ModelBundle::to_bytes() const {
    binio::Writer w;
    w.magic(kBundleMagic, kFormatVersion);
    w.str(fingerprint);
    w.u64(models.size());
    for (const auto& m : models) {
        w.u32(static_cast<std::uint32_t>(m.criterion.value()));
        w.vec(m.selected);
        w.str(m.model.to_bytes());
    }
    return w.bytes();
}

ModelBundle ModelBundle::from_bytes(std::string bytes) {
    binio::Reader r(std::move(bytes));
    const auto version = r.magic(kBundleMagic);
    if (version != kFormatVersion) throw DataError("unsupported model bundle version " + std::to_string(version));
    ModelBundle b;
    b.fingerprint = r.str();
    const auto count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto c = static_cast<int>(r.u32());
        if (c < 1 || c > kCriterionCount) throw DataError("model bundle: bad criterion id");
        CriterionModel m{CriterionId(c), r.vec<std::uint32_t>(), Model::from_bytes(r.str())};
        m.model.ensure_compatible(b.fingerprint);
        if (m.selected.size() != m.model.feature_count())
            throw DataError("model bundle: selection does not match the model width");
        b.models.push_back(std::move(m));
    }
    if (!r.at_end()) throw DataError("model bundle: trailing bytes");
    return b;
}

void ModelBundle::save(const std::string& path) const { write_file(path, to_bytes()); }

ModelBundle ModelBundle::load(const std::string& path) { return from_bytes(read_file(path)); }

CriterionModel train_criterion_model(const ExperimentData& data, const FeaturePipeline& pipeline,
                                     CriterionId criterion, Evaluator selector, std::size_t size,
                                     Balancing balancing, const TrainConfig& train) {
    if (!data.corpus) throw UsageError("experiment data not prepared");
    const auto dataset = filter_for_criterion(*data.corpus, criterion);
    const Labels y = dataset.binary_labels();
    std::vector<std::size_t> articles;
    for (const auto& inst : dataset.instances) articles.push_back(inst.article_index);
    const auto docs = gather(data, articles);
    const Matrix x = pipeline.transform_dense(docs);
    const std::size_t m = x.cols();
    FeatureScores fs;
    const bool needs_scores = size != kAllFeatures && size < m;
    if (needs_scores) fs = score_features(selector, x, y, train.seed);
    const auto sel = selection(needs_scores ? &fs : nullptr, size, m);
    const auto balanced = resample(x.select_cols(sel), y, balancing, train.seed, train.smote_k);
    CriterionModel out{criterion, {}, train_model(balanced.x, balanced.y, train, pipeline.space().fingerprint())};
    for (auto i : sel) out.selected.push_back(static_cast<std::uint32_t>(i));
    return out;
}

}  // namespace hg
