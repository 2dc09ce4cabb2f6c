#pragma once

// Stratified cross-validation, weighted metrics, ROC analysis and the
// per-criterion experiment grid.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "healthgrade/common.hpp"
#include "healthgrade/corpus.hpp"
#include "healthgrade/featurize.hpp"
#include "healthgrade/learn.hpp"
#include "healthgrade/select.hpp"

namespace hg {

/// k disjoint folds covering every index; each class is shuffled with the
/// seed and dealt round-robin, so per-class fold counts differ by at most 1.
/// Throws DataError when a class has fewer than k instances.
std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed);

/// Satisfactory is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    void add(int truth, int predicted);
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
    double precision = 0, recall = 0, f1 = 0;
};

struct WeightedMetrics {
    double wp = 0, wr = 0, wf = 0;
    ClassMetrics satisfactory, not_satisfactory;
};

/// Per-class precision/recall/F1 (0 where undefined) averaged with weights
/// equal to the true class sizes. Throws DataError on an empty matrix.
WeightedMetrics weighted_prf(const ConfusionMatrix& cm);

struct RocPoint {
    double fpr = 0, tpr = 0;
    double threshold = 0;  // predict positive when score >= threshold
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1)
    double auc = 0;
};

/// Threshold sweep over distinct scores (ties move together); AUC by the
/// trapezoid rule. Throws DataError for non-finite scores or a single class.
RocCurve roc_curve(std::span<const double> scores, const Labels& y);

/// Sentinel feature size meaning "every feature".
inline constexpr std::size_t kAllFeatures = 0;

/// Default sweep: 1000..5000, 10000, all.
std::vector<std::size_t> default_sweep_sizes();

/// Corpus-level work shared by every experiment: preprocessing and
/// analysis run once, independent of any fold.
struct ExperimentData {
    const Corpus* corpus = nullptr;
    std::vector<AnalyzedDocument> docs;  // parallel to corpus->articles
    CategoryLexicon lexicon;
    RankTable ranks;
    std::vector<std::string> tagset;
    FeaturizerConfig featurizer;

    static ExperimentData prepare(const Corpus& corpus, const PipelineConfig& pipeline, const Analyzers& analyzers,
                                  CategoryLexicon lexicon, RankTable ranks, FeaturizerConfig featurizer = {});
};

struct ExperimentConfig {
    CriterionId criterion{1};
    Evaluator selector = Evaluator::Pearson;
    TrainConfig train;  // classifier, hyper-parameters and seed
    std::vector<std::size_t> sizes{kAllFeatures};
    Balancing balancing = Balancing::None;
    std::size_t folds = 10;
};

struct EvaluationReport {
    CriterionId criterion{1};
    Evaluator selector = Evaluator::Pearson;
    Algorithm classifier = Algorithm::SVM;
    std::size_t size = kAllFeatures;  // as requested
    std::size_t features_used = 0;    // smallest per-fold effective size
    Balancing balancing = Balancing::None;
    std::vector<ConfusionMatrix> fold_confusions;
    ConfusionMatrix pooled;
    WeightedMetrics metrics;
    RocCurve roc;
    double seconds = 0;
};

/// Feature pipeline fitted on the given documents only.
FeaturePipeline fit_fold_pipeline(const ExperimentData& data, std::span<const std::size_t> article_indices);

/// Cross-validates one (criterion, selector, classifier, balancing) cell for
/// every requested size. Per fold the feature pipeline and selector are fit
/// on the training split, the training split is rebalanced, a model is
/// trained and the test split is scored. Confusions are pooled across folds.
/// Reports come back in the order of `config.sizes`.
std::vector<EvaluationReport> run_grid(const ExperimentData& data, const ExperimentConfig& config);

/// run_grid for a single size.
EvaluationReport run_experiment(const ExperimentData& data, const ExperimentConfig& config, std::size_t size);

/// Feature size label: the number, or "all".
std::string size_label(std::size_t size);

/// "criterion,selector,classifier,size,balancing,WP,WR,WF,AUC,seconds"
/// preceded by a comment line describing the aggregation.
std::string format_report_csv(const std::vector<EvaluationReport>& reports);
/// "fpr,tpr,threshold" lines.
std::string format_roc_csv(const RocCurve& roc);
/// File stem for a report's ROC points, e.g. "roc_c1_CoAE-PC_svm_1000_none".
std::string roc_file_stem(const EvaluationReport& report);

struct ExplainReport {
    CriterionId criterion{1};
    FeatureSpace space;
    std::array<FeatureScores, 3> scores;
    std::vector<CombinedFeature> top;
};

/// Fits the pipeline on all labelled instances of the criterion, runs the
/// three evaluators and merges their rankings.
ExplainReport explain_criterion(const ExperimentData& data, CriterionId criterion, std::uint64_t seed,
                                std::size_t k = 16);

/// Model trained on a fixed feature pipeline, restricted to a selected
/// subset of its columns.
struct CriterionModel {
    CriterionId criterion{1};
    std::vector<std::uint32_t> selected;
    Model model;
};

struct ModelBundle {
    static constexpr std::uint32_t kFormatVersion = 1;

    std::string fingerprint;  // feature space of the pipeline
    std::vector<CriterionModel> models;

    std::string to_bytes() const;
    static ModelBundle from_bytes(std::string bytes);
    void save(const std::string& path) const;
    static ModelBundle load(const std::string& path);
};

/// Trains a criterion model on every labelled instance, featurized by
/// `pipeline`, using the top `size` features of `selector`.
CriterionModel train_criterion_model(const ExperimentData& data, const FeaturePipeline& pipeline,
                                     CriterionId criterion, Evaluator selector, std::size_t size,
                                     Balancing balancing, const TrainConfig& train);

}  // namespace hg
