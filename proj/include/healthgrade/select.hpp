#pragma once

// Feature evaluators (Pearson correlation, logistic-regression weights,
// random-forest importance), top-k cuts and a Borda merge of rankings.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "healthgrade/common.hpp"
#include "healthgrade/featurize.hpp"

namespace hg {

enum class Evaluator : std::uint8_t { Pearson, LogReg, Forest };

/// "CoAE-PC", "ClAE-LR", "ClAE-RF".
std::string_view evaluator_tag(Evaluator e);
/// Accepts "pc"/"pearson", "lr", "rf" or the full tags (case-insensitive).
Evaluator parse_evaluator(std::string_view name);

struct FeatureScores {
    Evaluator evaluator = Evaluator::Pearson;
    std::vector<double> scores;
    /// Fingerprint of the feature space the scores refer to ("" = unknown).
    std::string fingerprint;
};

/// |Pearson r| between each column and y; zero-variance columns score 0.
/// OpenMP-parallel over features.
FeatureScores pearson_scores(const Matrix& x, const Labels& y);
/// Serial reference for pearson_scores.
FeatureScores pearson_scores_serial(const Matrix& x, const Labels& y);

struct LogRegConfig {
    double l2_strength = 0.1;
    std::size_t max_iterations = 10'000;
    double tolerance = 1e-8;
};

struct LogRegFit {
    std::vector<double> weights;  // on standardized columns
    double intercept = 0.0;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
};

/// Minimizes mean log-loss + l2/2 |w|^2 (intercept unpenalized) on
/// standardized columns by gradient descent with Armijo backtracking.
/// Throws ConvergenceError when the gradient norm is still above tolerance
/// after max_iterations.
LogRegFit fit_logistic(const Matrix& x, const Labels& y, const LogRegConfig& config = {});

/// |coefficient| of each standardized feature.
FeatureScores lr_importance(const Matrix& x, const Labels& y, const LogRegConfig& config = {});

/// Mean Gini decrease per feature over a 100-tree (by default) forest,
/// normalized to sum 1.
FeatureScores rf_importance(const Matrix& x, const Labels& y, std::size_t n_trees = 100,
                            std::uint64_t seed = 0);

/// Runs one evaluator with its default settings.
FeatureScores score_features(Evaluator e, const Matrix& x, const Labels& y, std::uint64_t seed);

/// Indices of the k largest scores, descending; ties by ascending index.
/// Throws UsageError unless 1 <= k <= |scores|.
std::vector<std::size_t> top_k(const FeatureScores& scores, std::size_t k);

/// 1-based rank of every feature under the top_k order.
std::vector<std::size_t> ranks_of(const FeatureScores& scores);

struct CombinedFeature {
    std::size_t index = 0;
    std::string name;
    Family family = Family::LEX;
    std::size_t points = 0;
    std::array<std::size_t, 3> ranks{};  // per evaluator, in input order
    bool common = false;                 // in every evaluator's top k
};

/// Borda merge: every evaluator awards |space| - rank points; the k
/// features with the most points (ties by ascending index) are returned.
/// Throws DataError when the score sets do not share the feature space.
std::vector<CombinedFeature> combined_top(const std::array<FeatureScores, 3>& scores,
                                          const FeatureSpace& space, std::size_t k = 16);

/// "rank<TAB>index<TAB>family<TAB>name<TAB>score" lines with a header.
std::string format_scores(const FeatureScores& scores, const FeatureSpace& space);
/// Table of combined features; common features are marked with '*'.
std::string format_combined(const std::vector<CombinedFeature>& features,
                            const std::array<FeatureScores, 3>& scores);

}  // namespace hg
