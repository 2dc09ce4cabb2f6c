#pragma once

// Binary classifiers trained from scratch and class-rebalancing transforms.
// Labels: 1 = Satisfactory (positive), 0 = NotSatisfactory.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "healthgrade/common.hpp"

namespace hg {

enum class Algorithm : std::uint8_t { GNB, RF, SVM, ENSEMBLE };

std::string_view algorithm_name(Algorithm a);
/// Accepts "gnb"/"nb", "rf", "svm", "ensemble" (case-insensitive).
Algorithm parse_algorithm(std::string_view name);

enum class MaxFeaturesRule : std::uint8_t { Sqrt, Log2, All };

struct TrainConfig {
    Algorithm algorithm = Algorithm::SVM;
    std::size_t rf_n_trees = 100;
    MaxFeaturesRule rf_max_features = MaxFeaturesRule::Sqrt;
    double svm_c = 1.0;
    int svm_kernel_degree = 1;
    double svm_tol = 1e-3;
    std::size_t svm_max_updates = 1'000'000;
    std::size_t smote_k = 5;
    std::uint64_t seed = 0;

    /// Throws UsageError when an invariant is violated.
    void validate() const;
};

/// Per-column z-scoring; zero-variance columns are centred only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
    std::vector<double> apply(std::span<const double> row) const;
};

/// Throws DataError unless y is 0/1 with both classes present and sized to x.
void check_training_input(const Matrix& x, const Labels& y);

// ------------------------------------------------------------ Gaussian NB

class GaussianNB {
public:
    static GaussianNB fit(const Matrix& x, const Labels& y);

    /// log P(c) + sum log N(x_f; mean_cf, var_cf) for c = 0, 1.
    std::array<double, 2> joint_log_likelihood(std::span<const double> row) const;
    /// Posterior probability of Satisfactory.
    double posterior(std::span<const double> row) const;
    int predict(std::span<const double> row) const { return posterior(row) > 0.5 ? 1 : 0; }

    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> mean;
    std::array<std::vector<double>, 2> var;
};

// ---------------------------------------------------------- random forest

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // left when x <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t label = 0;     // leaf prediction
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int predict(std::span<const double> row) const;
};

class RandomForest {
public:
    /// Bootstrap + random-subspace Gini trees, tree t seeded with seed + t.
    /// Trees are built in parallel; the result does not depend on the
    /// thread count.
    static RandomForest fit(const Matrix& x, const Labels& y, std::size_t n_trees,
                            MaxFeaturesRule rule, std::uint64_t seed);
    /// Serial reference for fit.
    static RandomForest fit_serial(const Matrix& x, const Labels& y, std::size_t n_trees,
                                   MaxFeaturesRule rule, std::uint64_t seed);

    /// Fraction of trees voting Satisfactory.
    double score(std::span<const double> row) const;
    /// Satisfactory iff score > 0.5 (an exact tie goes to NotSatisfactory).
    int predict(std::span<const double> row) const { return score(row) > 0.5 ? 1 : 0; }

    /// Mean decrease in Gini impurity per feature, normalized to sum 1
    /// (all zeros when no split was made).
    const std::vector<double>& importances() const noexcept { return importances_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

    std::vector<DecisionTree> trees_;
    std::vector<double> importances_;
};

/// Candidate features per node for a given rule and feature count (>= 1).
std::size_t max_features_for(MaxFeaturesRule rule, std::size_t n_features);

// -------------------------------------------------------------------- SVM

/// (u . v)^degree
double poly_kernel(std::span<const double> u, std::span<const double> v, int degree);

/// Full kernel matrix, OpenMP-parallel over rows.
Matrix kernel_matrix(const Matrix& x, int degree);
/// Serial reference for kernel_matrix.
Matrix kernel_matrix_serial(const Matrix& x, int degree);

struct SmoSolution {
    std::vector<double> alpha;  // one per training instance
    double bias = 0.0;
    std::size_t updates = 0;
    double gap = 0.0;           // final maximal KKT pair violation
};

/// SMO on the soft-margin dual with box 0 <= alpha <= c over a precomputed
/// kernel. `y` in {0,1} is mapped to {-1,+1}. Stops when the maximal
/// violating pair gap drops below `tol`; throws ConvergenceError after
/// `max_updates` pair updates.
SmoSolution solve_smo(const Matrix& kernel, const Labels& y, double c, double tol,
                      std::size_t max_updates);

/// Largest KKT violation of a dual solution, checked from alpha, y and K:
/// alpha = 0 needs y f >= 1, alpha = C needs y f <= 1, otherwise y f = 1.
double max_kkt_violation(const Matrix& kernel, const Labels& y, const SmoSolution& sol, double c);

class SvmModel {
public:
    static SvmModel fit(const Matrix& x, const Labels& y, const TrainConfig& config);

    /// sum alpha_i y_i K(x_i, x) + b, with x z-scored and divided by sqrt(m).
    double decision(std::span<const double> row) const;
    int predict(std::span<const double> row) const { return decision(row) > 0.0 ? 1 : 0; }

    Standardizer scaler;
    int degree = 1;
    Matrix support;               // scaled support vectors
    std::vector<double> coef;     // alpha_i * y_i
    double bias = 0.0;
    SmoSolution solution;         // full training solution (not persisted)
};

// --------------------------------------------------------------- ensemble

struct EnsembleModel {
    GaussianNB gnb;
    RandomForest rf;
    SvmModel svm;

    /// Member votes in the order gnb, rf, svm.
    std::array<int, 3> votes(std::span<const double> row) const;
    int predict(std::span<const double> row) const;
    /// Mean of member scores mapped to [0,1]: GNB posterior, RF vote
    /// fraction, logistic of the SVM decision value.
    double score(std::span<const double> row) const;
};

// ------------------------------------------------------------------ Model

class Model {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    Algorithm algorithm() const noexcept { return algorithm_; }
    const std::string& fingerprint() const noexcept { return fingerprint_; }
    std::size_t feature_count() const noexcept { return n_features_; }

    /// Throws DataError when `fingerprint` differs from the training space.
    void ensure_compatible(std::string_view fingerprint) const;

    /// Real-valued score, larger = more Satisfactory. GNB: posterior; RF:
    /// vote fraction; SVM: decision value; ENSEMBLE: mean member score.
    double score(std::span<const double> row) const;
    int predict(std::span<const double> row) const;

    std::string to_bytes() const;
    static Model from_bytes(std::string bytes);

    using Params = std::variant<GaussianNB, RandomForest, SvmModel, EnsembleModel>;
    const Params& params() const noexcept { return params_; }

    friend Model train_model(const Matrix& x, const Labels& y, const TrainConfig& config,
                             std::string fingerprint);

private:
    void check_row(std::span<const double> row) const;

    Algorithm algorithm_ = Algorithm::SVM;
    std::string fingerprint_;
    std::size_t n_features_ = 0;
    Params params_;
};

/// Trains the configured algorithm; `fingerprint` identifies the feature
/// space the columns of x come from.
Model train_model(const Matrix& x, const Labels& y, const TrainConfig& config, std::string fingerprint);

// -------------------------------------------------------------- resampling

enum class Balancing : std::uint8_t { None, Under, Over, Smote };

std::string_view balancing_name(Balancing b);
Balancing parse_balancing(std::string_view name);

struct Resampled {
    Matrix x;
    Labels y;
    /// For SMOTE rows (appended after the originals): (base, neighbour)
    /// indices into the input rows.
    std::vector<std::pair<std::size_t, std::size_t>> synthetic_from;
};

/// under: majority randomly cut to the minority size (a subset of the input,
/// in input order). over: minority rows duplicated at random until balanced.
/// smote: minority rows interpolated towards one of their k nearest minority
/// neighbours (k clamped to minority size - 1). Originals keep their labels.
Resampled resample(const Matrix& x, const Labels& y, Balancing method, std::uint64_t seed,
                   std::size_t smote_k = 5);

}  // namespace hg
