#include "healthgrade/learn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "healthgrade/binio.hpp"

namespace hg {

namespace {

constexpr std::string_view kModelMagic = "HGMODEL";

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::GNB: return "gnb";
        case Algorithm::RF: return "rf";
        case Algorithm::SVM: return "svm";
        case Algorithm::ENSEMBLE: return "ensemble";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    const auto n = lower(name);
    if (n == "gnb" || n == "nb") return Algorithm::GNB;
    if (n == "rf") return Algorithm::RF;
    if (n == "svm") return Algorithm::SVM;
    if (n == "ensemble") return Algorithm::ENSEMBLE;
    throw UsageError("unknown classifier '" + std::string(name) + "' (gnb, rf, svm, ensemble)");
}

void TrainConfig::validate() const {
    if (rf_n_trees < 1) throw UsageError("rf_n_trees must be >= 1");
    if (!(svm_c > 0.0)) throw UsageError("svm_c must be > 0");
    if (svm_kernel_degree < 1) throw UsageError("svm_kernel_degree must be >= 1");
    if (!(svm_tol > 0.0)) throw UsageError("svm_tol must be > 0");
    if (smote_k < 1) throw UsageError("smote_k must be >= 1");
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    const std::size_t n = x.rows(), m = x.cols();
    s.mean.assign(m, 0.0);
    s.scale.assign(m, 1.0);
    if (n == 0) return s;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < m; ++j) s.mean[j] += r[j];
    }
    for (auto& v : s.mean) v /= static_cast<double>(n);
    std::vector<double> ss(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = r[j] - s.mean[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double sd = std::sqrt(ss[j] / static_cast<double>(n));
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto src = x.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = (src[j] - mean[j]) / scale[j];
    }
    return out;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
    return out;
}

void check_training_input(const Matrix& x, const Labels& y) {
    if (x.rows() != y.size()) throw DataError("feature rows and labels differ in length");
    std::size_t pos = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
        pos += static_cast<std::size_t>(v);
    }
    if (pos == 0 || pos == y.size()) throw DataError("degenerate training set: only one class present");
}

// ------------------------------------------------------------ Gaussian NB

GaussianNB GaussianNB::fit(const Matrix& x, const Labels& y) {
    check_training_input(x, y);
    const std::size_t n = x.rows(), m = x.cols();
    GaussianNB g;
    std::array<std::size_t, 2> count{0, 0};
    for (int c = 0; c < 2; ++c) {
        g.mean[c].assign(m, 0.0);
        g.var[c].assign(m, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int c = y[i];
        ++count[c];
        auto r = x.row(i);
        for (std::size_t j = 0; j < m; ++j) g.mean[c][j] += r[j];
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : g.mean[c]) v /= static_cast<double>(count[c]);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = y[i];
        auto r = x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = r[j] - g.mean[c][j];
            g.var[c][j] += d * d;
        }
    }
    // Variance floor: 1e-9 times the largest overall feature variance.
    std::vector<double> overall_mean(m, 0.0), overall_ss(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) overall_mean[j] += x(i, j);
    for (auto& v : overall_mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double d = x(i, j) - overall_mean[j];
            overall_ss[j] += d * d;
        }
    double max_var = 0.0;
    for (double ss : overall_ss) max_var = std::max(max_var, ss / static_cast<double>(n));
    const double floor = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
    for (int c = 0; c < 2; ++c)
        for (auto& v : g.var[c]) v = std::max(v / static_cast<double>(count[c]), floor);
    for (int c = 0; c < 2; ++c)
        g.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(n));
    return g;
}

std::array<double, 2> GaussianNB::joint_log_likelihood(std::span<const double> row) const {
    std::array<double, 2> out{};
    for (int c = 0; c < 2; ++c) {
        double s = log_prior[c];
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = row[j] - mean[c][j];
            s -= 0.5 * (std::log(2.0 * std::numbers::pi * var[c][j]) + d * d / var[c][j]);
        }
        out[c] = s;
    }
    return out;
}

double GaussianNB::posterior(std::span<const double> row) const {
    const auto jll = joint_log_likelihood(row);
    // P(1) = 1 / (1 + exp(jll0 - jll1))
    const double d = jll[0] - jll[1];
    if (d > 0) {
        const double e = std::exp(-d);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(d));
}

// ---------------------------------------------------------- random forest

std::size_t max_features_for(MaxFeaturesRule rule, std::size_t n_features) {
    if (n_features == 0) return 0;
    std::size_t k = n_features;
    switch (rule) {
        case MaxFeaturesRule::Sqrt:
            k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
            break;
        case MaxFeaturesRule::Log2:
            k = static_cast<std::size_t>(std::log2(static_cast<double>(n_features)));
            break;
        case MaxFeaturesRule::All: break;
    }
    return std::clamp<std::size_t>(k, 1, n_features);
}

int DecisionTree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const TreeNode& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].label;
}

namespace {

double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
}

// Grows one tree on a bootstrap sample. `importance` accumulates the
// sample-weighted impurity decrease per feature.
DecisionTree grow_tree(const Matrix& x, const Labels& y, std::size_t mtry, std::uint64_t seed,
                       std::vector<double>& importance) {
    std::mt19937_64 rng(seed);
    const std::size_t n = x.rows(), m = x.cols();
    std::vector<std::size_t> sample(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& s : sample) s = pick(rng);

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);

    DecisionTree tree;
    struct Task {
        std::size_t node;
        std::vector<std::size_t> idx;
    };
    tree.nodes.emplace_back();
    std::vector<Task> stack;
    stack.push_back({0, std::move(sample)});
    const double root_n = static_cast<double>(n);
    std::vector<std::pair<double, int>> column;

    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        const auto& idx = task.idx;
        const double nn = static_cast<double>(idx.size());
        std::size_t pos = 0;
        for (auto i : idx) pos += static_cast<std::size_t>(y[i]);
        const auto majority = [&] { return 2 * pos > idx.size() ? 1 : 0; };
        if (pos == 0 || pos == idx.size() || idx.size() < 2) {
            tree.nodes[task.node].label = majority();
            continue;
        }
        const double parent = gini(static_cast<double>(pos), nn);

        int best_feature = -1;
        double best_threshold = 0.0, best_decrease = -1.0;
        std::size_t examined = 0;
        for (std::size_t drawn = 0; drawn < m && examined < mtry; ++drawn) {
            std::uniform_int_distribution<std::size_t> d(drawn, m - 1);
            std::swap(perm[drawn], perm[d(rng)]);
            const std::size_t f = perm[drawn];
            column.clear();
            for (auto i : idx) column.emplace_back(x(i, f), y[i]);
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;  // constant here
            ++examined;
            double left_n = 0, left_pos = 0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                left_n += 1;
                left_pos += column[k].second;
                if (column[k].first == column[k + 1].first) continue;
                const double right_n = nn - left_n;
                const double right_pos = static_cast<double>(pos) - left_pos;
                const double child = (left_n * gini(left_pos, left_n) + right_n * gini(right_pos, right_n)) / nn;
                const double decrease = parent - child;
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_feature = static_cast<int>(f);
                    double t = 0.5 * (column[k].first + column[k + 1].first);
                    if (!(t < column[k + 1].first)) t = column[k].first;
                    best_threshold = t;
                }
            }
        }
        if (best_feature < 0) {
            tree.nodes[task.node].label = majority();
            continue;
        }
        importance[static_cast<std::size_t>(best_feature)] += (nn / root_n) * best_decrease;
        std::vector<std::size_t> left, right;
        for (auto i : idx) (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
        const auto li = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const auto ri = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[task.node];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = li;
        node.right = ri;
        node.label = majority();
        stack.push_back({static_cast<std::size_t>(ri), std::move(right)});
        stack.push_back({static_cast<std::size_t>(li), std::move(left)});
    }
    return tree;
}

RandomForest finish_forest(std::vector<DecisionTree> trees, const std::vector<std::vector<double>>& per_tree,
                           std::size_t m) {
    RandomForest rf;
    rf.trees_ = std::move(trees);
    rf.importances_.assign(m, 0.0);
    for (const auto& imp : per_tree)
        for (std::size_t j = 0; j < m; ++j) rf.importances_[j] += imp[j];
    double total = 0.0;
    for (auto& v : rf.importances_) {
        v /= static_cast<double>(per_tree.size());
        total += v;
    }
    if (total > 0.0)
        for (auto& v : rf.importances_) v /= total;
    return rf;
}

}  // namespace

RandomForest RandomForest::fit(const Matrix& x, const Labels& y, std::size_t n_trees, MaxFeaturesRule rule,
                               std::uint64_t seed) {
    check_training_input(x, y);
    if (n_trees < 1) throw UsageError("random forest needs at least one tree");
    const std::size_t mtry = max_features_for(rule, x.cols());
    std::vector<DecisionTree> trees(n_trees);
    std::vector<std::vector<double>> imp(n_trees, std::vector<double>(x.cols(), 0.0));
    const auto nt = static_cast<std::ptrdiff_t>(n_trees);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < nt; ++t)
        trees[t] = grow_tree(x, y, mtry, seed + static_cast<std::uint64_t>(t), imp[t]);
    return finish_forest(std::move(trees), imp, x.cols());
}

RandomForest RandomForest::fit_serial(const Matrix& x, const Labels& y, std::size_t n_trees,
                                      MaxFeaturesRule rule, std::uint64_t seed) {
    check_training_input(x, y);
    if (n_trees < 1) throw UsageError("random forest needs at least one tree");
    const std::size_t mtry = max_features_for(rule, x.cols());
    std::vector<DecisionTree> trees;
    std::vector<std::vector<double>> imp(n_trees, std::vector<double>(x.cols(), 0.0));
    for (std::size_t t = 0; t < n_trees; ++t) trees.push_back(grow_tree(x, y, mtry, seed + t, imp[t]));
    return finish_forest(std::move(trees), imp, x.cols());
}

double RandomForest::score(std::span<const double> row) const {
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += static_cast<std::size_t>(t.predict(row));
    return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

// -------------------------------------------------------------------- SVM

double poly_kernel(std::span<const double> u, std::span<const double> v, int degree) {
    const double d = dot(u, v);
    double out = d;
    for (int i = 1; i < degree; ++i) out *= d;
    return out;
}

Matrix kernel_matrix(const Matrix& x, int degree) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < nn; ++i)
        for (std::size_t j = static_cast<std::size_t>(i); j < n; ++j)
            k(i, j) = poly_kernel(x.row(i), x.row(j), degree);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) k(i, j) = k(j, i);
    return k;
}

Matrix kernel_matrix_serial(const Matrix& x, int degree) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k(i, j) = poly_kernel(x.row(std::min(i, j)), x.row(std::max(i, j)), degree);
    return k;
}

SmoSolution solve_smo(const Matrix& kernel, const Labels& y01, double c, double tol, std::size_t max_updates) {
    const std::size_t n = kernel.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = y01[i] == 1 ? 1.0 : -1.0;
    std::vector<double> alpha(n, 0.0), grad(n, -1.0);
    constexpr double kTau = 1e-12;
    const double inf = std::numeric_limits<double>::infinity();

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

    SmoSolution sol;
    double gap = inf;
    while (true) {
        // Working set: i maximizes -y G over I_up; j by second-order gain over I_low.
        double gmax = -inf, gmax2 = -inf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t)
            if (in_up(t) && -y[t] * grad[t] >= gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        std::size_t j = n;
        double obj_min = inf;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = y[t] * grad[t];
            gmax2 = std::max(gmax2, v);
            if (i == n) continue;
            const double b = gmax + v;
            if (b > 0) {
                double a = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
                if (a <= 0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= obj_min) {
                    obj_min = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if (gap < tol || i == n || j == n) break;
        if (sol.updates >= max_updates)
            throw ConvergenceError("SMO did not converge within " + std::to_string(max_updates) +
                                       " pair updates (KKT gap " + std::to_string(gap) + ")",
                                   sol.updates, gap);
        ++sol.updates;

        const double qii = kernel(i, i), qjj = kernel(j, j), kij = kernel(i, j);
        const double qij = y[i] * y[j] * kij;
        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * kernel(i, t) * di + y[j] * kernel(j, t) * dj);
    }

    // Bias: mean of -y G over free vectors, else the midpoint of the feasible interval.
    double free_sum = 0.0;
    std::size_t free_n = 0;
    double ub = inf, lb = -inf;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -y[t] * grad[t];
        if (alpha[t] > 0 && alpha[t] < c) {
            free_sum += v;
            ++free_n;
        } else {
            // alpha at a bound constrains b from one side.
            const bool lower_side = (alpha[t] <= 0) == (y[t] > 0);
            if (lower_side) lb = std::max(lb, v);
            else ub = std::min(ub, v);
        }
    }
    if (free_n > 0) sol.bias = free_sum / static_cast<double>(free_n);
    else if (std::isfinite(ub) && std::isfinite(lb)) sol.bias = 0.5 * (ub + lb);
    else sol.bias = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    sol.alpha = std::move(alpha);
    sol.gap = gap;
    return sol;
}

double max_kkt_violation(const Matrix& kernel, const Labels& y01, const SmoSolution& sol, double c) {
    const std::size_t n = kernel.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = sol.bias;
        for (std::size_t j = 0; j < n; ++j)
            if (sol.alpha[j] != 0.0) f += sol.alpha[j] * (y01[j] == 1 ? 1.0 : -1.0) * kernel(i, j);
        const double yf = (y01[i] == 1 ? 1.0 : -1.0) * f;
        double v;
        if (sol.alpha[i] <= 0.0) v = std::max(0.0, 1.0 - yf);
        else if (sol.alpha[i] >= c) v = std::max(0.0, yf - 1.0);
        else v = std::abs(yf - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

SvmModel SvmModel::fit(const Matrix& x, const Labels& y, const TrainConfig& config) {
    check_training_input(x, y);
    config.validate();
    SvmModel m;
    m.degree = config.svm_kernel_degree;
    m.scaler = Standardizer::fit(x);
    // Columns are z-scored and then divided by sqrt(m): the mean squared
    // norm of an instance is 1 for any width.
    const double width = std::sqrt(static_cast<double>(std::max<std::size_t>(x.cols(), 1)));
    for (auto& s : m.scaler.scale) s *= width;
    const Matrix xs = m.scaler.apply(x);
    const Matrix k = kernel_matrix(xs, m.degree);
    m.solution = solve_smo(k, y, config.svm_c, config.svm_tol, config.svm_max_updates);
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < xs.rows(); ++i)
        if (m.solution.alpha[i] > 0.0) sv.push_back(i);
    m.support = xs.select_rows(sv);
    for (auto i : sv) m.coef.push_back(m.solution.alpha[i] * (y[i] == 1 ? 1.0 : -1.0));
    m.bias = m.solution.bias;
    return m;
}

double SvmModel::decision(std::span<const double> row) const {
    const auto z = scaler.apply(row);
    double f = bias;
    for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * poly_kernel(support.row(i), z, degree);
    return f;
}

// --------------------------------------------------------------- ensemble

std::array<int, 3> EnsembleModel::votes(std::span<const double> row) const {
    return {gnb.predict(row), rf.predict(row), svm.predict(row)};
}

int EnsembleModel::predict(std::span<const double> row) const {
    const auto v = votes(row);
    return v[0] + v[1] + v[2] >= 2 ? 1 : 0;
}

double EnsembleModel::score(std::span<const double> row) const {
    const double s = 1.0 / (1.0 + std::exp(-svm.decision(row)));
    return (gnb.posterior(row) + rf.score(row) + s) / 3.0;
}

// ------------------------------------------------------------------ Model

void Model::ensure_compatible(std::string_view fingerprint) const {
    if (fingerprint != fingerprint_)
        throw DataError("feature space fingerprint mismatch: model trained on " + fingerprint_ + ", got " +
                        std::string(fingerprint));
}

void Model::check_row(std::span<const double> row) const {
    if (row.size() != n_features_)
        throw DataError("feature vector has " + std::to_string(row.size()) + " values, model expects " +
                        std::to_string(n_features_));
}

double Model::score(std::span<const double> row) const {
    check_row(row);
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianNB>) return p.posterior(row);
            else if constexpr (std::is_same_v<T, RandomForest>) return p.score(row);
            else if constexpr (std::is_same_v<T, SvmModel>) return p.decision(row);
            else return p.score(row);
        },
        params_);
}

int Model::predict(std::span<const double> row) const {
    check_row(row);
    return std::visit([&](const auto& p) { return p.predict(row); }, params_);
}

Model train_model(const Matrix& x, const Labels& y, const TrainConfig& config, std::string fingerprint) {
    config.validate();
    check_training_input(x, y);
    Model m;
    m.algorithm_ = config.algorithm;
    m.fingerprint_ = std::move(fingerprint);
    m.n_features_ = x.cols();
    switch (config.algorithm) {
        case Algorithm::GNB: m.params_ = GaussianNB::fit(x, y); break;
        case Algorithm::RF:
            m.params_ = RandomForest::fit(x, y, config.rf_n_trees, config.rf_max_features, config.seed);
            break;
        case Algorithm::SVM: m.params_ = SvmModel::fit(x, y, config); break;
        case Algorithm::ENSEMBLE: {
            EnsembleModel e;
            e.gnb = GaussianNB::fit(x, y);
            e.rf = RandomForest::fit(x, y, config.rf_n_trees, config.rf_max_features, config.seed);
            e.svm = SvmModel::fit(x, y, config);
            m.params_ = std::move(e);
            break;
        }
    }
    return m;
}

namespace {

void write_gnb(binio::Writer& w, const GaussianNB& g) {
    for (int c = 0; c < 2; ++c) {
        w.f64(g.log_prior[c]);
        w.vec(g.mean[c]);
        w.vec(g.var[c]);
    }
}

GaussianNB read_gnb(binio::Reader& r) {
    GaussianNB g;
    for (int c = 0; c < 2; ++c) {
        g.log_prior[c] = r.f64();
        g.mean[c] = r.vec<double>();
        g.var[c] = r.vec<double>();
    }
    return g;
}

void write_rf(binio::Writer& w, const RandomForest& rf) {
    w.u64(rf.trees_.size());
    for (const auto& t : rf.trees_) {
        w.u64(t.nodes.size());
        for (const auto& n : t.nodes) {
            w.pod(n.feature);
            w.f64(n.threshold);
            w.pod(n.left);
            w.pod(n.right);
            w.pod(n.label);
        }
    }
    w.vec(rf.importances_);
}

RandomForest read_rf(binio::Reader& r) {
    RandomForest rf;
    const auto nt = r.u64();
    for (std::uint64_t t = 0; t < nt; ++t) {
        DecisionTree tree;
        const auto nn = r.u64();
        for (std::uint64_t i = 0; i < nn; ++i) {
            TreeNode n;
            n.feature = r.pod<std::int32_t>();
            n.threshold = r.f64();
            n.left = r.pod<std::int32_t>();
            n.right = r.pod<std::int32_t>();
            n.label = r.pod<std::int32_t>();
            const auto limit = static_cast<std::int32_t>(nn);
            if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit))
                throw DataError("model file: corrupt tree node");
            tree.nodes.push_back(n);
        }
        if (tree.nodes.empty()) throw DataError("model file: empty tree");
        rf.trees_.push_back(std::move(tree));
    }
    rf.importances_ = r.vec<double>();
    if (rf.trees_.empty()) throw DataError("model file: forest without trees");
    return rf;
}

void write_svm(binio::Writer& w, const SvmModel& s) {
    w.vec(s.scaler.mean);
    w.vec(s.scaler.scale);
    w.pod(static_cast<std::int32_t>(s.degree));
    w.u64(s.support.rows());
    w.u64(s.support.cols());
    w.vec(s.support.data());
    w.vec(s.coef);
    w.f64(s.bias);
}

SvmModel read_svm(binio::Reader& r) {
    SvmModel s;
    s.scaler.mean = r.vec<double>();
    s.scaler.scale = r.vec<double>();
    s.degree = r.pod<std::int32_t>();
    const auto rows = r.u64(), cols = r.u64();
    const auto data = r.vec<double>();
    if (data.size() != rows * cols) throw DataError("model file: support matrix size mismatch");
    s.support = Matrix(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) s.support(i, j) = data[i * cols + j];
    s.coef = r.vec<double>();
    s.bias = r.f64();
    if (s.coef.size() != rows) throw DataError("model file: coefficient count mismatch");
    return s;
}

}  // namespace

std::string Model::to_bytes() const {
    binio::Writer w;
    w.magic(kModelMagic, kFormatVersion);
    w.u8(static_cast<std::uint8_t>(algorithm_));
    w.str(fingerprint_);
    w.u64(n_features_);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianNB>) write_gnb(w, p);
            else if constexpr (std::is_same_v<T, RandomForest>) write_rf(w, p);
            else if constexpr (std::is_same_v<T, SvmModel>) write_svm(w, p);
            else {
                write_gnb(w, p.gnb);
                write_rf(w, p.rf);
                write_svm(w, p.svm);
            }
        },
        params_);
    return w.bytes();
}

Model Model::from_bytes(std::string bytes) {
    binio::Reader r(std::move(bytes));
    const auto version = r.magic(kModelMagic);
    if (version != kFormatVersion) throw DataError("unsupported model file version " + std::to_string(version));
    Model m;
    const auto tag = r.u8();
    if (tag > static_cast<std::uint8_t>(Algorithm::ENSEMBLE)) throw DataError("model file: unknown algorithm tag");
    m.algorithm_ = static_cast<Algorithm>(tag);
    m.fingerprint_ = r.str();
    m.n_features_ = r.u64();
    switch (m.algorithm_) {
        case Algorithm::GNB: m.params_ = read_gnb(r); break;
        case Algorithm::RF: m.params_ = read_rf(r); break;
        case Algorithm::SVM: m.params_ = read_svm(r); break;
        case Algorithm::ENSEMBLE: {
            EnsembleModel e;
            e.gnb = read_gnb(r);
            e.rf = read_rf(r);
            e.svm = read_svm(r);
            m.params_ = std::move(e);
            break;
        }
    }
    if (!r.at_end()) throw DataError("model file: trailing bytes");
    return m;
}

// -------------------------------------------------------------- resampling

std::string_view balancing_name(Balancing b) {
    switch (b) {
        case Balancing::None: return "none";
        case Balancing::Under: return "under";
        case Balancing::Over: return "over";
        case Balancing::Smote: return "smote";
    }
    return "?";
}

Balancing parse_balancing(std::string_view name) {
    const auto n = lower(name);
    if (n == "none") return Balancing::None;
    if (n == "under") return Balancing::Under;
    if (n == "over") return Balancing::Over;
    if (n == "smote") return Balancing::Smote;
    throw UsageError("unknown balancing '" + std::string(name) + "' (none, under, over, smote)");
}

Resampled resample(const Matrix& x, const Labels& y, Balancing method, std::uint64_t seed, std::size_t smote_k) {
    check_training_input(x, y);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
    const bool pos_minority = pos.size() < neg.size();
    const auto& minority = pos_minority ? pos : neg;
    const auto& majority = pos_minority ? neg : pos;
    const int minority_label = pos_minority ? 1 : 0;

    Resampled out;
    if (method == Balancing::None || pos.size() == neg.size()) {
        out.x = x;
        out.y = y;
        return out;
    }
    std::mt19937_64 rng(seed);
    const std::size_t needed = majority.size() - minority.size();

    switch (method) {
        case Balancing::None: break;
        case Balancing::Under: {
            std::vector<std::size_t> keep = majority;
            std::shuffle(keep.begin(), keep.end(), rng);
            keep.resize(minority.size());
            std::vector<char> selected(y.size(), 0);
            for (auto i : keep) selected[i] = 1;
            for (auto i : minority) selected[i] = 1;
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (selected[i]) rows.push_back(i);
            out.x = x.select_rows(rows);
            for (auto i : rows) out.y.push_back(y[i]);
            break;
        }
        case Balancing::Over: {
            out.x = x;
            out.y = y;
            std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
            for (std::size_t s = 0; s < needed; ++s) {
                out.x.append_row(x.row(minority[pick(rng)]));
                out.y.push_back(minority_label);
            }
            break;
        }
        case Balancing::Smote: {
            if (minority.size() < 2) throw DataError("SMOTE needs at least 2 minority instances");
            const std::size_t k = std::min(smote_k, minority.size() - 1);
            // k nearest minority neighbours of each minority row (ties: lower index).
            std::vector<std::vector<std::size_t>> neighbours(minority.size());
            for (std::size_t a = 0; a < minority.size(); ++a) {
                std::vector<std::pair<double, std::size_t>> d;
                d.reserve(minority.size() - 1);
                for (std::size_t b = 0; b < minority.size(); ++b)
                    if (b != a) d.emplace_back(squared_distance(x.row(minority[a]), x.row(minority[b])), b);
                std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
                for (std::size_t t = 0; t < k; ++t) neighbours[a].push_back(d[t].second);
            }
            out.x = x;
            out.y = y;
            std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
            std::uniform_int_distribution<std::size_t> pick_nb(0, k - 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<double> point(x.cols());
            for (std::size_t s = 0; s < needed; ++s) {
                const std::size_t a = pick(rng);
                const std::size_t b = neighbours[a][pick_nb(rng)];
                const double u = unit(rng);
                auto xa = x.row(minority[a]);
                auto xb = x.row(minority[b]);
                for (std::size_t j = 0; j < point.size(); ++j) point[j] = xa[j] + u * (xb[j] - xa[j]);
                out.x.append_row(point);
                out.y.push_back(minority_label);
                out.synthetic_from.emplace_back(minority[a], minority[b]);
            }
            break;
        }
    }
    return out;
}

}  // namespace hg
