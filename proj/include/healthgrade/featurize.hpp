#pragma once

// Feature families and the fitted feature pipeline that assembles them into
// one named, ordered feature space:
//   LEX | TFIDF | POSTAG | POSWORD | LINK | RANK | SIM | MISC

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "healthgrade/common.hpp"
#include "healthgrade/corpus.hpp"
#include "healthgrade/entities.hpp"
#include "healthgrade/preprocess.hpp"
#include "healthgrade/tagger.hpp"

namespace hg {

// ---------------------------------------------------------------- TF-IDF

struct TfidfConfig {
    std::size_t min_df = 3;
    double max_df_ratio = 0.90;
    std::size_t max_features = 4000;
    /// Logarithm base of the IDF term; 0 selects the natural log.
    double log_base = 0.0;
};

struct TfidfModel {
    TfidfConfig config;
    std::size_t n_docs = 0;
    std::vector<std::string> terms;      // lexicographic order
    std::vector<std::size_t> df;         // parallel to terms
    std::unordered_map<std::string, std::uint32_t> index;

    std::size_t size() const noexcept { return terms.size(); }
    /// 1 + log(N / df).
    double idf(std::size_t term) const;
    std::vector<double> idf_table() const;
    void rebuild_index();
};

/// Document frequencies over `docs`; terms with min_df <= df <=
/// floor(max_df_ratio * N) survive, then the max_features terms with the
/// highest corpus frequency are kept (ties: lexicographically smaller).
/// Throws DataError for fewer than 3 documents or an empty vocabulary.
TfidfModel fit_tfidf(std::span<const std::vector<std::string>> docs, const TfidfConfig& config = {});

/// TF (count / document length) times IDF, over the model vocabulary.
/// Out-of-vocabulary tokens still count towards the document length.
SparseVector tfidf_vector(const TfidfModel& model, std::span<const std::string> tokens);

/// Cosine of two nonnegative sparse vectors; 0 when either is all-zero.
double cosine_similarity(const SparseVector& a, const SparseVector& b);

double headline_body_similarity(std::span<const std::string> title_tokens,
                                std::span<const std::string> body_tokens, const TfidfModel& model);

// --------------------------------------------------------------- lexicon

/// Word-category lexicon. Patterns ending in '*' match by prefix.
class CategoryLexicon {
public:
    struct Category {
        std::string name;
        std::vector<std::string> exact;
        std::vector<std::string> prefixes;
    };

    /// "category<TAB>pattern" per line.
    static CategoryLexicon parse(std::string_view text);
    static CategoryLexicon load(const std::string& path);
    /// Lexicon shipped with the library.
    static CategoryLexicon builtin();

    const std::vector<Category>& categories() const noexcept { return categories_; }
    std::size_t size() const noexcept { return categories_.size(); }
    bool matches(std::size_t category, std::string_view token) const;

    /// Back to the "category<TAB>pattern" text form.
    std::string to_text() const;

private:
    std::vector<Category> categories_;
};

/// Structural values appended after the categories.
inline constexpr std::size_t kLexiconStructural = 3;  // WC, WPS, Sixltr

/// Per category 100 * matches / tokens, then WC (token count), WPS (tokens
/// per sentence) and Sixltr (percent of tokens longer than 6 characters).
/// A zero-token document yields all zeros.
std::vector<double> lexicon_features(std::span<const std::string> tokens, const CategoryLexicon& lexicon,
                                     std::size_t sentence_count = 1);
std::vector<std::string> lexicon_feature_names(const CategoryLexicon& lexicon);

/// Sentence terminators ('.', '!', '?' runs) in raw text; at least 1.
std::size_t count_sentences(std::string_view raw_text);

// ------------------------------------------------------------------- POS

struct TaggedToken {
    std::string token;
    std::string tag;
};

struct PosCounts {
    std::vector<double> tag_counts;              // parallel to the tagset
    std::map<std::string, double> word_counts;   // "token_TAG" -> count
};

/// Tags not in `tagset` are ignored.
PosCounts pos_features(std::span<const TaggedToken> tagged, const std::vector<std::string>& tagset);

// ----------------------------------------------------------------- links

/// Popularity rank per registered domain (lower = more popular).
class RankTable {
public:
    static constexpr std::uint64_t kDefaultRank = 10'000'001;

    /// "domain,rank" lines; an optional "domain,rank" header is skipped.
    static RankTable parse(std::string_view text);
    static RankTable load(const std::string& path);
    static RankTable builtin();

    std::uint64_t rank(std::string_view domain) const;
    std::uint64_t default_rank() const noexcept { return default_rank_; }
    void set(std::string domain, std::uint64_t rank);
    const std::map<std::string, std::uint64_t, std::less<>>& entries() const noexcept { return ranks_; }

    std::string to_text() const;

private:
    std::map<std::string, std::uint64_t, std::less<>> ranks_;
    std::uint64_t default_rank_ = kDefaultRank;
};

/// Public-suffix-aware reduction: "www.bbc.co.uk" -> "bbc.co.uk".
std::string registered_domain(std::string_view host);

struct LinkSummary {
    std::size_t internal = 0;
    std::size_t external = 0;
    std::vector<std::string> external_domains;  // distinct, sorted
};

/// Splits links into internal (same registered domain as source_url) and
/// external. Unparsable links are skipped with a warning.
LinkSummary summarize_links(const Article& article);

struct LinkFeatures {
    std::size_t internal = 0;
    std::size_t external = 0;
    /// (position in `known_domains`, rank) for each linked external domain.
    std::vector<std::pair<std::size_t, double>> ranks;
};

LinkFeatures link_features(const Article& article, const RankTable& table,
                           std::span<const std::string> known_domains);

// ------------------------------------------------------------------ misc

struct MiscFeatures {
    double distinct_ratio = 0;
    double persons = 0;
    double organizations = 0;
};

MiscFeatures misc_features(std::span<const std::string> tokens, std::string_view raw_body,
                           const EntityRecognizer& recognizer);

// --------------------------------------------------------- feature space

enum class Family : std::uint8_t { LEX, TFIDF, POSTAG, POSWORD, LINK, RANK, SIM, MISC };
inline constexpr std::size_t kFamilyCount = 8;

std::string_view family_name(Family f);

struct FeatureInfo {
    std::string name;  // family-prefixed, e.g. "POSWORD:cost_NN"
    Family family;
    friend bool operator==(const FeatureInfo&, const FeatureInfo&) = default;
};

class FeatureSpace {
public:
    FeatureSpace() = default;
    explicit FeatureSpace(std::vector<FeatureInfo> features);

    std::size_t size() const noexcept { return features_.size(); }
    const FeatureInfo& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<FeatureInfo>& features() const noexcept { return features_; }

    /// [begin, end) of a family's block.
    std::pair<std::size_t, std::size_t> family_range(Family f) const;
    std::size_t family_size(Family f) const;

    /// SHA-256 over names and families.
    const std::string& fingerprint() const noexcept { return fingerprint_; }

    /// "index<TAB>family<TAB>name" lines with a header, for audit.
    std::string manifest() const;

    friend bool operator==(const FeatureSpace& a, const FeatureSpace& b) {
        return a.features_ == b.features_;
    }

private:
    std::vector<FeatureInfo> features_;
    std::array<std::pair<std::size_t, std::size_t>, kFamilyCount> ranges_{};
    std::string fingerprint_;
};

/// Everything about a document that does not depend on fitted artifacts:
/// cleaned tokens, POS tags, entity counts, link summary.
struct AnalyzedDocument {
    CleanDocument clean;
    std::vector<std::string> tags;  // parallel to clean.surface_tokens
    EntityCounts entities;
    std::size_t sentences = 1;
    LinkSummary links;
};

struct Analyzers {
    std::shared_ptr<const PosTagger> tagger;
    std::shared_ptr<const EntityRecognizer> recognizer;

    /// Builtin perceptron tagger and gazetteer recognizer.
    static Analyzers defaults();
};

AnalyzedDocument analyze(const Article& article, const CleanDocument& clean, const Analyzers& analyzers);

/// OpenMP-parallel over documents.
std::vector<AnalyzedDocument> analyze_all(std::span<const Article> articles,
                                          std::span<const CleanDocument> clean,
                                          const Analyzers& analyzers);
std::vector<AnalyzedDocument> analyze_all_serial(std::span<const Article> articles,
                                                 std::span<const CleanDocument> clean,
                                                 const Analyzers& analyzers);

struct FeaturizerConfig {
    TfidfConfig tfidf;
    std::size_t posword_cap = 50'000;
};

/// Fitted artifacts of every family. Fit on training documents only;
/// transformation is then a pure function of the document.
class FeaturePipeline {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    static FeaturePipeline fit(std::span<const AnalyzedDocument> train, const CategoryLexicon& lexicon,
                               const RankTable& ranks, const std::vector<std::string>& tagset,
                               const FeaturizerConfig& config = {});

    const FeatureSpace& space() const noexcept { return space_; }
    const TfidfModel& tfidf() const noexcept { return tfidf_; }
    const CategoryLexicon& lexicon() const noexcept { return lexicon_; }
    const std::vector<std::string>& posword_vocabulary() const noexcept { return posword_vocab_; }
    const std::vector<std::string>& rank_domains() const noexcept { return rank_domains_; }
    const std::vector<std::string>& tagset() const noexcept { return tagset_; }

    SparseVector transform(const AnalyzedDocument& doc) const;

    /// Dense rows, OpenMP-parallel over documents.
    Matrix transform_dense(std::span<const AnalyzedDocument> docs) const;
    /// Serial reference for transform_dense.
    Matrix transform_dense_serial(std::span<const AnalyzedDocument> docs) const;

    std::string to_bytes() const;
    static FeaturePipeline from_bytes(std::string bytes);
    void save(const std::string& path) const;
    static FeaturePipeline load(const std::string& path);

private:
    void build_space();

    CategoryLexicon lexicon_;
    TfidfModel tfidf_;
    std::vector<std::string> tagset_;
    std::vector<std::string> posword_vocab_;  // lexicographic
    std::unordered_map<std::string, std::uint32_t> posword_index_;
    std::vector<std::string> rank_domains_;   // sorted
    RankTable ranks_;
    FeatureSpace space_;
    std::vector<double> idf_;
};

}  // namespace hg
