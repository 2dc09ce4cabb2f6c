#pragma once

// Criterion-labelled article collections: loading, validation, filtering
// to binary per-criterion datasets, and persistence.
//
// Corpus files are UTF-8 JSON Lines. Each line is one record:
//   {"kind":"article","id":...,"title":...,"body":...,"source_url":...,
//    "links":[...],"fetched_at":"2017-05-01"}          (fetched_at optional)
//   {"kind":"labels","article_id":...,"labels":["S","NS","NA",...]}  (10 tokens)
// See docs/corpus_format.md.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "healthgrade/common.hpp"

namespace hg {

inline constexpr int kCriterionCount = 10;

enum class Label : std::uint8_t { NotSatisfactory = 0, Satisfactory = 1, NotApplicable = 2 };

/// Parses the exact tokens "S", "NS", "NA".
std::optional<Label> parse_label(std::string_view token);
std::string_view label_token(Label label);

/// Criterion id in 1..=10.
class CriterionId {
public:
    explicit CriterionId(int value);
    int value() const noexcept { return value_; }
    std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }
    friend bool operator==(CriterionId, CriterionId) = default;

private:
    int value_;
};

/// Short human name of each criterion ("cost", "benefits", ...).
std::string_view criterion_name(CriterionId c);

struct Article {
    std::string id;
    std::string title;
    std::string body;
    std::string source_url;
    std::vector<std::string> links;
    std::optional<std::string> fetched_at;

    friend bool operator==(const Article&, const Article&) = default;
};

struct CriterionLabels {
    std::string article_id;
    std::array<Label, kCriterionCount> labels{};

    Label at(CriterionId c) const { return labels[c.index()]; }
    friend bool operator==(const CriterionLabels&, const CriterionLabels&) = default;
};

struct Corpus {
    std::vector<Article> articles;
    std::vector<CriterionLabels> labels;

    /// Label record for an article id, or nullptr.
    const CriterionLabels* labels_for(std::string_view article_id) const;
    const Article* article(std::string_view id) const;
};

struct BinaryInstance {
    std::string article_id;
    std::size_t article_index;  // position in Corpus::articles
    Label label;                // Satisfactory or NotSatisfactory
};

struct BinaryDataset {
    CriterionId criterion{1};
    std::vector<BinaryInstance> instances;
    std::size_t satisfactory = 0;
    std::size_t not_satisfactory = 0;

    /// 1 = Satisfactory, 0 = NotSatisfactory, in instance order.
    Labels binary_labels() const;
};

struct ClassCounts {
    std::size_t satisfactory = 0;
    std::size_t not_satisfactory = 0;
    std::size_t not_applicable = 0;
    std::size_t total() const noexcept { return satisfactory + not_satisfactory + not_applicable; }
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

using CorpusStats = std::array<ClassCounts, kCriterionCount>;

/// Absolute http(s)-style URL with a host. Returns the lowercase host, or
/// nullopt when the string is not an absolute URL.
std::optional<std::string> url_host(std::string_view url);

/// Validates records and cross references. Throws DataError.
void validate_corpus(const Corpus& corpus);

/// Parses a corpus from JSON Lines text. `origin` names the source in errors.
Corpus parse_corpus(std::string_view text, const std::string& origin = "<corpus>");
Corpus load_corpus(const std::string& path);

/// Canonical serialization: all article records (input order), then all
/// label records (input order). One record per line, keys sorted.
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

/// Ingests loosely-formed records: fills `links` from href attributes and
/// bare URLs in the body when the record has none, drops links that do not
/// parse, trims whitespace, then validates.
Corpus ingest_raw(std::string_view text, const std::string& origin = "<raw>");

/// Articles whose label for `criterion` is not NotApplicable. Throws
/// DataError when either class has fewer than 2 instances.
BinaryDataset filter_for_criterion(const Corpus& corpus, CriterionId criterion);

CorpusStats corpus_stats(const Corpus& corpus);

/// Plain-text table of per-criterion S/NS/NA counts.
std::string format_stats(const CorpusStats& stats);

}  // namespace hg
