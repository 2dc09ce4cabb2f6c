#pragma once

// Text cleaning: contraction expansion, noise removal, word normalization.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "healthgrade/corpus.hpp"

namespace hg {

using ContractionTable = std::map<std::string, std::string>;
using StopwordSet = std::set<std::string, std::less<>>;

enum class Normalizer { Stem, LemmaThenStem };

struct PipelineConfig {
    ContractionTable contraction_table;
    StopwordSet stopword_list;
    bool remove_stopwords = true;
    bool remove_numbers = true;
    Normalizer normalizer = Normalizer::LemmaThenStem;
    /// When false, title tokens are also prepended to the body tokens.
    bool keep_title_separately = true;

    /// Shipped contraction table and stopword list.
    static PipelineConfig defaults();

    /// Throws UsageError on uppercase contraction keys or an empty stopword
    /// list with stopword removal enabled.
    void validate() const;
};

/// "key<TAB>expansion" per line; keys are lowercased.
ContractionTable parse_contraction_table(std::string_view text);
/// One word per line; blank lines and '#' comments skipped.
StopwordSet parse_stopwords(std::string_view text);

/// Loads a JSON pipeline config. Recognised keys: contractions (path),
/// stopwords (path), remove_stopwords, remove_numbers,
/// normalizer ("stem" | "lemma-then-stem"), keep_title_separately.
/// Missing keys keep the shipped defaults.
PipelineConfig load_pipeline_config(const std::string& path);

/// Content-addressed description of a config (used in manifests).
std::string describe(const PipelineConfig& config);

std::string expand_contractions(std::string_view text, const ContractionTable& table);
std::string remove_noise(std::string_view text, const PipelineConfig& config);
std::vector<std::string> normalize_words(std::string_view text, const PipelineConfig& config);

/// Normalizes a single lowercase token to its fixed point under the
/// configured normalizer.
std::string normalize_token(std::string_view token, Normalizer normalizer);

struct CleanDocument {
    std::string article_id;
    std::vector<std::string> title_tokens;
    std::vector<std::string> body_tokens;
    /// Body after contraction expansion and noise removal, before stopword
    /// removal and normalization. Input to the POS tagger.
    std::vector<std::string> surface_tokens;
    std::string raw_body;
    bool empty_body = false;

    friend bool operator==(const CleanDocument&, const CleanDocument&) = default;
};

/// Runs the three stages over title and body. An empty cleaned body sets
/// `empty_body` and logs a warning; the document is kept.
CleanDocument preprocess(const Article& article, const PipelineConfig& config);

/// OpenMP-parallel over documents.
std::vector<CleanDocument> preprocess_all(const std::vector<Article>& articles,
                                          const PipelineConfig& config);
/// Serial reference for preprocess_all.
std::vector<CleanDocument> preprocess_all_serial(const std::vector<Article>& articles,
                                                 const PipelineConfig& config);

/// JSON Lines persistence of cleaned documents.
std::string serialize_clean(const std::vector<CleanDocument>& docs);
std::vector<CleanDocument> parse_clean(std::string_view text);

}  // namespace hg
