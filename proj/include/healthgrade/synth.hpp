#pragma once

// Synthetic corpora with a known signal: each criterion owns a set of
// planted nouns, an article is Satisfactory for the criterion when it
// contains them (before label noise). Also emits tagged sentences from the
// same grammar for training the shipped POS tagger.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "healthgrade/corpus.hpp"
#include "healthgrade/featurize.hpp"
#include "healthgrade/tagger.hpp"

namespace hg::synth {

struct PlantedConfig {
    std::size_t articles = 1000;
    double label_noise = 0.10;
    double na_rate = 0.05;
    std::uint64_t seed = 20170501;
};

struct PlantedCorpus {
    Corpus corpus;
    /// Surface forms planted for each criterion.
    std::array<std::vector<std::string>, kCriterionCount> planted_words;
    /// Lexicon category the planted words of a criterion belong to ("" if none).
    std::array<std::string, kCriterionCount> planted_category;
    /// Signal presence per article before label noise.
    std::vector<std::array<bool, kCriterionCount>> present;

    /// TFIDF terms built from planted words, POSWORD pairs with a planted
    /// token, and the planted lexicon category.
    bool is_planted_feature(const FeatureInfo& feature, CriterionId criterion) const;
};

PlantedCorpus make_planted_corpus(const PlantedConfig& config = {});

/// Lowercase, punctuation-free tagged sentences from the article grammar
/// plus extra verb uses of ambiguous nouns.
std::vector<TaggedSentence> tagged_sentences(std::size_t count, std::uint64_t seed);

/// Filler words used outside planted sentences (after collision filtering).
std::vector<std::string> filler_vocabulary();

}  // namespace hg::synth
