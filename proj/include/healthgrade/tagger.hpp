#pragma once

// Part-of-speech tagging behind a pluggable interface. The default
// implementation is an averaged perceptron whose weights are loaded from a
// versioned binary file (magic "HGTAGGER").

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hg {

/// Penn Treebank tags without list-item markers: 35 tags.
const std::vector<std::string>& penn_tagset();

class PosTagger {
public:
    virtual ~PosTagger() = default;
    /// Tags the tagger can emit; defines the POSTAG feature family.
    virtual const std::vector<std::string>& tagset() const = 0;
    /// One tag per token.
    virtual std::vector<std::string> tag(std::span<const std::string> tokens) const = 0;
};

struct TaggedSentence {
    std::vector<std::string> words;
    std::vector<std::string> tags;
};

/// Reads "word/TAG word/TAG ..." lines.
std::vector<TaggedSentence> parse_tagged_sentences(std::string_view text);

class PerceptronTagger final : public PosTagger {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    PerceptronTagger() = default;

    /// Loads the weights shipped with the library.
    static std::shared_ptr<const PerceptronTagger> builtin();
    static PerceptronTagger from_bytes(std::string bytes);
    static PerceptronTagger load(const std::string& path);

    /// Trains from tagged sentences (development utility for producing the
    /// shipped weight file). Deterministic for a given seed.
    static PerceptronTagger train(const std::vector<TaggedSentence>& sentences,
                                  const std::vector<std::string>& tagset, int iterations,
                                  unsigned seed);

    std::string to_bytes() const;
    void save(const std::string& path) const;

    const std::vector<std::string>& tagset() const override { return tags_; }
    std::vector<std::string> tag(std::span<const std::string> tokens) const override;

    std::size_t feature_count() const noexcept { return weights_.size(); }

private:
    using Scores = std::vector<float>;

    int predict(const std::vector<std::string>& features) const;
    int tag_index(std::string_view tag) const;

    std::vector<std::string> tags_;
    std::unordered_map<std::string, int> tagdict_;   // unambiguous frequent words
    std::unordered_map<std::string, Scores> weights_;
};

}  // namespace hg
