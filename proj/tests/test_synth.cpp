#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "healthgrade/preprocess.hpp"
#include "healthgrade/synth.hpp"

using namespace hg;

namespace {

std::set<std::string> body_norms(const Article& a) {
    std::set<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.insert(normalize_token(word, Normalizer::LemmaThenStem));
        word.clear();
    };
    for (char ch : a.body) {
        if (std::isalpha(static_cast<unsigned char>(ch)))
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        else
            flush();
    }
    flush();
    return out;
}

const synth::PlantedCorpus& planted() {
    static const synth::PlantedCorpus pc = [] {
        synth::PlantedConfig cfg;
        cfg.articles = 1000;
        return synth::make_planted_corpus(cfg);
    }();
    return pc;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    synth::PlantedConfig cfg;
    cfg.articles = 40;
    const auto a = synth::make_planted_corpus(cfg);
    const auto b = synth::make_planted_corpus(cfg);
    CHECK(a.corpus.articles == b.corpus.articles);
    CHECK(a.corpus.labels == b.corpus.labels);
    CHECK(a.present == b.present);
    cfg.seed += 1;
    const auto c = synth::make_planted_corpus(cfg);
    CHECK(c.corpus.articles != a.corpus.articles);

    CHECK(synth::tagged_sentences(20, 3).size() == 20);
    const auto s1 = synth::tagged_sentences(20, 3), s2 = synth::tagged_sentences(20, 3);
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].words == s2[i].words);
        CHECK(s1[i].tags == s2[i].tags);
        CHECK(s1[i].words.size() == s1[i].tags.size());
    }
}

TEST_CASE("configuration is validated") {
    synth::PlantedConfig cfg;
    cfg.articles = 5;
    CHECK_THROWS_AS(synth::make_planted_corpus(cfg), UsageError);
    cfg.articles = 50;
    cfg.label_noise = 0.6;
    CHECK_THROWS_AS(synth::make_planted_corpus(cfg), UsageError);
}

TEST_CASE("NA rate and label noise follow the configuration") {
    const auto& pc = planted();
    std::size_t na = 0, labelled = 0, flipped = 0;
    for (std::size_t a = 0; a < pc.corpus.articles.size(); ++a) {
        for (int c = 1; c <= kCriterionCount; ++c) {
            const auto l = pc.corpus.labels[a].at(CriterionId(c));
            if (l == Label::NotApplicable) {
                ++na;
                CHECK_FALSE(pc.present[a][c - 1]);
                continue;
            }
            ++labelled;
            flipped += (l == Label::Satisfactory) != pc.present[a][c - 1];
        }
    }
    const double na_rate = static_cast<double>(na) / (na + labelled);
    const double noise = static_cast<double>(flipped) / labelled;
    CHECK(na_rate == doctest::Approx(0.05).epsilon(0.3));
    CHECK(noise == doctest::Approx(0.10).epsilon(0.2));
}

TEST_CASE("planted words appear exactly when the signal is present") {
    const auto& pc = planted();
    for (std::size_t a = 0; a < pc.corpus.articles.size(); ++a) {
        const auto norms = body_norms(pc.corpus.articles[a]);
        for (int c = 0; c < kCriterionCount; ++c) {
            const bool any = std::any_of(pc.planted_words[c].begin(), pc.planted_words[c].end(), [&](const auto& w) {
                return norms.contains(normalize_token(w, Normalizer::LemmaThenStem));
            });
            CHECK(any == pc.present[a][c]);
        }
    }
}

TEST_CASE("planted feature recognition") {
    const auto& pc = planted();
    const auto& cost_words = pc.planted_words[0];
    REQUIRE_FALSE(cost_words.empty());
    const std::string w = cost_words.front();
    const std::string stem = normalize_token(w, Normalizer::LemmaThenStem);
    CHECK(pc.is_planted_feature({"TFIDF:" + stem, Family::TFIDF}, CriterionId(1)));
    CHECK(pc.is_planted_feature({"POSWORD:" + w + "_NN", Family::POSWORD}, CriterionId(1)));
    CHECK(pc.is_planted_feature({"LEX:Money", Family::LEX}, CriterionId(1)));
    CHECK_FALSE(pc.is_planted_feature({"LEX:Money", Family::LEX}, CriterionId(2)));
    CHECK_FALSE(pc.is_planted_feature({"TFIDF:" + stem, Family::TFIDF}, CriterionId(2)));
    CHECK_FALSE(pc.is_planted_feature({"RANK:" + w, Family::RANK}, CriterionId(1)));
    CHECK_FALSE(pc.is_planted_feature({"TFIDF:zzzz", Family::TFIDF}, CriterionId(1)));

    std::set<std::string> seen;
    for (const auto& words : pc.planted_words)
        for (const auto& p : words) CHECK(seen.insert(normalize_token(p, Normalizer::LemmaThenStem)).second);
}

TEST_CASE("filler vocabulary avoids planted words and the Money category") {
    const auto& pc = planted();
    std::set<std::string> planted_norms;
    for (const auto& words : pc.planted_words)
        for (const auto& p : words) planted_norms.insert(normalize_token(p, Normalizer::LemmaThenStem));
    const auto lexicon = CategoryLexicon::builtin();
    std::size_t money = lexicon.size();
    for (std::size_t c = 0; c < lexicon.size(); ++c)
        if (lexicon.categories()[c].name == "Money") money = c;
    REQUIRE(money < lexicon.size());
    const auto filler = synth::filler_vocabulary();
    CHECK(filler.size() > 100);
    for (const auto& f : filler) {
        std::string lower = f;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        const auto n = normalize_token(lower, Normalizer::LemmaThenStem);
        CHECK_FALSE(planted_norms.contains(n));
        CHECK_FALSE(lexicon.matches(money, n));
    }
}
