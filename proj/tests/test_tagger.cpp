#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "healthgrade/entities.hpp"
#include "healthgrade/synth.hpp"
#include "healthgrade/tagger.hpp"

using namespace hg;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> w) { return {w.begin(), w.end()}; }

}  // namespace

TEST_CASE("penn tagset has 35 distinct tags") {
    const auto& t = penn_tagset();
    CHECK(t.size() == 35);
    CHECK(std::set<std::string>(t.begin(), t.end()).size() == 35);
    CHECK(std::find(t.begin(), t.end(), "NN") != t.end());
    CHECK(std::find(t.begin(), t.end(), "LS") == t.end());
}

TEST_CASE("tagged sentence parsing") {
    const auto s = parse_tagged_sentences("the/DT cat/NN sat/VBD\n\nprices/NNS rose/VBD\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].words == words({"the", "cat", "sat"}));
    CHECK(s[0].tags == words({"DT", "NN", "VBD"}));
    CHECK_THROWS_AS(parse_tagged_sentences("nocolon"), DataError);
}

TEST_CASE("builtin tagger on held-out sentences") {
    const auto tagger = PerceptronTagger::builtin();
    CHECK(tagger->tagset() == penn_tagset());
    CHECK(tagger->tag(std::vector<std::string>{}).empty());

    const auto held_out = synth::tagged_sentences(400, 987654321);
    std::size_t right = 0, total = 0;
    const std::set<std::string> tagset(penn_tagset().begin(), penn_tagset().end());
    for (const auto& s : held_out) {
        const auto tags = tagger->tag(s.words);
        REQUIRE(tags.size() == s.words.size());
        for (std::size_t i = 0; i < tags.size(); ++i) {
            CHECK(tagset.contains(tags[i]));
            right += tags[i] == s.tags[i];
            ++total;
        }
    }
    CHECK(static_cast<double>(right) / total >= 0.95);
}

TEST_CASE("cost as noun and as verb") {
    const auto tagger = PerceptronTagger::builtin();
    const auto noun = tagger->tag(words({"the", "cost", "of", "the", "drug", "is", "high"}));
    const auto verb = tagger->tag(words({"the", "drugs", "cost", "more", "than", "the", "old", "pills"}));
    CHECK(noun[1] == "NN");
    CHECK(verb[2].rfind("VB", 0) == 0);
}

TEST_CASE("training is deterministic and the weights round trip") {
    const auto sentences = synth::tagged_sentences(300, 1);
    const auto a = PerceptronTagger::train(sentences, penn_tagset(), 3, 7);
    const auto b = PerceptronTagger::train(sentences, penn_tagset(), 3, 7);
    CHECK(a.to_bytes() == b.to_bytes());
    CHECK(a.feature_count() > 0);

    const auto back = PerceptronTagger::from_bytes(a.to_bytes());
    const auto probe = synth::tagged_sentences(50, 2);
    for (const auto& s : probe) CHECK(back.tag(s.words) == a.tag(s.words));

    CHECK_THROWS_AS(PerceptronTagger::from_bytes("HGMODEL\0garbage"), DataError);
    CHECK_THROWS_AS(PerceptronTagger::from_bytes(a.to_bytes().substr(0, 40)), DataError);
}

TEST_CASE("training rejects tags outside the tagset") {
    std::vector<TaggedSentence> s{{{"hello"}, {"XX"}}};
    CHECK_THROWS_AS(PerceptronTagger::train(s, penn_tagset(), 1, 1), DataError);
}

TEST_CASE("gazetteer recognizer") {
    const GazetteerRecognizer ner;
    const auto e = ner.count("Dr. Jane Smith of Mayo Clinic said the results were promising.");
    CHECK(e.persons >= 1);
    CHECK(e.organizations >= 1);
    const auto none = ner.count("");
    CHECK(none.persons == 0);
    CHECK(none.organizations == 0);
    CHECK(ner.count("The FDA approved it.").organizations >= 1);
    CHECK(ner.count("researchers at Harvard University found").organizations >= 1);
    CHECK(ner.count("it was a sunny day in the park").persons == 0);
}
