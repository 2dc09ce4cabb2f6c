#include "healthgrade/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include "healthgrade/preprocess.hpp"

namespace hg::synth {

namespace {

using Pool = std::vector<std::string>;

// Planted nouns per criterion as "word/TAG".
const std::array<std::vector<std::string_view>, kCriterionCount> kPlanted = {{
    {"cost/NN", "price/NN", "insurance/NN", "fee/NN", "budget/NN", "dollars/NNS", "copay/NN", "expense/NN"},
    {"percent/NN", "majority/NN", "fraction/NN", "proportion/NN", "half/NN", "quarter/NN", "ratio/NN", "odds/NNS"},
    {"risk/NN", "harm/NN", "toxicity/NN", "complication/NN", "hazard/NN", "injury/NN", "nausea/NN", "rash/NN"},
    {"trial/NN", "placebo/NN", "cohort/NN", "sample/NN", "evidence/NN", "methodology/NN", "replication/NN",
     "bias/NN"},
    {"epidemic/NN", "crisis/NN", "prevalence/NN", "syndrome/NN", "disorder/NN", "burden/NN", "outbreak/NN",
     "scourge/NN"},
    {"independence/NN", "conflict/NN", "disclosure/NN", "affiliation/NN", "sponsor/NN", "consultant/NN",
     "stakeholder/NN", "grant/NN"},
    {"alternative/NN", "option/NN", "comparison/NN", "substitute/NN", "choice/NN", "diet/NN", "exercise/NN",
     "acupuncture/NN"},
    {"availability/NN", "approval/NN", "pharmacy/NN", "prescription/NN", "launch/NN", "supply/NN", "shortage/NN",
     "market/NN"},
    {"novelty/NN", "breakthrough/NN", "innovation/NN", "precedent/NN", "originality/NN", "invention/NN",
     "pioneer/NN", "milestone/NN"},
    {"release/NN", "statement/NN", "spokesperson/NN", "announcement/NN", "bulletin/NN", "communique/NN",
     "press/NN", "memo/NN"},
}};

const std::array<std::string_view, kCriterionCount> kPlantedCategory = {"Money", "", "", "", "", "", "", "", "", ""};
const std::array<double, kCriterionCount> kPresence = {0.45, 0.55, 0.40, 0.50, 0.35, 0.50, 0.45, 0.60, 0.40, 0.50};

const std::vector<std::string_view> kNN = {
    "study", "doctor", "disease", "treatment", "hospital", "researcher", "heart", "brain", "blood", "cancer",
    "diabetes", "drug", "pill", "vaccine", "surgery", "symptom", "condition", "result", "journal", "week", "year",
    "month", "day", "group", "scientist", "nurse", "clinic", "care", "life", "memory", "sleep", "weight", "pain",
    "infection", "virus", "cell", "gene", "protein", "dose", "level", "test", "scan", "procedure", "medicine",
    "child", "woman", "man", "adult", "age", "body", "skin", "liver", "kidney", "lung", "bone", "muscle", "stress",
    "mood", "behavior", "habit", "food", "water", "coffee", "alcohol", "smoking", "obesity", "pressure",
    "cholesterol", "inflammation", "recovery", "analysis", "patient", "team", "author", "professor", "university",
    "country", "community", "population", "family", "parent", "school", "neighborhood", "city", "region",
    "question", "answer", "problem", "approach", "method", "device", "tool", "program", "system", "network",
    "signal", "marker", "hormone", "enzyme", "tissue", "tumor", "therapy", "antibody", "immunity", "nutrient",
    "vitamin", "mineral", "fiber", "sugar", "salt", "fat", "meal", "breakfast", "dinner", "walk", "run", "swim",
    "screen", "phone", "app", "website", "report", "paper", "article", "story", "headline", "reporter", "editor",
};
const std::vector<std::string_view> kNNS = {
    "patients", "studies", "doctors", "researchers", "people", "women", "men", "children", "adults", "results",
    "symptoms", "drugs", "years", "weeks", "months", "participants", "cells", "genes", "scientists", "findings",
    "volunteers", "mice", "rats", "nurses", "families", "parents", "teens", "seniors", "experts", "physicians",
    "hospitals", "clinics", "vaccines", "pills", "doses", "tests", "scans", "meals", "habits", "levels",
};
const std::vector<std::string_view> kJJ = {
    "new", "large", "small", "early", "recent", "clinical", "medical", "common", "serious", "significant",
    "effective", "high", "low", "healthy", "older", "younger", "chronic", "daily", "modest", "similar",
    "important", "rare", "severe", "mild", "normal", "regular", "strong", "weak", "long", "short", "certain",
    "possible", "likely", "unclear", "promising", "surprising", "safe", "simple", "complex", "national", "local",
    "global", "public", "private", "physical", "mental", "social", "genetic", "natural", "standard", "previous",
    "current", "future", "main", "major", "minor", "overall", "typical", "unusual", "obvious",
};
const std::vector<std::string_view> kJJR = {"higher", "lower", "better", "larger", "smaller", "greater", "longer",
                                            "shorter", "stronger", "weaker"};
const std::vector<std::string_view> kJJS = {"best", "largest", "highest", "lowest", "strongest", "biggest"};
const std::vector<std::string_view> kVBD = {
    "found", "reported", "showed", "suggested", "noted", "added", "explained", "observed", "measured",
    "described", "examined", "tested", "studied", "followed", "collected", "recruited", "compared", "linked",
    "tracked", "surveyed", "identified", "analyzed", "published", "warned", "argued", "cautioned", "estimated",
    "improved", "reduced", "increased", "changed", "treated", "helped", "lowered", "raised",
};
const std::vector<std::string_view> kVBZ = {"suggests", "shows", "remains", "appears", "seems", "includes",
                                            "involves", "requires", "affects", "explains", "helps", "means",
                                            "offers", "reduces", "improves", "increases", "lowers", "raises"};
const std::vector<std::string_view> kVBP = {"say", "suggest", "show", "remain", "appear", "believe", "include",
                                            "need", "want", "know", "think", "seem", "report", "agree"};
const std::vector<std::string_view> kVB = {"help", "improve", "reduce", "change", "treat", "prevent", "consider",
                                           "explain", "affect", "support", "measure", "confirm", "lower", "raise",
                                           "protect", "predict", "detect", "manage", "avoid", "understand"};
const std::vector<std::string_view> kVBG = {"using", "taking", "receiving", "following", "including", "growing",
                                            "improving", "reducing", "eating", "drinking", "sleeping", "walking",
                                            "living", "working", "getting"};
const std::vector<std::string_view> kVBN = {"published", "conducted", "designed", "based", "linked",
                                            "associated", "treated", "given", "shown", "found", "reported",
                                            "observed", "diagnosed", "prescribed", "limited", "known", "used"};
const std::vector<std::string_view> kRB = {"also", "often", "not", "never", "very", "still", "only", "however",
                                           "already", "recently", "usually", "probably", "quite", "rather",
                                           "currently", "nearly", "largely", "slightly", "clearly", "generally",
                                           "sometimes", "rarely", "significantly", "directly"};
const std::vector<std::string_view> kIN = {"in", "of", "for", "with", "on", "at", "from", "by", "about", "after",
                                           "before", "during", "among", "between", "through", "into", "over",
                                           "under", "without", "against", "across", "within"};
const std::vector<std::string_view> kDT = {"the", "the", "the", "a", "this", "that", "each", "every", "some",
                                           "another", "no"};
const std::vector<std::string_view> kMD = {"may", "might", "could", "would", "should", "can", "will", "must"};
const std::vector<std::string_view> kPRP = {"it", "they", "we", "he", "she", "them"};
const std::vector<std::string_view> kPRPS = {"its", "their", "our", "his", "her"};
const std::vector<std::string_view> kCD = {"two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
                                           "twelve", "twenty", "hundred", "thousand"};
const std::vector<std::string_view> kRBR = {"more", "less"};

const std::vector<std::string_view> kHonorific = {"Dr.", "Dr.", "Prof.", "Mr.", "Ms."};
const std::vector<std::string_view> kFirst = {"James", "Mary", "Robert", "Linda", "Michael", "Susan", "David",
                                              "Sarah", "Daniel", "Laura", "Peter", "Emily", "Paul", "Anna",
                                              "Thomas", "Rachel"};
const std::vector<std::string_view> kLast = {"Smith", "Johnson", "Lee", "Brown", "Garcia", "Miller", "Davis",
                                             "Wilson", "Moore", "Taylor", "Clark", "Lewis", "Walker", "Young",
                                             "Allen", "King"};
// Organization names as "Word/TAG" sequences.
const std::vector<std::string_view> kOrgs = {
    "Mayo/NNP Clinic/NNP",
    "Harvard/NNP University/NNP",
    "Cleveland/NNP Clinic/NNP",
    "Johns/NNP Hopkins/NNP University/NNP",
    "American/NNP Heart/NNP Association/NNP",
    "National/NNP Institutes/NNPS of/IN Health/NNP",
    "Stanford/NNP University/NNP",
    "FDA/NNP",
    "Karolinska/NNP Institute/NNP",
    "Boston/NNP Medical/NNP Center/NNP",
};

const std::vector<std::string_view> kTemplates = {
    "DT JJ NN VBD DT NN IN DT NN .",
    "NNS VBD that/IN DT NN MD VB NNS IN DT NN .",
    "PERSON , DT NN IN ORG , said/VBD DT NNS were/VBD JJ .",
    "DT NN VBZ RB JJ IN NNS IN DT NN .",
    "IN DT NN , NNS VBD DT JJR NN IN NNS .",
    "PRP VBD DT NN IN CD NNS IN DT JJ NN .",
    "DT NNS VBP JJ , but/CC DT NN VBZ RB VBN .",
    "there/EX was/VBD DT JJ NN IN NNS who/WP VBD DT NN .",
    "according/VBG to/TO PERSON , DT NN VBZ DT JJS NN IN DT NN .",
    "NNS IN ORG VBD DT NN IN CD NNS .",
    "DT NN MD RB VB DT NN IN NNS .",
    "PRPS NN was/VBD VBN IN DT NN IN ORG .",
    "NNS VBG DT NN VBD JJR NNS than/IN NNS VBG DT NN .",
    "it/PRP is/VBZ RB JJ to/TO VB DT NN IN NNS .",
    "when/WRB NNS VBP DT NN , PRP VBP to/TO VB DT JJ NN .",
    "DT JJ NN , which/WDT was/VBD VBN IN DT NN , VBD NNS .",
    "RBR NNS VBP JJ NN than/IN DT NN .",
    "PERSON VBD that/IN DT NNS VBD DT RB JJ NN .",
    "DT NN IN NNS has/VBZ VBN JJR IN DT JJ NNS .",
    "NNS MD VB PRPS NN IN DT NN .",
    "the/DT NNS are/VBP JJ and/CC VBP JJ NNS .",
    "PRP VBZ RB JJ whether/IN DT NN VBZ NNS .",
    "DT NN VBD DT TERM NN IN NNS .",
    "TERM VBZ DT JJ NN IN DT NN .",
    "NNS VBG TERM VBD JJR NNS than/IN NNS .",
    "PERSON VBD DT TERM NN IN ORG .",
};

const std::vector<std::string_view> kPlantTemplates = {
    "DT JJ PLANT VBD DT NNS IN DT NN .",
    "NNS VBD that/IN DT PLANT IN DT NN was/VBD JJ .",
    "PERSON VBD that/IN DT PLANT MD VB NNS .",
    "DT PLANT IN DT NN VBZ RB JJ .",
    "IN DT NN , DT PLANT VBD JJR IN NNS VBD .",
};

// Verb and adjective uses of planted nouns, seen only by the tagger.
const std::vector<std::string_view> kSeedOnly = {
    "DT NN MD cost/VB NNS .",
    "DT NN costs/VBZ RB JJ .",
    "the/DT NNS cost/VBD DT JJ NN .",
    "PRP MD release/VB DT NN .",
    "NNS VBD to/TO harm/VB DT NN .",
    "DT NN may/MD supply/VB NNS .",
    "ORG will/MD launch/VB DT NN .",
    "DT NN was/VBD released/VBN IN NNS .",
    "PRP priced/VBD DT NN RB .",
    "NNS MD exercise/VB DT NN IN DT NN .",
    "DT NN is/VBZ an/DT alternative/JJ NN .",
    "PRP VBD to/TO sample/VB DT NN .",
    "the/DT NNS were/VBD insured/VBN .",
    "oh/UH , DT NN was/VBD JJ .",
    "PRP VBD up/RP DT NN .",
    "DT NN VBD most/RBS JJ .",
    "all/PDT the/DT NNS VBD .",
    "whose/WP$ NN VBD ?",
    "the/DT study/NN 's/POS NN VBD .",
    "NNS VBD JJ NNS , and/CC DT NN VBD it/PRP .",
    "Americans/NNPS VBD NNS .",
    "the/DT NN VBD et/FW al/FW .",
    "where/WRB do/VBP NNS VB ?",
    "my/PRP$ NN is/VBZ JJ .",
    "you/PRP VBP DT NN .",
    "i/PRP VBD DT NN .",
};

struct Token {
    std::string text;
    std::string tag;  // empty for punctuation
};

bool is_planted_collision(std::string_view word, const std::set<std::string>& planted_norms,
                          const CategoryLexicon& lexicon, std::size_t money) {
    std::string lower(word);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto n = normalize_token(lower, Normalizer::LemmaThenStem);
    return planted_norms.contains(n) || lexicon.matches(money, n);
}

class Grammar {
public:
    Grammar() {
        const auto lexicon = CategoryLexicon::builtin();
        std::size_t money = 0;
        for (std::size_t c = 0; c < lexicon.size(); ++c)
            if (lexicon.categories()[c].name == "Money") money = c;
        for (const auto& words : kPlanted)
            for (auto w : words) planted_norms_.insert(normalize_token(split(w).first, Normalizer::LemmaThenStem));
        const auto add = [&](std::string_view tag, const std::vector<std::string_view>& words) {
            Pool& p = pools_[std::string(tag)];
            for (auto w : words)
                if (!is_planted_collision(w, planted_norms_, lexicon, money)) p.emplace_back(w);
        };
        add("NN", kNN);
        add("NNS", kNNS);
        add("JJ", kJJ);
        add("JJR", kJJR);
        add("JJS", kJJS);
        add("VBD", kVBD);
        add("VBZ", kVBZ);
        add("VBP", kVBP);
        add("VB", kVB);
        add("VBG", kVBG);
        add("VBN", kVBN);
        add("RB", kRB);
        add("IN", kIN);
        add("DT", kDT);
        add("MD", kMD);
        add("PRP", kPRP);
        add("PRPS", kPRPS);
        add("CD", kCD);
        add("RBR", kRBR);

        // Invented drug and product names with a long-tailed usage profile.
        static constexpr std::array<std::string_view, 16> kOnset = {"b", "c", "d", "f", "g", "l", "m", "n",
                                                                     "p", "r", "s", "t", "v", "x", "z", "tr"};
        static constexpr std::array<std::string_view, 6> kVowel = {"a", "e", "i", "o", "u", "y"};
        static constexpr std::array<std::string_view, 8> kCoda = {"n", "x", "l", "r", "m", "vin", "zol", "tide"};
        std::mt19937_64 name_rng(1);
        std::set<std::string> seen;
        while (terms_.size() < 1500) {
            std::string name;
            const std::size_t syllables = 2 + pick_index(name_rng, 2);
            for (std::size_t k = 0; k < syllables; ++k) {
                name += kOnset[pick_index(name_rng, kOnset.size())];
                name += kVowel[pick_index(name_rng, kVowel.size())];
            }
            name += kCoda[pick_index(name_rng, kCoda.size())];
            if (!seen.insert(name).second || is_planted_collision(name, planted_norms_, lexicon, money)) continue;
            terms_.push_back(std::move(name));
        }
    }

    static std::pair<std::string, std::string> split(std::string_view wt) {
        const auto slash = wt.rfind('/');
        return {std::string(wt.substr(0, slash)), std::string(wt.substr(slash + 1))};
    }

    const std::set<std::string>& planted_norms() const { return planted_norms_; }

    std::vector<std::string> vocabulary() const {
        std::set<std::string> words;
        for (const auto& [tag, pool] : pools_) words.insert(pool.begin(), pool.end());
        words.insert(terms_.begin(), terms_.end());
        return {words.begin(), words.end()};
    }

    // Expands a template; `plant` fills the PLANT slot.
    std::vector<Token> expand(std::string_view tmpl, std::mt19937_64& rng, std::string_view plant = {}) const {
        std::vector<Token> out;
        std::istringstream in{std::string(tmpl)};
        std::string slot;
        while (in >> slot) {
            if (slot == "," || slot == "." || slot == "?") {
                out.push_back({slot, ""});
            } else if (slot == "PERSON") {
                if (pick_index(rng, 3) > 0) {
                    std::string h(kHonorific[pick_index(rng, kHonorific.size())]);
                    out.push_back({h, "NNP"});
                }
                out.push_back({std::string(kFirst[pick_index(rng, kFirst.size())]), "NNP"});
                out.push_back({std::string(kLast[pick_index(rng, kLast.size())]), "NNP"});
            } else if (slot == "ORG") {
                out.push_back({"the", "DT"});
                std::istringstream org{std::string(kOrgs[pick_index(rng, kOrgs.size())])};
                std::string wt;
                while (org >> wt) {
                    auto [w, t] = split(wt);
                    out.push_back({w, t});
                }
            } else if (slot == "TERM") {
                // log-uniform rank: a few names are common, most are rare
                const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                const auto rank = static_cast<std::size_t>(std::exp(u * std::log(static_cast<double>(terms_.size()))));
                out.push_back({terms_[std::min(rank, terms_.size()) - 1], "NN"});
            } else if (slot == "PLANT") {
                auto [w, t] = split(plant);
                out.push_back({w, t});
            } else if (slot.find('/') != std::string::npos) {
                auto [w, t] = split(slot);
                out.push_back({w, t});
            } else {
                const Pool& p = pools_.at(slot);
                out.push_back({p[pick_index(rng, p.size())], slot == "PRPS" ? "PRP$" : slot});
            }
        }
        return out;
    }

    static std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }

private:
    std::map<std::string, Pool> pools_;
    Pool terms_;
    std::set<std::string> planted_norms_;
};

const Grammar& grammar() {
    static const Grammar g;
    return g;
}

std::string render(const std::vector<Token>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t.tag.empty() || t.tag == "POS") {
            out += t.text;
            continue;
        }
        if (!out.empty()) out += ' ';
        std::string w = t.text;
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        out += w;
    }
    return out;
}

std::string pick_template(const std::vector<std::string_view>& templates, std::mt19937_64& rng) {
    return std::string(templates[Grammar::pick_index(rng, templates.size())]);
}

const std::vector<std::string> kOutlets = {"dailyhealthnews.com", "nytimes.com", "cnn.com", "reuters.com",
                                           "medicalwire.org", "bbc.co.uk"};
const std::vector<std::string> kExternal = {"nih.gov", "cdc.gov", "who.int", "nejm.org", "jamanetwork.com",
                                           "thelancet.com", "bmj.com", "webmd.com", "mayoclinic.org",
                                           "example.com", "healthblog.net", "wellnesstips.info"};

}  // namespace

bool PlantedCorpus::is_planted_feature(const FeatureInfo& feature, CriterionId criterion) const {
    const auto& words = planted_words[criterion.index()];
    const auto colon = feature.name.find(':');
    const std::string body = colon == std::string::npos ? feature.name : feature.name.substr(colon + 1);
    switch (feature.family) {
        case Family::LEX:
            return !planted_category[criterion.index()].empty() && body == planted_category[criterion.index()];
        case Family::TFIDF:
            return std::any_of(words.begin(), words.end(), [&](const std::string& w) {
                return normalize_token(w, Normalizer::LemmaThenStem) == body;
            });
        case Family::POSWORD: {
            const auto us = body.rfind('_');
            const std::string token = body.substr(0, us);
            return std::find(words.begin(), words.end(), token) != words.end();
        }
        default: return false;
    }
}

PlantedCorpus make_planted_corpus(const PlantedConfig& config) {
    if (config.articles < 20) throw UsageError("planted corpus needs at least 20 articles");
    if (config.label_noise < 0 || config.label_noise >= 0.5) throw UsageError("label_noise must be in [0, 0.5)");
    const Grammar& g = grammar();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PlantedCorpus pc;
    for (int c = 0; c < kCriterionCount; ++c) {
        for (auto wt : kPlanted[c]) pc.planted_words[c].push_back(Grammar::split(wt).first);
        pc.planted_category[c] = std::string(kPlantedCategory[c]);
    }

    for (std::size_t a = 0; a < config.articles; ++a) {
        char id[32];
        std::snprintf(id, sizeof id, "planted-%04zu", a + 1);
        Article art;
        art.id = id;
        CriterionLabels labels;
        labels.article_id = art.id;
        std::array<bool, kCriterionCount> present{};

        std::vector<std::string> sentences;
        const std::size_t filler = 10 + Grammar::pick_index(rng, 7);
        for (std::size_t s = 0; s < filler; ++s) sentences.push_back(render(g.expand(pick_template(kTemplates, rng), rng)));
        for (int c = 0; c < kCriterionCount; ++c) {
            if (unit(rng) < config.na_rate) {
                labels.labels[c] = Label::NotApplicable;
                continue;
            }
            present[c] = unit(rng) < kPresence[c];
            if (present[c]) {
                const std::size_t count = 5 + Grammar::pick_index(rng, 4);
                for (std::size_t k = 0; k < count; ++k) {
                    const auto plant = kPlanted[c][Grammar::pick_index(rng, kPlanted[c].size())];
                    sentences.push_back(render(g.expand(pick_template(kPlantTemplates, rng), rng, plant)));
                }
            }
            bool satisfactory = present[c];
            if (unit(rng) < config.label_noise) satisfactory = !satisfactory;
            labels.labels[c] = satisfactory ? Label::Satisfactory : Label::NotSatisfactory;
        }
        std::shuffle(sentences.begin(), sentences.end(), rng);
        for (std::size_t s = 0; s < sentences.size(); ++s) {
            if (s > 0) art.body += (s % 5 == 0) ? "\n\n" : " ";
            art.body += sentences[s];
        }
        auto title = g.expand("JJ NN VBZ NNS IN NN", rng);
        for (auto& t : title) t.text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t.text[0])));
        art.title = render(title);

        const std::string& outlet = kOutlets[Grammar::pick_index(rng, kOutlets.size())];
        art.source_url = "https://www." + outlet + "/health/" + art.id;
        const std::size_t internal = Grammar::pick_index(rng, 3);
        for (std::size_t k = 0; k < internal; ++k)
            art.links.push_back("https://www." + outlet + "/health/related-" + std::to_string(Grammar::pick_index(rng, 500)));
        const std::size_t external = Grammar::pick_index(rng, 4);
        for (std::size_t k = 0; k < external; ++k) {
            const std::string link = "https://" + kExternal[Grammar::pick_index(rng, kExternal.size())] + "/page/" +
                                     std::to_string(Grammar::pick_index(rng, 1000));
            if (std::find(art.links.begin(), art.links.end(), link) == art.links.end()) art.links.push_back(link);
        }
        art.fetched_at = "2017-05-01";
        pc.corpus.articles.push_back(std::move(art));
        pc.corpus.labels.push_back(std::move(labels));
        pc.present.push_back(present);
    }
    validate_corpus(pc.corpus);
    return pc;
}

std::vector<TaggedSentence> tagged_sentences(std::size_t count, std::uint64_t seed) {
    const Grammar& g = grammar();
    std::mt19937_64 rng(seed);
    std::vector<TaggedSentence> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t kind = Grammar::pick_index(rng, 10);
        std::vector<Token> tokens;
        if (kind < 6) {
            tokens = g.expand(pick_template(kTemplates, rng), rng);
        } else if (kind < 9) {
            const auto& words = kPlanted[Grammar::pick_index(rng, kPlanted.size())];
            tokens = g.expand(pick_template(kPlantTemplates, rng), rng, words[Grammar::pick_index(rng, words.size())]);
        } else {
            tokens = g.expand(pick_template(kSeedOnly, rng), rng);
        }
        TaggedSentence s;
        for (const auto& t : tokens) {
            if (t.tag.empty()) continue;
            std::string w;
            for (char ch : t.text)
                if (ch != '.' && ch != '\'') w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            if (w.empty()) continue;
            s.words.push_back(std::move(w));
            s.tags.push_back(t.tag);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> filler_vocabulary() { return grammar().vocabulary(); }

}  // namespace hg::synth
