#include "healthgrade/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>

#include "healthgrade/binio.hpp"
#include "healthgrade/common.hpp"
#include "healthgrade/resources.hpp"

namespace hg {

namespace {

constexpr std::string_view kMagic = "HGTAGGER";
const std::string kStart1 = "-START-";
const std::string kStart2 = "-START2-";
const std::string kEnd1 = "-END-";
const std::string kEnd2 = "-END2-";

std::string normalize(const std::string& word) {
    if (word.find('-') != std::string::npos && word.front() != '-') return "!HYPHEN";
    const bool all_digits = !word.empty() && std::all_of(word.begin(), word.end(), [](unsigned char c) {
        return std::isdigit(c);
    });
    if (all_digits && word.size() == 4) return "!YEAR";
    if (!word.empty() && std::isdigit(static_cast<unsigned char>(word.front()))) return "!DIGITS";
    std::string lower = word;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower;
}

std::string suffix3(const std::string& w) { return w.size() <= 3 ? w : w.substr(w.size() - 3); }

std::vector<std::string> context_of(std::span<const std::string> tokens) {
    std::vector<std::string> ctx;
    ctx.reserve(tokens.size() + 4);
    ctx.push_back(kStart1);
    ctx.push_back(kStart2);
    for (const auto& t : tokens) ctx.push_back(normalize(t));
    ctx.push_back(kEnd1);
    ctx.push_back(kEnd2);
    return ctx;
}

std::vector<std::string> features_at(std::size_t i, const std::string& word,
                                     const std::vector<std::string>& ctx, const std::string& prev,
                                     const std::string& prev2) {
    i += 2;
    std::vector<std::string> f;
    f.reserve(14);
    f.emplace_back("bias");
    f.push_back("i suffix " + suffix3(word));
    f.push_back("i pref1 " + word.substr(0, 1));
    f.push_back("i-1 tag " + prev);
    f.push_back("i-2 tag " + prev2);
    f.push_back("i tag+i-2 tag " + prev + " " + prev2);
    f.push_back("i word " + ctx[i]);
    f.push_back("i-1 tag+i word " + prev + " " + ctx[i]);
    f.push_back("i-1 word " + ctx[i - 1]);
    f.push_back("i-1 suffix " + suffix3(ctx[i - 1]));
    f.push_back("i-2 word " + ctx[i - 2]);
    f.push_back("i+1 word " + ctx[i + 1]);
    f.push_back("i+1 suffix " + suffix3(ctx[i + 1]));
    f.push_back("i+2 word " + ctx[i + 2]);
    return f;
}

}  // namespace

const std::vector<std::string>& penn_tagset() {
    static const std::vector<std::string> tags = {
        "CC", "CD",  "DT",  "EX",  "FW",  "IN",  "JJ",   "JJR", "JJS", "MD",  "NN",  "NNS",
        "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB",  "RBR", "RBS", "RP",  "SYM", "TO",
        "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ",  "WDT", "WP",  "WP$", "WRB",
    };
    return tags;
}

std::vector<TaggedSentence> parse_tagged_sentences(std::string_view text) {
    std::vector<TaggedSentence> out;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        TaggedSentence s;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && line[i] == ' ') ++i;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ') ++j;
            if (j > i) {
                const std::string item = line.substr(i, j - i);
                const auto slash = item.rfind('/');
                if (slash == std::string::npos || slash == 0 || slash + 1 == item.size())
                    throw DataError("tagged corpus line " + std::to_string(line_no) +
                                    ": expected word/TAG, got '" + item + "'");
                s.words.push_back(item.substr(0, slash));
                s.tags.push_back(item.substr(slash + 1));
            }
            i = j;
        }
        if (!s.words.empty()) out.push_back(std::move(s));
    }
    return out;
}

int PerceptronTagger::tag_index(std::string_view tag) const {
    for (std::size_t i = 0; i < tags_.size(); ++i)
        if (tags_[i] == tag) return static_cast<int>(i);
    return -1;
}

int PerceptronTagger::predict(const std::vector<std::string>& features) const {
    std::vector<double> scores(tags_.size(), 0.0);
    for (const auto& f : features) {
        auto it = weights_.find(f);
        if (it == weights_.end()) continue;
        for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += it->second[c];
    }
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<std::string> PerceptronTagger::tag(std::span<const std::string> tokens) const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    if (tags_.empty()) throw DataError("tagger has no weights loaded");
    const auto ctx = context_of(tokens);
    std::string prev = kStart1, prev2 = kStart2;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        int t;
        if (auto it = tagdict_.find(tokens[i]); it != tagdict_.end()) {
            t = it->second;
        } else {
            t = predict(features_at(i, tokens[i], ctx, prev, prev2));
        }
        out.push_back(tags_[static_cast<std::size_t>(t)]);
        prev2 = prev;
        prev = out.back();
    }
    return out;
}

PerceptronTagger PerceptronTagger::train(const std::vector<TaggedSentence>& sentences,
                                         const std::vector<std::string>& tagset, int iterations,
                                         unsigned seed) {
    PerceptronTagger model;
    model.tags_ = tagset;
    const std::size_t n_tags = tagset.size();

    // Tag dictionary: frequent words that nearly always take one tag.
    std::map<std::string, std::map<std::string, int>> counts;
    for (const auto& s : sentences)
        for (std::size_t i = 0; i < s.words.size(); ++i) {
            if (model.tag_index(s.tags[i]) < 0)
                throw DataError("tag '" + s.tags[i] + "' is not in the tagset");
            ++counts[s.words[i]][s.tags[i]];
        }
    for (const auto& [word, dist] : counts) {
        int total = 0, best = 0;
        std::string best_tag;
        for (const auto& [t, c] : dist) {
            total += c;
            if (c > best) {
                best = c;
                best_tag = t;
            }
        }
        if (total >= 20 && static_cast<double>(best) / total >= 0.97)
            model.tagdict_[word] = model.tag_index(best_tag);
    }

    struct Slot {
        std::vector<double> w, total;
        std::vector<long> stamp;
    };
    std::map<std::string, Slot> params;
    long instance = 0;
    auto slot = [&](const std::string& f) -> Slot& {
        auto [it, inserted] = params.try_emplace(f);
        if (inserted) {
            it->second.w.assign(n_tags, 0.0);
            it->second.total.assign(n_tags, 0.0);
            it->second.stamp.assign(n_tags, 0);
        }
        return it->second;
    };
    auto bump = [&](Slot& s, int c, double v) {
        s.total[c] += static_cast<double>(instance - s.stamp[c]) * s.w[c];
        s.stamp[c] = instance;
        s.w[c] += v;
    };

    std::vector<std::size_t> order(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937 rng(seed);
    for (int iter = 0; iter < iterations; ++iter) {
        for (std::size_t si : order) {
            const auto& s = sentences[si];
            const auto ctx = context_of(s.words);
            std::string prev = kStart1, prev2 = kStart2;
            for (std::size_t i = 0; i < s.words.size(); ++i) {
                // Every token trains the weights so unseen words generalize;
                // the dictionary still decides the context tag.
                const auto feats = features_at(i, s.words[i], ctx, prev, prev2);
                std::vector<double> scores(n_tags, 0.0);
                for (const auto& f : feats) {
                    auto it2 = params.find(f);
                    if (it2 == params.end()) continue;
                    for (std::size_t c = 0; c < n_tags; ++c) scores[c] += it2->second.w[c];
                }
                int guess = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
                const int truth = model.tag_index(s.tags[i]);
                ++instance;
                if (guess != truth) {
                    for (const auto& f : feats) {
                        Slot& sl = slot(f);
                        bump(sl, truth, 1.0);
                        bump(sl, guess, -1.0);
                    }
                }
                if (auto it = model.tagdict_.find(s.words[i]); it != model.tagdict_.end()) guess = it->second;
                prev2 = prev;
                prev = tagset[static_cast<std::size_t>(guess)];
            }
        }
        std::shuffle(order.begin(), order.end(), rng);
    }

    for (auto& [f, s] : params) {
        Scores avg(n_tags, 0.0f);
        bool nonzero = false;
        for (std::size_t c = 0; c < n_tags; ++c) {
            const double total = s.total[c] + static_cast<double>(instance - s.stamp[c]) * s.w[c];
            const double v = instance > 0 ? total / static_cast<double>(instance) : 0.0;
            avg[c] = static_cast<float>(v);
            nonzero = nonzero || avg[c] != 0.0f;
        }
        if (nonzero) model.weights_.emplace(f, std::move(avg));
    }
    return model;
}

std::string PerceptronTagger::to_bytes() const {
    binio::Writer w;
    w.magic(kMagic, kFormatVersion);
    w.strings(tags_);
    std::vector<std::pair<std::string, int>> dict(tagdict_.begin(), tagdict_.end());
    std::sort(dict.begin(), dict.end());
    w.u64(dict.size());
    for (const auto& [word, t] : dict) {
        w.str(word);
        w.u32(static_cast<std::uint32_t>(t));
    }
    std::vector<const std::pair<const std::string, Scores>*> entries;
    for (const auto& e : weights_) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
    w.u64(entries.size());
    for (const auto* e : entries) {
        w.str(e->first);
        for (float v : e->second) w.pod(v);
    }
    return w.bytes();
}

PerceptronTagger PerceptronTagger::from_bytes(std::string bytes) {
    binio::Reader r(std::move(bytes));
    const auto version = r.magic(kMagic);
    if (version != kFormatVersion)
        throw DataError("unsupported tagger weights version " + std::to_string(version));
    PerceptronTagger m;
    m.tags_ = r.strings();
    const auto n_dict = r.u64();
    for (std::uint64_t i = 0; i < n_dict; ++i) {
        std::string word = r.str();
        const auto t = r.u32();
        if (t >= m.tags_.size()) throw DataError("tagger weights: tag index out of range");
        m.tagdict_.emplace(std::move(word), static_cast<int>(t));
    }
    const auto n_feat = r.u64();
    for (std::uint64_t i = 0; i < n_feat; ++i) {
        std::string f = r.str();
        Scores s(m.tags_.size());
        for (auto& v : s) v = r.pod<float>();
        m.weights_.emplace(std::move(f), std::move(s));
    }
    if (!r.at_end()) throw DataError("tagger weights: trailing bytes");
    return m;
}

PerceptronTagger PerceptronTagger::load(const std::string& path) { return from_bytes(read_file(path)); }

void PerceptronTagger::save(const std::string& path) const { write_file(path, to_bytes()); }

std::shared_ptr<const PerceptronTagger> PerceptronTagger::builtin() {
    static const auto instance =
        std::make_shared<const PerceptronTagger>(from_bytes(std::string(resources::tagger_weights())));
    return instance;
}

}  // namespace hg
