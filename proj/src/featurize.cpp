#include "healthgrade/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "healthgrade/binio.hpp"
#include "healthgrade/resources.hpp"

namespace hg {

namespace {

constexpr std::string_view kPipelineMagic = "HGFEATS";

// Second-level labels under which registrations happen one level deeper.
const std::unordered_set<std::string_view> kMultiPartSuffixes = {
    "co.uk", "org.uk", "ac.uk", "gov.uk", "nhs.uk", "me.uk", "ltd.uk", "plc.uk", "net.uk", "sch.uk",
    "com.au", "net.au", "org.au", "edu.au", "gov.au", "co.nz", "org.nz", "govt.nz", "ac.nz",
    "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp", "co.in", "org.in", "gov.in", "ac.in", "nic.in",
    "com.br", "gov.br", "org.br", "com.cn", "gov.cn", "edu.cn", "org.cn", "co.za", "org.za",
    "gov.za", "ac.za", "com.mx", "gob.mx", "co.kr", "or.kr", "go.kr", "ac.kr", "com.sg",
    "gov.sg", "edu.sg", "com.hk", "gov.hk", "co.il", "org.il", "ac.il", "com.tr", "gov.tr",
    "com.ar", "gob.ar", "com.es", "co.id", "go.id", "com.my", "gov.my", "com.ph", "gov.ph",
};

template <typename Key>
std::vector<Key> top_by_frequency(const std::map<Key, std::size_t>& freq, std::size_t cap) {
    std::vector<std::pair<Key, std::size_t>> items(freq.begin(), freq.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > cap) items.resize(cap);
    std::vector<Key> out;
    out.reserve(items.size());
    for (auto& [k, _] : items) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// ---------------------------------------------------------------- TF-IDF

double TfidfModel::idf(std::size_t term) const {
    const double ratio = static_cast<double>(n_docs) / static_cast<double>(df[term]);
    const double lg = config.log_base > 0.0 ? std::log(ratio) / std::log(config.log_base) : std::log(ratio);
    return 1.0 + lg;
}

std::vector<double> TfidfModel::idf_table() const {
    std::vector<double> out(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) out[i] = idf(i);
    return out;
}

void TfidfModel::rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < terms.size(); ++i) index.emplace(terms[i], static_cast<std::uint32_t>(i));
}

TfidfModel fit_tfidf(std::span<const std::vector<std::string>> docs, const TfidfConfig& config) {
    if (docs.size() < 3) throw DataError("TF-IDF fit needs at least 3 documents");
    std::map<std::string, std::size_t> df, cf;
    for (const auto& doc : docs) {
        std::set<std::string_view> seen;
        for (const auto& t : doc) {
            ++cf[t];
            if (seen.insert(t).second) ++df[t];
        }
    }
    const auto n = docs.size();
    const auto max_df = static_cast<std::size_t>(std::floor(config.max_df_ratio * static_cast<double>(n) + 1e-9));
    std::map<std::string, std::size_t> surviving;
    for (const auto& [term, d] : df)
        if (d >= config.min_df && d <= max_df) surviving.emplace(term, cf[term]);
    if (surviving.empty()) throw DataError("TF-IDF vocabulary is empty after document-frequency filtering");

    TfidfModel model;
    model.config = config;
    model.n_docs = n;
    model.terms = top_by_frequency(surviving, config.max_features);
    model.df.reserve(model.terms.size());
    for (const auto& t : model.terms) model.df.push_back(df[t]);
    model.rebuild_index();
    return model;
}

namespace {

SparseVector tfidf_with_idf(const TfidfModel& model, std::span<const double> idf,
                            std::span<const std::string> tokens) {
    SparseVector v;
    if (tokens.empty()) return v;
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& t : tokens)
        if (auto it = model.index.find(t); it != model.index.end()) ++counts[it->second];
    const double len = static_cast<double>(tokens.size());
    v.entries.reserve(counts.size());
    for (const auto& [i, c] : counts) v.entries.emplace_back(i, (static_cast<double>(c) / len) * idf[i]);
    return v;
}

}  // namespace

SparseVector tfidf_vector(const TfidfModel& model, std::span<const std::string> tokens) {
    const auto idf = model.idf_table();
    return tfidf_with_idf(model, idf, tokens);
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
    double na = 0, nb = 0, d = 0;
    for (const auto& [_, v] : a.entries) na += v * v;
    for (const auto& [_, v] : b.entries) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    auto ia = a.entries.begin(), ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            d += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return std::clamp(d / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double headline_body_similarity(std::span<const std::string> title_tokens,
                                std::span<const std::string> body_tokens, const TfidfModel& model) {
    const auto idf = model.idf_table();
    return cosine_similarity(tfidf_with_idf(model, idf, title_tokens), tfidf_with_idf(model, idf, body_tokens));
}

// --------------------------------------------------------------- lexicon

CategoryLexicon CategoryLexicon::parse(std::string_view text) {
    CategoryLexicon lex;
    std::map<std::string, std::size_t> position;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw DataError("lexicon line " + std::to_string(line_no) + ": expected category<TAB>pattern");
        std::string name = line.substr(0, tab);
        std::string pattern = line.substr(tab + 1);
        std::transform(pattern.begin(), pattern.end(), pattern.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (pattern == "*") throw DataError("lexicon line " + std::to_string(line_no) + ": bare '*' pattern");
        auto [it, inserted] = position.emplace(name, lex.categories_.size());
        if (inserted) lex.categories_.push_back({name, {}, {}});
        Category& cat = lex.categories_[it->second];
        if (pattern.back() == '*') cat.prefixes.push_back(pattern.substr(0, pattern.size() - 1));
        else cat.exact.push_back(pattern);
    }
    for (auto& c : lex.categories_) {
        std::sort(c.exact.begin(), c.exact.end());
        c.exact.erase(std::unique(c.exact.begin(), c.exact.end()), c.exact.end());
    }
    return lex;
}

CategoryLexicon CategoryLexicon::load(const std::string& path) { return parse(read_file(path)); }

CategoryLexicon CategoryLexicon::builtin() { return parse(resources::lexicon()); }

bool CategoryLexicon::matches(std::size_t category, std::string_view token) const {
    const Category& c = categories_[category];
    if (std::binary_search(c.exact.begin(), c.exact.end(), token)) return true;
    return std::any_of(c.prefixes.begin(), c.prefixes.end(),
                       [&](const std::string& p) { return token.starts_with(p); });
}

std::string CategoryLexicon::to_text() const {
    std::string out;
    for (const auto& c : categories_) {
        for (const auto& p : c.exact) out += c.name + "\t" + p + "\n";
        for (const auto& p : c.prefixes) out += c.name + "\t" + p + "*\n";
    }
    return out;
}

std::vector<double> lexicon_features(std::span<const std::string> tokens, const CategoryLexicon& lexicon,
                                     std::size_t sentence_count) {
    std::vector<double> out(lexicon.size() + kLexiconStructural, 0.0);
    if (tokens.empty()) return out;
    const double n = static_cast<double>(tokens.size());
    for (std::size_t c = 0; c < lexicon.size(); ++c) {
        std::size_t hits = 0;
        for (const auto& t : tokens)
            if (lexicon.matches(c, t)) ++hits;
        out[c] = 100.0 * static_cast<double>(hits) / n;
    }
    std::size_t six = 0;
    for (const auto& t : tokens)
        if (t.size() > 6) ++six;
    out[lexicon.size()] = n;
    out[lexicon.size() + 1] = n / static_cast<double>(std::max<std::size_t>(1, sentence_count));
    out[lexicon.size() + 2] = 100.0 * static_cast<double>(six) / n;
    return out;
}

std::vector<std::string> lexicon_feature_names(const CategoryLexicon& lexicon) {
    std::vector<std::string> names;
    for (const auto& c : lexicon.categories()) names.push_back(c.name);
    names.emplace_back("WC");
    names.emplace_back("WPS");
    names.emplace_back("Sixltr");
    return names;
}

std::size_t count_sentences(std::string_view raw_text) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < raw_text.size(); ++i) {
        const char c = raw_text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i;
        while (j + 1 < raw_text.size() && (raw_text[j + 1] == '.' || raw_text[j + 1] == '!' || raw_text[j + 1] == '?')) ++j;
        if (j + 1 == raw_text.size() || std::isspace(static_cast<unsigned char>(raw_text[j + 1]))) ++n;
        i = j;
    }
    return std::max<std::size_t>(1, n);
}

// ------------------------------------------------------------------- POS

PosCounts pos_features(std::span<const TaggedToken> tagged, const std::vector<std::string>& tagset) {
    PosCounts out;
    out.tag_counts.assign(tagset.size(), 0.0);
    for (const auto& tt : tagged) {
        auto it = std::find(tagset.begin(), tagset.end(), tt.tag);
        if (it == tagset.end()) continue;
        out.tag_counts[static_cast<std::size_t>(it - tagset.begin())] += 1.0;
        out.word_counts[tt.token + "_" + tt.tag] += 1.0;
    }
    return out;
}

// ----------------------------------------------------------------- links

RankTable RankTable::parse(std::string_view text) {
    RankTable table;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0)
            throw DataError("rank table line " + std::to_string(line_no) + ": expected domain,rank");
        std::string domain = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        std::uint64_t rank = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), rank);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            if (line_no == 1) continue;  // header
            throw DataError("rank table line " + std::to_string(line_no) + ": bad rank '" + value + "'");
        }
        if (rank < 1) throw DataError("rank table line " + std::to_string(line_no) + ": rank must be >= 1");
        std::transform(domain.begin(), domain.end(), domain.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        table.ranks_[registered_domain(domain)] = rank;
    }
    return table;
}

RankTable RankTable::load(const std::string& path) { return parse(read_file(path)); }

RankTable RankTable::builtin() { return parse(resources::ranks()); }

std::uint64_t RankTable::rank(std::string_view domain) const {
    auto it = ranks_.find(domain);
    if (it == ranks_.end()) it = ranks_.find(registered_domain(domain));
    return it == ranks_.end() ? default_rank_ : it->second;
}

void RankTable::set(std::string domain, std::uint64_t rank) {
    if (rank < 1) throw DataError("rank must be >= 1");
    ranks_[std::move(domain)] = rank;
}

std::string RankTable::to_text() const {
    std::string out = "domain,rank\n";
    for (const auto& [d, r] : ranks_) out += d + "," + std::to_string(r) + "\n";
    return out;
}

std::string registered_domain(std::string_view host) {
    std::string h(host);
    while (!h.empty() && h.back() == '.') h.pop_back();
    std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool numeric = !h.empty() && std::all_of(h.begin(), h.end(), [](unsigned char c) {
        return std::isdigit(c) || c == '.';
    });
    if (numeric) return h;
    std::vector<std::size_t> dots;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] == '.') dots.push_back(i);
    if (dots.empty()) return h;
    auto tail = [&](std::size_t labels) -> std::string {
        if (labels > dots.size()) return h;
        return h.substr(dots[dots.size() - labels] + 1);
    };
    const std::string last_two = tail(2);
    if (dots.size() >= 2 && kMultiPartSuffixes.contains(last_two)) return tail(3);
    if (dots.size() == 1 && kMultiPartSuffixes.contains(h)) return h;
    return last_two;
}

LinkSummary summarize_links(const Article& article) {
    LinkSummary out;
    const auto source_host = url_host(article.source_url);
    const std::string source = source_host ? registered_domain(*source_host) : std::string();
    std::set<std::string> external;
    for (const auto& link : article.links) {
        const auto host = url_host(link);
        if (!host) {
            warn("article '" + article.id + "': skipping unparsable link '" + link + "'");
            continue;
        }
        const std::string domain = registered_domain(*host);
        if (!source.empty() && domain == source) {
            ++out.internal;
        } else {
            ++out.external;
            external.insert(domain);
        }
    }
    out.external_domains.assign(external.begin(), external.end());
    return out;
}

LinkFeatures link_features(const Article& article, const RankTable& table,
                           std::span<const std::string> known_domains) {
    const LinkSummary s = summarize_links(article);
    LinkFeatures out{s.internal, s.external, {}};
    for (const auto& d : s.external_domains) {
        auto it = std::lower_bound(known_domains.begin(), known_domains.end(), d);
        if (it != known_domains.end() && *it == d)
            out.ranks.emplace_back(static_cast<std::size_t>(it - known_domains.begin()),
                                   static_cast<double>(table.rank(d)));
    }
    return out;
}

// ------------------------------------------------------------------ misc

MiscFeatures misc_features(std::span<const std::string> tokens, std::string_view raw_body,
                           const EntityRecognizer& recognizer) {
    MiscFeatures m;
    if (tokens.empty()) return m;
    std::unordered_set<std::string_view> distinct(tokens.begin(), tokens.end());
    m.distinct_ratio = static_cast<double>(distinct.size()) / static_cast<double>(tokens.size());
    const EntityCounts e = recognizer.count(raw_body);
    m.persons = e.persons;
    m.organizations = e.organizations;
    return m;
}

// --------------------------------------------------------- feature space

std::string_view family_name(Family f) {
    static constexpr std::array<std::string_view, kFamilyCount> names = {
        "LEX", "TFIDF", "POSTAG", "POSWORD", "LINK", "RANK", "SIM", "MISC"};
    return names[static_cast<std::size_t>(f)];
}

FeatureSpace::FeatureSpace(std::vector<FeatureInfo> features) : features_(std::move(features)) {
    std::unordered_set<std::string_view> names;
    std::size_t prev_family = 0;
    for (auto& r : ranges_) r = {0, 0};
    std::string digest_input;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const auto fam = static_cast<std::size_t>(features_[i].family);
        if (fam < prev_family) throw DataError("feature space families out of order at " + features_[i].name);
        if (!names.insert(features_[i].name).second)
            throw DataError("duplicate feature name '" + features_[i].name + "'");
        if (ranges_[fam].second == 0 && ranges_[fam].first == 0) ranges_[fam] = {i, i};
        ranges_[fam].second = i + 1;
        prev_family = fam;
        digest_input += features_[i].name;
        digest_input += '\t';
        digest_input += family_name(features_[i].family);
        digest_input += '\n';
    }
    // Empty families sit at the end of the preceding block.
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < kFamilyCount; ++f) {
        if (ranges_[f].second == 0) ranges_[f] = {cursor, cursor};
        cursor = ranges_[f].second;
    }
    fingerprint_ = sha256_hex(digest_input);
}

std::pair<std::size_t, std::size_t> FeatureSpace::family_range(Family f) const {
    return ranges_[static_cast<std::size_t>(f)];
}

std::size_t FeatureSpace::family_size(Family f) const {
    const auto [b, e] = family_range(f);
    return e - b;
}

std::string FeatureSpace::manifest() const {
    std::string out = "# fingerprint " + fingerprint_ + "\nindex\tfamily\tname\n";
    for (std::size_t i = 0; i < features_.size(); ++i) {
        out += std::to_string(i);
        out += '\t';
        out += family_name(features_[i].family);
        out += '\t';
        out += features_[i].name;
        out += '\n';
    }
    return out;
}

Analyzers Analyzers::defaults() {
    return {PerceptronTagger::builtin(), std::make_shared<const GazetteerRecognizer>()};
}

AnalyzedDocument analyze(const Article& article, const CleanDocument& clean, const Analyzers& analyzers) {
    AnalyzedDocument doc;
    doc.clean = clean;
    doc.tags = analyzers.tagger->tag(clean.surface_tokens);
    doc.entities = analyzers.recognizer->count(article.body);
    doc.sentences = count_sentences(article.body);
    doc.links = summarize_links(article);
    return doc;
}

std::vector<AnalyzedDocument> analyze_all(std::span<const Article> articles,
                                          std::span<const CleanDocument> clean,
                                          const Analyzers& analyzers) {
    if (articles.size() != clean.size()) throw DataError("analyze_all: article/document count mismatch");
    std::vector<AnalyzedDocument> out(articles.size());
    const auto n = static_cast<std::ptrdiff_t>(articles.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = analyze(articles[i], clean[i], analyzers);
    return out;
}

std::vector<AnalyzedDocument> analyze_all_serial(std::span<const Article> articles,
                                                 std::span<const CleanDocument> clean,
                                                 const Analyzers& analyzers) {
    if (articles.size() != clean.size()) throw DataError("analyze_all: article/document count mismatch");
    std::vector<AnalyzedDocument> out;
    out.reserve(articles.size());
    for (std::size_t i = 0; i < articles.size(); ++i) out.push_back(analyze(articles[i], clean[i], analyzers));
    return out;
}

// ------------------------------------------------------------ pipeline

FeaturePipeline FeaturePipeline::fit(std::span<const AnalyzedDocument> train, const CategoryLexicon& lexicon,
                                     const RankTable& ranks, const std::vector<std::string>& tagset,
                                     const FeaturizerConfig& config) {
    FeaturePipeline p;
    p.lexicon_ = lexicon;
    p.ranks_ = ranks;
    p.tagset_ = tagset;

    std::vector<std::vector<std::string>> bodies;
    bodies.reserve(train.size());
    for (const auto& d : train) bodies.push_back(d.clean.body_tokens);
    p.tfidf_ = fit_tfidf(bodies, config.tfidf);

    const std::unordered_set<std::string_view> known_tags(tagset.begin(), tagset.end());
    std::map<std::string, std::size_t> posword_freq;
    std::set<std::string> domains;
    for (const auto& d : train) {
        if (d.tags.size() != d.clean.surface_tokens.size())
            throw DataError("document '" + d.clean.article_id + "': tag count does not match token count");
        for (std::size_t i = 0; i < d.tags.size(); ++i)
            if (known_tags.contains(d.tags[i])) ++posword_freq[d.clean.surface_tokens[i] + "_" + d.tags[i]];
        domains.insert(d.links.external_domains.begin(), d.links.external_domains.end());
    }
    p.posword_vocab_ = top_by_frequency(posword_freq, config.posword_cap);
    p.rank_domains_.assign(domains.begin(), domains.end());
    p.build_space();
    return p;
}

void FeaturePipeline::build_space() {
    tfidf_.rebuild_index();
    idf_ = tfidf_.idf_table();
    posword_index_.clear();
    for (std::size_t i = 0; i < posword_vocab_.size(); ++i)
        posword_index_.emplace(posword_vocab_[i], static_cast<std::uint32_t>(i));

    std::vector<FeatureInfo> f;
    for (const auto& n : lexicon_feature_names(lexicon_)) f.push_back({"LEX:" + n, Family::LEX});
    for (const auto& t : tfidf_.terms) f.push_back({"TFIDF:" + t, Family::TFIDF});
    for (const auto& t : tagset_) f.push_back({"POSTAG:" + t, Family::POSTAG});
    for (const auto& w : posword_vocab_) f.push_back({"POSWORD:" + w, Family::POSWORD});
    f.push_back({"LINK:internal", Family::LINK});
    f.push_back({"LINK:external", Family::LINK});
    for (const auto& d : rank_domains_) f.push_back({"RANK:" + d, Family::RANK});
    f.push_back({"SIM:headline_body", Family::SIM});
    f.push_back({"MISC:distinct_ratio", Family::MISC});
    f.push_back({"MISC:per_count", Family::MISC});
    f.push_back({"MISC:org_count", Family::MISC});
    space_ = FeatureSpace(std::move(f));
}

SparseVector FeaturePipeline::transform(const AnalyzedDocument& doc) const {
    if (doc.tags.size() != doc.clean.surface_tokens.size())
        throw DataError("document '" + doc.clean.article_id + "': tag count does not match token count");
    SparseVector out;
    auto push = [&](std::size_t index, double value) {
        if (value != 0.0) out.entries.emplace_back(static_cast<std::uint32_t>(index), value);
    };
    const auto& body = doc.clean.body_tokens;

    std::size_t offset = space_.family_range(Family::LEX).first;
    const auto lex = lexicon_features(body, lexicon_, doc.sentences);
    for (std::size_t i = 0; i < lex.size(); ++i) push(offset + i, lex[i]);

    offset = space_.family_range(Family::TFIDF).first;
    const SparseVector body_vec = tfidf_with_idf(tfidf_, idf_, body);
    for (const auto& [i, v] : body_vec.entries) push(offset + i, v);

    std::vector<TaggedToken> tagged;
    tagged.reserve(doc.tags.size());
    for (std::size_t i = 0; i < doc.tags.size(); ++i) tagged.push_back({doc.clean.surface_tokens[i], doc.tags[i]});
    const PosCounts pos = pos_features(tagged, tagset_);
    offset = space_.family_range(Family::POSTAG).first;
    for (std::size_t i = 0; i < pos.tag_counts.size(); ++i) push(offset + i, pos.tag_counts[i]);

    offset = space_.family_range(Family::POSWORD).first;
    std::vector<std::pair<std::uint32_t, double>> poswords;
    for (const auto& [key, count] : pos.word_counts)
        if (auto it = posword_index_.find(key); it != posword_index_.end()) poswords.emplace_back(it->second, count);
    std::sort(poswords.begin(), poswords.end());
    for (const auto& [i, v] : poswords) push(offset + i, v);

    offset = space_.family_range(Family::LINK).first;
    push(offset, static_cast<double>(doc.links.internal));
    push(offset + 1, static_cast<double>(doc.links.external));

    offset = space_.family_range(Family::RANK).first;
    for (const auto& d : doc.links.external_domains) {
        auto it = std::lower_bound(rank_domains_.begin(), rank_domains_.end(), d);
        if (it != rank_domains_.end() && *it == d)
            push(offset + static_cast<std::size_t>(it - rank_domains_.begin()), static_cast<double>(ranks_.rank(d)));
    }

    offset = space_.family_range(Family::SIM).first;
    push(offset, cosine_similarity(tfidf_with_idf(tfidf_, idf_, doc.clean.title_tokens), body_vec));

    offset = space_.family_range(Family::MISC).first;
    if (!body.empty()) {
        std::unordered_set<std::string_view> distinct(body.begin(), body.end());
        push(offset, static_cast<double>(distinct.size()) / static_cast<double>(body.size()));
        push(offset + 1, doc.entities.persons);
        push(offset + 2, doc.entities.organizations);
    }
    return out;
}

Matrix FeaturePipeline::transform_dense(std::span<const AnalyzedDocument> docs) const {
    Matrix m(docs.size(), space_.size());
    const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) transform(docs[i]).scatter(m.row(i));
    return m;
}

Matrix FeaturePipeline::transform_dense_serial(std::span<const AnalyzedDocument> docs) const {
    Matrix m(docs.size(), space_.size());
    for (std::size_t i = 0; i < docs.size(); ++i) transform(docs[i]).scatter(m.row(i));
    return m;
}

std::string FeaturePipeline::to_bytes() const {
    binio::Writer w;
    w.magic(kPipelineMagic, kFormatVersion);
    w.str(lexicon_.to_text());
    w.u64(tfidf_.config.min_df);
    w.f64(tfidf_.config.max_df_ratio);
    w.u64(tfidf_.config.max_features);
    w.f64(tfidf_.config.log_base);
    w.u64(tfidf_.n_docs);
    w.strings(tfidf_.terms);
    std::vector<std::uint64_t> df(tfidf_.df.begin(), tfidf_.df.end());
    w.vec(df);
    w.strings(tagset_);
    w.strings(posword_vocab_);
    w.strings(rank_domains_);
    w.str(ranks_.to_text());
    w.u64(ranks_.default_rank());
    w.str(space_.fingerprint());
    return w.bytes();
}

FeaturePipeline FeaturePipeline::from_bytes(std::string bytes) {
    binio::Reader r(std::move(bytes));
    const auto version = r.magic(kPipelineMagic);
    if (version != kFormatVersion) throw DataError("unsupported feature artifact version " + std::to_string(version));
    FeaturePipeline p;
    p.lexicon_ = CategoryLexicon::parse(r.str());
    p.tfidf_.config.min_df = r.u64();
    p.tfidf_.config.max_df_ratio = r.f64();
    p.tfidf_.config.max_features = r.u64();
    p.tfidf_.config.log_base = r.f64();
    p.tfidf_.n_docs = r.u64();
    p.tfidf_.terms = r.strings();
    const auto df = r.vec<std::uint64_t>();
    p.tfidf_.df.assign(df.begin(), df.end());
    if (p.tfidf_.df.size() != p.tfidf_.terms.size()) throw DataError("feature artifact: df/term size mismatch");
    p.tagset_ = r.strings();
    p.posword_vocab_ = r.strings();
    p.rank_domains_ = r.strings();
    p.ranks_ = RankTable::parse(r.str());
    if (r.u64() != RankTable::kDefaultRank) throw DataError("feature artifact: unexpected default rank");
    const std::string fingerprint = r.str();
    if (!r.at_end()) throw DataError("feature artifact: trailing bytes");
    p.build_space();
    if (p.space_.fingerprint() != fingerprint)
        throw DataError("feature artifact: stored fingerprint does not match rebuilt feature space");
    return p;
}

void FeaturePipeline::save(const std::string& path) const { write_file(path, to_bytes()); }

FeaturePipeline FeaturePipeline::load(const std::string& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const DataError&) {
        throw DataError("no fitted feature artifacts at '" + path +
                        "'; run `healthgrade featurize --fit` first");
    }
    return from_bytes(std::move(bytes));
}

}  // namespace hg
