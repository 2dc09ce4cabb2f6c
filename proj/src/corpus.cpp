#include "healthgrade/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace hg {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, kCriterionCount> kCriterionNames = {
    "cost",         "benefits",     "harms",      "evidence",   "disease-mongering",
    "independence", "alternatives", "availability", "novelty",  "news-release",
};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw DataError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string require_string(const json& rec, const char* key, const std::string& origin,
                           std::size_t line) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string())
        fail(origin, line, std::string("missing or non-string field '") + key + "'");
    return it->get<std::string>();
}

struct ParsedRecord {
    std::size_t line;
    bool is_article;
    Article article;
    CriterionLabels labels;
};

// Parses one record; `lenient` relaxes links (raw ingestion).
ParsedRecord parse_record(const json& rec, const std::string& origin, std::size_t line,
                          bool lenient) {
    if (!rec.is_object()) fail(origin, line, "record is not an object");
    const std::string kind = require_string(rec, "kind", origin, line);
    ParsedRecord out{line, false, {}, {}};
    if (kind == "article") {
        out.is_article = true;
        Article& a = out.article;
        a.id = require_string(rec, "id", origin, line);
        a.title = require_string(rec, "title", origin, line);
        a.body = require_string(rec, "body", origin, line);
        a.source_url = require_string(rec, "source_url", origin, line);
        if (auto it = rec.find("links"); it != rec.end()) {
            if (!it->is_array()) fail(origin, line, "'links' must be an array");
            for (const auto& l : *it) {
                if (!l.is_string()) fail(origin, line, "'links' entries must be strings");
                a.links.push_back(l.get<std::string>());
            }
        } else if (!lenient) {
            fail(origin, line, "missing field 'links'");
        }
        if (auto it = rec.find("fetched_at"); it != rec.end() && !it->is_null()) {
            if (!it->is_string()) fail(origin, line, "'fetched_at' must be a string");
            a.fetched_at = it->get<std::string>();
        }
        if (lenient) {
            a.id = trim(a.id);
            a.title = trim(a.title);
            a.source_url = trim(a.source_url);
        }
    } else if (kind == "labels") {
        out.labels.article_id = require_string(rec, "article_id", origin, line);
        auto it = rec.find("labels");
        if (it == rec.end() || !it->is_array()) fail(origin, line, "missing 'labels' array");
        if (it->size() != static_cast<std::size_t>(kCriterionCount))
            fail(origin, line, "expected exactly 10 labels, got " + std::to_string(it->size()));
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& tok = (*it)[i];
            if (!tok.is_string()) fail(origin, line, "label tokens must be strings");
            auto parsed = parse_label(tok.get<std::string>());
            if (!parsed)
                fail(origin, line, "unknown label token '" + tok.get<std::string>() +
                                       "' for criterion " + std::to_string(i + 1));
            out.labels.labels[i] = *parsed;
        }
    } else {
        fail(origin, line, "unknown record kind '" + kind + "'");
    }
    return out;
}

Corpus assemble(std::vector<ParsedRecord> records, const std::string& origin) {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> article_line;
    for (auto& r : records) {
        if (!r.is_article) continue;
        if (r.article.id.empty()) fail(origin, r.line, "empty article id");
        if (!article_line.emplace(r.article.id, r.line).second)
            fail(origin, r.line, "duplicate article id '" + r.article.id + "'");
        corpus.articles.push_back(std::move(r.article));
    }
    std::unordered_set<std::string> labelled;
    for (auto& r : records) {
        if (r.is_article) continue;
        if (!article_line.contains(r.labels.article_id))
            fail(origin, r.line, "dangling article_id '" + r.labels.article_id + "'");
        if (!labelled.insert(r.labels.article_id).second)
            fail(origin, r.line, "duplicate labels for article '" + r.labels.article_id + "'");
        corpus.labels.push_back(std::move(r.labels));
    }
    return corpus;
}

std::vector<ParsedRecord> parse_lines(std::string_view text, const std::string& origin,
                                      bool lenient) {
    std::vector<ParsedRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        ++line_no;
        pos = nl + 1;
        if (trim(line).empty()) {
            if (nl == text.size()) break;
            continue;
        }
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(origin, line_no, std::string("malformed record: ") + e.what());
        }
        records.push_back(parse_record(rec, origin, line_no, lenient));
        if (nl == text.size()) break;
    }
    return records;
}

std::vector<std::string> extract_links(const std::string& body) {
    static const std::regex kHref(R"(href\s*=\s*["']([^"']+)["'])", std::regex::icase);
    static const std::regex kBare(R"((https?://[^\s"'<>()\[\]]+))", std::regex::icase);
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    auto add = [&](std::string url) {
        while (!url.empty() && std::string_view(".,;:!?").find(url.back()) != std::string_view::npos)
            url.pop_back();
        if (url_host(url) && seen.insert(url).second) out.push_back(std::move(url));
    };
    for (std::sregex_iterator it(body.begin(), body.end(), kHref), end; it != end; ++it)
        add((*it)[1].str());
    for (std::sregex_iterator it(body.begin(), body.end(), kBare), end; it != end; ++it)
        add((*it)[1].str());
    return out;
}

}  // namespace

std::optional<Label> parse_label(std::string_view token) {
    if (token == "S") return Label::Satisfactory;
    if (token == "NS") return Label::NotSatisfactory;
    if (token == "NA") return Label::NotApplicable;
    return std::nullopt;
}

std::string_view label_token(Label label) {
    switch (label) {
        case Label::Satisfactory: return "S";
        case Label::NotSatisfactory: return "NS";
        case Label::NotApplicable: return "NA";
    }
    return "NA";
}

CriterionId::CriterionId(int value) : value_(value) {
    if (value < 1 || value > kCriterionCount)
        throw UsageError("criterion must be in 1..10, got " + std::to_string(value));
}

std::string_view criterion_name(CriterionId c) { return kCriterionNames[c.index()]; }

const CriterionLabels* Corpus::labels_for(std::string_view article_id) const {
    for (const auto& l : labels)
        if (l.article_id == article_id) return &l;
    return nullptr;
}

const Article* Corpus::article(std::string_view id) const {
    for (const auto& a : articles)
        if (a.id == id) return &a;
    return nullptr;
}

Labels BinaryDataset::binary_labels() const {
    Labels y;
    y.reserve(instances.size());
    for (const auto& inst : instances) y.push_back(inst.label == Label::Satisfactory ? 1 : 0);
    return y;
}

std::optional<std::string> url_host(std::string_view url) {
    auto sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    if (!std::isalpha(static_cast<unsigned char>(url[0]))) return std::nullopt;
    for (std::size_t i = 0; i < sep; ++i) {
        const char c = url[i];
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return std::nullopt;
    }
    std::string_view rest = url.substr(sep + 3);
    auto end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);
    if (auto colon = authority.find(':'); colon != std::string_view::npos) {
        std::string_view port = authority.substr(colon + 1);
        if (!std::all_of(port.begin(), port.end(),
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return std::nullopt;
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) return std::nullopt;
    std::string host;
    for (char c : authority) {
        const auto uc = static_cast<unsigned char>(c);
        if (!std::isalnum(uc) && c != '-' && c != '.') return std::nullopt;
        host.push_back(static_cast<char>(std::tolower(uc)));
    }
    if (host.front() == '.' || host.back() == '.' || host.find("..") != std::string::npos)
        return std::nullopt;
    return host;
}

void validate_corpus(const Corpus& corpus) {
    std::unordered_set<std::string> ids;
    for (const auto& a : corpus.articles) {
        if (a.id.empty()) throw DataError("article with empty id");
        if (!ids.insert(a.id).second) throw DataError("duplicate article id '" + a.id + "'");
        if (trim(a.body).empty()) throw DataError("article '" + a.id + "' has an empty body");
        if (!url_host(a.source_url))
            throw DataError("article '" + a.id + "' has invalid source_url '" + a.source_url + "'");
        for (const auto& l : a.links)
            if (!url_host(l))
                throw DataError("article '" + a.id + "' has invalid link '" + l + "'");
    }
    std::unordered_set<std::string> labelled;
    for (const auto& l : corpus.labels) {
        if (!ids.contains(l.article_id))
            throw DataError("dangling article_id '" + l.article_id + "'");
        if (!labelled.insert(l.article_id).second)
            throw DataError("duplicate labels for article '" + l.article_id + "'");
    }
}

Corpus parse_corpus(std::string_view text, const std::string& origin) {
    auto records = parse_lines(text, origin, false);
    // Per-record checks that need the line number.
    for (const auto& r : records) {
        if (!r.is_article) continue;
        const Article& a = r.article;
        if (trim(a.body).empty()) fail(origin, r.line, "article '" + a.id + "' has an empty body");
        if (!url_host(a.source_url)) fail(origin, r.line, "invalid source_url '" + a.source_url + "'");
        for (const auto& l : a.links)
            if (!url_host(l)) fail(origin, r.line, "invalid link '" + l + "'");
    }
    Corpus corpus = assemble(std::move(records), origin);
    validate_corpus(corpus);
    return corpus;
}

Corpus load_corpus(const std::string& path) { return parse_corpus(read_file(path), path); }

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& a : corpus.articles) {
        json rec = {{"kind", "article"}, {"id", a.id},           {"title", a.title},
                    {"body", a.body},    {"source_url", a.source_url}, {"links", a.links}};
        if (a.fetched_at) rec["fetched_at"] = *a.fetched_at;
        out += rec.dump();
        out += '\n';
    }
    for (const auto& l : corpus.labels) {
        json tokens = json::array();
        for (Label v : l.labels) tokens.push_back(std::string(label_token(v)));
        json rec = {{"kind", "labels"}, {"article_id", l.article_id}, {"labels", tokens}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    write_file(path, serialize_corpus(corpus));
}

Corpus ingest_raw(std::string_view text, const std::string& origin) {
    auto records = parse_lines(text, origin, true);
    for (auto& r : records) {
        if (!r.is_article) continue;
        Article& a = r.article;
        if (trim(a.body).empty()) fail(origin, r.line, "article '" + a.id + "' has an empty body");
        if (!url_host(a.source_url)) fail(origin, r.line, "invalid source_url '" + a.source_url + "'");
        if (a.links.empty()) {
            a.links = extract_links(a.body);
        } else {
            std::erase_if(a.links, [](const std::string& l) { return !url_host(l); });
        }
    }
    Corpus corpus = assemble(std::move(records), origin);
    validate_corpus(corpus);
    return corpus;
}

BinaryDataset filter_for_criterion(const Corpus& corpus, CriterionId criterion) {
    BinaryDataset ds;
    ds.criterion = criterion;
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < corpus.articles.size(); ++i) index.emplace(corpus.articles[i].id, i);
    for (const auto& l : corpus.labels) {
        const Label v = l.at(criterion);
        if (v == Label::NotApplicable) continue;
        auto it = index.find(l.article_id);
        if (it == index.end()) throw DataError("dangling article_id '" + l.article_id + "'");
        ds.instances.push_back({l.article_id, it->second, v});
        (v == Label::Satisfactory ? ds.satisfactory : ds.not_satisfactory)++;
    }
    if (ds.satisfactory < 2 || ds.not_satisfactory < 2)
        throw DataError("degenerate dataset for criterion " + std::to_string(criterion.value()) +
                        ": S=" + std::to_string(ds.satisfactory) +
                        " NS=" + std::to_string(ds.not_satisfactory) +
                        " (need at least 2 of each)");
    return ds;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats{};
    std::unordered_map<std::string_view, const CriterionLabels*> by_id;
    for (const auto& l : corpus.labels) by_id.emplace(l.article_id, &l);
    for (const auto& a : corpus.articles) {
        auto it = by_id.find(a.id);
        for (int c = 0; c < kCriterionCount; ++c) {
            // Unlabelled articles count as NotApplicable so rows sum to the article total.
            const Label v = it == by_id.end() ? Label::NotApplicable : it->second->labels[c];
            switch (v) {
                case Label::Satisfactory: ++stats[c].satisfactory; break;
                case Label::NotSatisfactory: ++stats[c].not_satisfactory; break;
                case Label::NotApplicable: ++stats[c].not_applicable; break;
            }
        }
    }
    return stats;
}

std::string format_stats(const CorpusStats& stats) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "criterion" << std::setw(20) << "name" << std::right
       << std::setw(8) << "S" << std::setw(8) << "NS" << std::setw(8) << "NA" << '\n';
    for (int c = 0; c < kCriterionCount; ++c) {
        os << std::left << std::setw(10) << (c + 1) << std::setw(20)
           << criterion_name(CriterionId(c + 1)) << std::right << std::setw(8)
           << stats[c].satisfactory << std::setw(8) << stats[c].not_satisfactory << std::setw(8)
           << stats[c].not_applicable << '\n';
    }
    return os.str();
}

}  // namespace hg
