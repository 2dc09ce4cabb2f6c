#include "healthgrade/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <unordered_map>

#include "healthgrade/porter.hpp"
#include "healthgrade/resources.hpp"

namespace hg {

using json = nlohmann::json;

namespace {

// Irregular inflections the stemmer cannot reach.
const std::unordered_map<std::string_view, std::string_view>& lemma_exceptions() {
    static const std::unordered_map<std::string_view, std::string_view> table = {
        {"children", "child"}, {"women", "woman"},     {"men", "man"},
        {"mice", "mouse"},     {"feet", "foot"},       {"teeth", "tooth"},
        {"geese", "goose"},    {"people", "person"},   {"went", "go"},
        {"gone", "go"},        {"took", "take"},       {"taken", "take"},
        {"gave", "give"},      {"given", "give"},      {"ate", "eat"},
        {"eaten", "eat"},      {"saw", "see"},         {"seen", "see"},
        {"found", "find"},     {"thought", "think"},   {"brought", "bring"},
        {"bought", "buy"},     {"paid", "pay"},        {"said", "say"},
        {"made", "make"},      {"ran", "run"},         {"began", "begin"},
        {"begun", "begin"},    {"knew", "know"},       {"known", "know"},
        {"grew", "grow"},      {"grown", "grow"},      {"wrote", "write"},
        {"written", "write"},  {"spoke", "speak"},     {"spoken", "speak"},
        {"chose", "choose"},   {"chosen", "choose"},   {"fell", "fall"},
        {"fallen", "fall"},    {"felt", "feel"},       {"kept", "keep"},
        {"lost", "lose"},      {"led", "lead"},        {"met", "meet"},
        {"sought", "seek"},    {"taught", "teach"},    {"told", "tell"},
        {"won", "win"},        {"worse", "bad"},       {"worst", "bad"},
        {"better", "good"},    {"best", "good"},       {"analyses", "analysis"},
        {"diagnoses", "diagnosis"}, {"crises", "crisis"}, {"criteria", "criterion"},
        {"phenomena", "phenomenon"}, {"bacteria", "bacterium"}, {"fungi", "fungus"},
        {"stimuli", "stimulus"}, {"indices", "index"}, {"larvae", "larva"},
        {"vertebrae", "vertebra"}, {"appendices", "appendix"}, {"dying", "die"},
        {"died", "die"},       {"lying", "lie"},       {"hurt", "hurt"},
    };
    return table;
}

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c == '\'' || c >= 0x80;
}

// Decodes one UTF-8 code point at s[i]; returns 0xFFFD and length 1 on bad input.
char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
    const auto c0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= s.size()) return -1;
        const auto c = static_cast<unsigned char>(s[i + k]);
        return (c & 0xC0) == 0x80 ? (c & 0x3F) : -1;
    };
    if (c0 < 0x80) {
        len = 1;
        return c0;
    }
    if ((c0 & 0xE0) == 0xC0) {
        const int a = cont(1);
        if (a >= 0) {
            len = 2;
            return static_cast<char32_t>(((c0 & 0x1F) << 6) | a);
        }
    } else if ((c0 & 0xF0) == 0xE0) {
        const int a = cont(1), b = cont(2);
        if (a >= 0 && b >= 0) {
            len = 3;
            return static_cast<char32_t>(((c0 & 0x0F) << 12) | (a << 6) | b);
        }
    } else if ((c0 & 0xF8) == 0xF0) {
        const int a = cont(1), b = cont(2), c = cont(3);
        if (a >= 0 && b >= 0 && c >= 0) {
            len = 4;
            return static_cast<char32_t>(((c0 & 0x07) << 18) | (a << 12) | (b << 6) | c);
        }
    }
    len = 1;
    return 0xFFFD;
}

// Latin letters with diacritics are kept as word characters; every other
// non-ASCII code point is treated as a symbol.
bool is_latin_letter(char32_t cp) {
    return cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7;
}

bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
    if (s.size() - i < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(s[i + k])) != prefix[k]) return false;
    return true;
}

std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        const char c = text[i];
        if (c == '<' && i + 1 < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' ||
             text[i + 1] == '!')) {
            auto close = text.find('>', i);
            if (close != std::string_view::npos) {
                out.push_back(' ');
                i = close + 1;
                continue;
            }
        }
        if (c == '&') {
            // Character entity: &name; or &#123;
            std::size_t j = i + 1;
            if (j < text.size() && text[j] == '#') ++j;
            while (j < text.size() && j - i <= 10 && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == ';' && j > i + 1) {
                out.push_back(' ');
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::string strip_urls(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        const bool boundary = i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])) ||
                              text[i - 1] == '(' || text[i - 1] == '"' || text[i - 1] == '\'';
        if (boundary && (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                         starts_with_ci(text, i, "www."))) {
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            out.push_back(' ');
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::vector<std::string> split_spaces(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ') ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string apply_lemma(std::string_view token) {
    const auto& table = lemma_exceptions();
    auto it = table.find(token);
    return it == table.end() ? std::string(token) : std::string(it->second);
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    c.contraction_table = parse_contraction_table(resources::contractions());
    c.stopword_list = parse_stopwords(resources::stopwords());
    return c;
}

void PipelineConfig::validate() const {
    for (const auto& [key, _] : contraction_table) {
        if (std::any_of(key.begin(), key.end(),
                        [](char ch) { return std::isupper(static_cast<unsigned char>(ch)); }))
            throw UsageError("contraction key '" + key + "' is not lowercase");
    }
    if (remove_stopwords && stopword_list.empty())
        throw UsageError("stopword removal enabled with an empty stopword list");
}

ContractionTable parse_contraction_table(std::string_view text) {
    ContractionTable table;
    for (const auto& line : split_lines(text)) {
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw DataError("contraction table line without TAB: '" + line + "'");
        std::string key = line.substr(0, tab);
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        table[key] = line.substr(tab + 1);
    }
    return table;
}

StopwordSet parse_stopwords(std::string_view text) {
    StopwordSet words;
    for (auto& line : split_lines(text)) {
        if (line.empty() || line.front() == '#') continue;
        std::transform(line.begin(), line.end(), line.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        words.insert(line);
    }
    return words;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError("malformed pipeline config " + path + ": " + e.what());
    }
    PipelineConfig c = PipelineConfig::defaults();
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return (fp.is_absolute() ? fp : base / fp).string();
    };
    try {
        if (j.contains("contractions"))
            c.contraction_table = parse_contraction_table(read_file(resolve(j["contractions"])));
        if (j.contains("stopwords"))
            c.stopword_list = parse_stopwords(read_file(resolve(j["stopwords"])));
        if (j.contains("remove_stopwords")) c.remove_stopwords = j["remove_stopwords"].get<bool>();
        if (j.contains("remove_numbers")) c.remove_numbers = j["remove_numbers"].get<bool>();
        if (j.contains("keep_title_separately"))
            c.keep_title_separately = j["keep_title_separately"].get<bool>();
        if (j.contains("normalizer")) {
            const auto n = j["normalizer"].get<std::string>();
            if (n == "stem") c.normalizer = Normalizer::Stem;
            else if (n == "lemma-then-stem") c.normalizer = Normalizer::LemmaThenStem;
            else throw UsageError("unknown normalizer '" + n + "'");
        }
    } catch (const json::type_error& e) {
        throw UsageError("pipeline config " + path + ": " + e.what());
    }
    c.validate();
    return c;
}

std::string describe(const PipelineConfig& config) {
    json j;
    j["contractions"] = config.contraction_table;
    j["stopwords"] = std::vector<std::string>(config.stopword_list.begin(), config.stopword_list.end());
    j["remove_stopwords"] = config.remove_stopwords;
    j["remove_numbers"] = config.remove_numbers;
    j["normalizer"] = config.normalizer == Normalizer::Stem ? "stem" : "lemma-then-stem";
    j["keep_title_separately"] = config.keep_title_separately;
    return j.dump();
}

std::string expand_contractions(std::string_view text, const ContractionTable& table) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(static_cast<unsigned char>(text[i]))) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
        // Typographic apostrophe (U+2019) is folded to ASCII for lookup.
        std::string word(text.substr(i, j - i));
        std::string key;
        key.reserve(word.size());
        for (std::size_t k = 0; k < word.size(); ++k) {
            if (word.compare(k, 3, "\xE2\x80\x99") == 0) {
                key.push_back('\'');
                k += 2;
            } else {
                key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[k]))));
            }
        }
        auto it = table.find(key);
        if (it != table.end()) {
            out += it->second;
        } else {
            // Retry without surrounding quote marks: 'you've' -> you've.
            std::size_t lead = 0, trail = 0;
            while (lead < key.size() && key[lead] == '\'') ++lead;
            while (trail < key.size() - lead && key[key.size() - 1 - trail] == '\'') ++trail;
            auto inner = (lead || trail) && lead + trail < key.size()
                             ? table.find(key.substr(lead, key.size() - lead - trail))
                             : table.end();
            if (inner != table.end()) {
                out.append(lead, '\'');
                out += inner->second;
                out.append(trail, '\'');
            } else {
                out += word;
            }
        }
        i = j;
    }
    return out;
}

std::string remove_noise(std::string_view text, const PipelineConfig& config) {
    const std::string stage = strip_urls(strip_markup(text));
    std::string out;
    out.reserve(stage.size());
    bool pending_space = false;
    auto emit = [&](std::string_view bytes) {
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out += bytes;
    };
    for (std::size_t i = 0; i < stage.size();) {
        std::size_t len = 1;
        const char32_t cp = decode_utf8(stage, i, len);
        if (cp < 0x80) {
            const auto c = static_cast<unsigned char>(cp);
            if (std::isalpha(c)) {
                const char lower = static_cast<char>(std::tolower(c));
                emit(std::string_view(&lower, 1));
            } else if (std::isdigit(c) && !config.remove_numbers) {
                emit(std::string_view(&stage[i], 1));
            } else {
                pending_space = true;
            }
        } else if (is_latin_letter(cp)) {
            std::string letter = stage.substr(i, len);
            if (cp >= 0xC0 && cp <= 0xDE) letter[1] = static_cast<char>(letter[1] + 0x20);
            emit(letter);
        } else {
            pending_space = true;
        }
        i += len;
    }
    return out;
}

std::string normalize_token(std::string_view token, Normalizer normalizer) {
    std::string current(token);
    // Iterate to a fixed point so the pipeline is idempotent on its own output.
    for (int round = 0; round < 8; ++round) {
        std::string next = normalizer == Normalizer::LemmaThenStem ? apply_lemma(current) : current;
        next = porter_stem(next);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

std::vector<std::string> normalize_words(std::string_view text, const PipelineConfig& config) {
    std::vector<std::string> out;
    for (auto& tok : split_spaces(text)) {
        if (config.remove_stopwords && config.stopword_list.contains(tok)) continue;
        std::string norm = normalize_token(tok, config.normalizer);
        if (norm.empty()) continue;
        if (config.remove_stopwords && config.stopword_list.contains(norm)) continue;
        out.push_back(std::move(norm));
    }
    return out;
}

CleanDocument preprocess(const Article& article, const PipelineConfig& config) {
    CleanDocument doc;
    doc.article_id = article.id;
    doc.raw_body = article.body;

    const std::string title = remove_noise(expand_contractions(article.title, config.contraction_table), config);
    doc.title_tokens = normalize_words(title, config);

    const std::string body = remove_noise(expand_contractions(article.body, config.contraction_table), config);
    doc.surface_tokens = split_spaces(body);
    doc.body_tokens = normalize_words(body, config);
    if (!config.keep_title_separately)
        doc.body_tokens.insert(doc.body_tokens.begin(), doc.title_tokens.begin(), doc.title_tokens.end());

    if (doc.body_tokens.empty()) {
        doc.empty_body = true;
        warn("article '" + article.id + "' has no tokens after cleaning; features will be zero");
    }
    return doc;
}

std::vector<CleanDocument> preprocess_all(const std::vector<Article>& articles,
                                          const PipelineConfig& config) {
    std::vector<CleanDocument> out(articles.size());
    const auto n = static_cast<std::ptrdiff_t>(articles.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = preprocess(articles[i], config);
    return out;
}

std::vector<CleanDocument> preprocess_all_serial(const std::vector<Article>& articles,
                                                 const PipelineConfig& config) {
    std::vector<CleanDocument> out;
    out.reserve(articles.size());
    for (const auto& a : articles) out.push_back(preprocess(a, config));
    return out;
}

std::string serialize_clean(const std::vector<CleanDocument>& docs) {
    std::string out;
    for (const auto& d : docs) {
        json rec = {{"article_id", d.article_id},         {"title_tokens", d.title_tokens},
                    {"body_tokens", d.body_tokens},       {"surface_tokens", d.surface_tokens},
                    {"raw_body", d.raw_body},             {"empty_body", d.empty_body}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<CleanDocument> parse_clean(std::string_view text) {
    std::vector<CleanDocument> docs;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            CleanDocument d;
            d.article_id = j.at("article_id").get<std::string>();
            d.title_tokens = j.at("title_tokens").get<std::vector<std::string>>();
            d.body_tokens = j.at("body_tokens").get<std::vector<std::string>>();
            d.surface_tokens = j.at("surface_tokens").get<std::vector<std::string>>();
            d.raw_body = j.at("raw_body").get<std::string>();
            d.empty_body = j.value("empty_body", false);
            docs.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw DataError("cleaned documents line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

}  // namespace hg
