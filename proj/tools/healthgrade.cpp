// healthgrade: command-line front end for the article grading pipeline.
//
//   healthgrade ingest     --input raw.jsonl --out corpus.jsonl
//   healthgrade preprocess --corpus corpus.jsonl --out clean.jsonl
//   healthgrade featurize  --corpus corpus.jsonl --artifacts feats.bin --fit
//   healthgrade featurize  --corpus other.jsonl --artifacts feats.bin --out features.tsv
//   healthgrade evaluate   --corpus corpus.jsonl --criterion 1 --sizes 1000..5000 --seed 7 --out results/
//   healthgrade sweep      --corpus corpus.jsonl --criterion all --seed 7 --out results/
//   healthgrade explain    --corpus corpus.jsonl --criterion 1 --seed 7
//   healthgrade score      --model model.bin --artifacts feats.bin --articles new.jsonl
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "healthgrade/corpus.hpp"
#include "healthgrade/eval.hpp"
#include "healthgrade/featurize.hpp"
#include "healthgrade/learn.hpp"
#include "healthgrade/preprocess.hpp"
#include "healthgrade/select.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Settings {
    std::string config;
    std::string input;
    std::string corpus;
    std::string out;
    std::string artifacts;
    std::string model;
    std::string model_out;
    std::string articles;
    std::string pipeline;
    std::string lexicon;
    std::string ranks;
    std::string tagger;
    std::string criterion = "1";
    std::string selector = "pc";
    std::string classifier = "svm";
    std::string sizes;
    std::string balancing = "none";
    std::optional<std::uint64_t> seed;
    std::size_t folds = 10;
    std::size_t k = 16;
    std::size_t rf_trees = 100;
    double svm_c = 1.0;
    int svm_degree = 1;
    std::size_t smote_k = 5;
    int workers = 0;
    bool fit = false;
    bool quiet = false;
};

// Copies values from a JSON config file into settings the command line did
// not set.
void apply_config(Settings& s, const CLI::App& cmd) {
    if (s.config.empty()) return;
    json j;
    try {
        j = json::parse(hg::read_file(s.config));
    } catch (const json::exception& e) {
        throw hg::UsageError(s.config + ": invalid JSON config: " + e.what());
    }
    if (!j.is_object()) throw hg::UsageError(s.config + ": config must be a JSON object");
    const fs::path base = fs::path(s.config).parent_path();
    auto given = [&](const std::string& flag) {
        try {
            return cmd.get_option("--" + flag)->count() > 0;
        } catch (const CLI::OptionNotFound&) {
            return true;  // option not offered by this command
        }
    };
    for (const auto& [key, value] : j.items()) {
        const std::string flag = [&] {
            std::string f = key;
            std::replace(f.begin(), f.end(), '_', '-');
            return f;
        }();
        if (given(flag)) continue;
        auto path = [&] { return (base / value.get<std::string>()).string(); };
        try {
            if (key == "corpus") s.corpus = path();
            else if (key == "input") s.input = path();
            else if (key == "out") s.out = path();
            else if (key == "artifacts") s.artifacts = path();
            else if (key == "model") s.model = path();
            else if (key == "model_out") s.model_out = path();
            else if (key == "articles") s.articles = path();
            else if (key == "pipeline") s.pipeline = path();
            else if (key == "lexicon") s.lexicon = path();
            else if (key == "ranks") s.ranks = path();
            else if (key == "tagger") s.tagger = path();
            else if (key == "criterion") s.criterion = value.is_string() ? value.get<std::string>() : std::to_string(value.get<int>());
            else if (key == "selector") s.selector = value.get<std::string>();
            else if (key == "classifier") s.classifier = value.get<std::string>();
            else if (key == "sizes") s.sizes = value.get<std::string>();
            else if (key == "balancing") s.balancing = value.get<std::string>();
            else if (key == "seed") s.seed = value.get<std::uint64_t>();
            else if (key == "folds") s.folds = value.get<std::size_t>();
            else if (key == "k") s.k = value.get<std::size_t>();
            else if (key == "rf_trees") s.rf_trees = value.get<std::size_t>();
            else if (key == "svm_c") s.svm_c = value.get<double>();
            else if (key == "svm_degree") s.svm_degree = value.get<int>();
            else if (key == "smote_k") s.smote_k = value.get<std::size_t>();
            else if (key == "workers") s.workers = value.get<int>();
            else throw hg::UsageError(s.config + ": unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw hg::UsageError(s.config + ": bad value for '" + key + "': " + e.what());
        }
    }
}

std::vector<hg::CriterionId> parse_criteria(const std::string& text) {
    if (text == "all") {
        std::vector<hg::CriterionId> all;
        for (int c = 1; c <= hg::kCriterionCount; ++c) all.emplace_back(c);
        return all;
    }
    try {
        std::size_t used = 0;
        const int c = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return {hg::CriterionId(c)};
    } catch (const std::logic_error&) {
        throw hg::UsageError("criterion must be 1-10 or \"all\", got '" + text + "'");
    }
}

std::size_t parse_size(const std::string& token) {
    if (token == "all") return hg::kAllFeatures;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(token, &used);
        if (used != token.size() || v < 1) throw std::invalid_argument(token);
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw hg::UsageError("bad feature size '" + token + "'");
    }
}

// "1000..5000" (step 1000 unless given as "1000..5000:500"), "100,200,all" or "all".
std::vector<std::size_t> parse_sizes(const std::string& text) {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const std::string rest = text.substr(dots + 2);
        const auto colon = rest.find(':');
        const std::size_t lo = parse_size(text.substr(0, dots));
        const std::size_t hi = parse_size(rest.substr(0, colon));
        const std::size_t step = colon == std::string::npos ? 1000 : parse_size(rest.substr(colon + 1));
        if (lo == hg::kAllFeatures || hi == hg::kAllFeatures || hi < lo)
            throw hg::UsageError("bad size range '" + text + "'");
        std::vector<std::size_t> out;
        for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
        return out;
    }
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) out.push_back(parse_size(token));
    if (out.empty()) throw hg::UsageError("no feature sizes given");
    return out;
}

std::string require(const std::string& value, const std::string& flag) {
    if (value.empty()) throw hg::UsageError("missing required option " + flag);
    return value;
}

void require_file(const std::string& path, const std::string& flag) {
    require(path, flag);
    if (!fs::is_regular_file(path)) throw hg::DataError(flag + ": no such file: " + path);
}

hg::PipelineConfig pipeline_config(const Settings& s) {
    if (s.pipeline.empty()) return hg::PipelineConfig::defaults();
    require_file(s.pipeline, "--pipeline");
    return hg::load_pipeline_config(s.pipeline);
}

hg::Analyzers analyzers(const Settings& s) {
    auto a = hg::Analyzers::defaults();
    if (!s.tagger.empty()) {
        require_file(s.tagger, "--tagger");
        a.tagger = std::make_shared<const hg::PerceptronTagger>(hg::PerceptronTagger::load(s.tagger));
    }
    return a;
}

hg::CategoryLexicon lexicon(const Settings& s) {
    if (s.lexicon.empty()) return hg::CategoryLexicon::builtin();
    require_file(s.lexicon, "--lexicon");
    return hg::CategoryLexicon::load(s.lexicon);
}

hg::RankTable ranks(const Settings& s) {
    if (s.ranks.empty()) return hg::RankTable::builtin();
    require_file(s.ranks, "--ranks");
    return hg::RankTable::load(s.ranks);
}

hg::TrainConfig train_config(const Settings& s) {
    hg::TrainConfig t;
    t.algorithm = hg::parse_algorithm(s.classifier);
    t.rf_n_trees = s.rf_trees;
    t.svm_c = s.svm_c;
    t.svm_kernel_degree = s.svm_degree;
    t.smote_k = s.smote_k;
    t.seed = s.seed.value_or(0);
    t.validate();
    return t;
}

// Hashes of every input file that influences the result ("builtin" for
// resources compiled into the binary).
json input_hashes(const Settings& s, std::initializer_list<std::pair<const char*, const std::string*>> files) {
    json j = json::object();
    for (const auto& [name, path] : files) {
        if (path->empty()) j[name] = "builtin";
        else j[name] = {{"path", *path}, {"sha256", hg::sha256_file(*path)}};
    }
    (void)s;
    return j;
}

json effective_settings(const Settings& s) {
    json j;
    j["criterion"] = s.criterion;
    j["selector"] = s.selector;
    j["classifier"] = s.classifier;
    j["sizes"] = s.sizes;
    j["balancing"] = s.balancing;
    j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
    j["folds"] = s.folds;
    j["rf_trees"] = s.rf_trees;
    j["svm_c"] = s.svm_c;
    j["svm_degree"] = s.svm_degree;
    j["smote_k"] = s.smote_k;
    return j;
}

void write_manifest(const std::string& path, const std::string& command, json settings, json inputs,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["format_version"] = 1;
    j["settings"] = std::move(settings);
    j["inputs"] = std::move(inputs);
    json outs = json::object();
    for (const auto& o : outputs) outs[fs::path(o).filename().string()] = hg::sha256_file(o);
    j["outputs"] = std::move(outs);
    hg::write_file(path, j.dump(2) + "\n");
}

std::string manifest_path(const std::string& artifact) { return artifact + ".manifest.json"; }

// ------------------------------------------------------------------ ingest

int cmd_ingest(const Settings& s) {
    require_file(s.input, "--input");
    const std::string out = require(s.out, "--out");
    const auto corpus = hg::ingest_raw(hg::read_file(s.input), s.input);
    hg::save_corpus(corpus, out);
    write_manifest(manifest_path(out), "ingest", json::object(), input_hashes(s, {{"input", &s.input}}), {out});
    std::cout << "ingested " << corpus.articles.size() << " articles, " << corpus.labels.size()
              << " label records -> " << out << "\n\n"
              << hg::format_stats(hg::corpus_stats(corpus));
    return 0;
}

// -------------------------------------------------------------- preprocess

int cmd_preprocess(const Settings& s) {
    require_file(s.corpus, "--corpus");
    const std::string out = require(s.out, "--out");
    const auto corpus = hg::load_corpus(s.corpus);
    const auto config = pipeline_config(s);
    const auto clean = hg::preprocess_all(corpus.articles, config);
    hg::write_file(out, hg::serialize_clean(clean));
    write_manifest(manifest_path(out), "preprocess", json::parse(hg::describe(config)),
                   input_hashes(s, {{"corpus", &s.corpus}, {"pipeline", &s.pipeline}}), {out});
    std::cout << "preprocessed " << clean.size() << " articles -> " << out << '\n';
    return 0;
}

// --------------------------------------------------------------- featurize

json artifact_inputs(const Settings& s) {
    return input_hashes(s, {{"pipeline", &s.pipeline}, {"lexicon", &s.lexicon}, {"ranks", &s.ranks},
                            {"tagger", &s.tagger}});
}

std::string format_sparse_rows(const hg::Corpus& corpus, const std::vector<hg::AnalyzedDocument>& docs,
                               const hg::FeaturePipeline& pipeline) {
    std::ostringstream os;
    os.precision(10);
    os << "# " << pipeline.space().size() << " features, fingerprint " << pipeline.space().fingerprint() << '\n';
    for (std::size_t i = 0; i < docs.size(); ++i) {
        os << corpus.articles[i].id;
        for (const auto& [idx, v] : pipeline.transform(docs[i]).entries) os << '\t' << idx << ':' << v;
        os << '\n';
    }
    return os.str();
}

int cmd_featurize(const Settings& s) {
    require_file(s.corpus, "--corpus");
    const std::string artifacts = require(s.artifacts, "--artifacts");
    const auto corpus = hg::load_corpus(s.corpus);
    const auto clean = hg::preprocess_all(corpus.articles, pipeline_config(s));
    const auto docs = hg::analyze_all(corpus.articles, clean, analyzers(s));

    if (s.fit) {
        const auto a = analyzers(s);
        const auto pipeline = hg::FeaturePipeline::fit(docs, lexicon(s), ranks(s), a.tagger->tagset());
        pipeline.save(artifacts);
        const std::string space_path = artifacts + ".space.tsv";
        hg::write_file(space_path, pipeline.space().manifest());
        json inputs = artifact_inputs(s);
        inputs["corpus"] = {{"path", s.corpus}, {"sha256", hg::sha256_file(s.corpus)}};
        json settings = json::object();
        settings["fingerprint"] = pipeline.space().fingerprint();
        settings["features"] = pipeline.space().size();
        write_manifest(manifest_path(artifacts), "featurize --fit", settings, inputs, {artifacts, space_path});
        std::cout << "fitted " << pipeline.space().size() << " features on " << docs.size() << " articles -> "
                  << artifacts << '\n';
        for (std::size_t f = 0; f < hg::kFamilyCount; ++f) {
            const auto fam = static_cast<hg::Family>(f);
            std::cout << "  " << std::left << std::setw(8) << hg::family_name(fam) << pipeline.space().family_size(fam)
                      << '\n';
        }
        if (!s.out.empty()) hg::write_file(s.out, format_sparse_rows(corpus, docs, pipeline));
        return 0;
    }

    const auto pipeline = hg::FeaturePipeline::load(artifacts);
    if (fs::exists(manifest_path(artifacts))) {
        const auto recorded = json::parse(hg::read_file(manifest_path(artifacts)));
        const json current = artifact_inputs(s);
        for (const auto& [name, value] : current.items())
            if (recorded["inputs"].contains(name) && recorded["inputs"][name] != value)
                throw hg::DataError("input '" + name + "' differs from the one the artifacts in " + artifacts +
                                    " were fitted with; run `healthgrade featurize --fit` again");
    }
    const std::string out = require(s.out, "--out");
    hg::write_file(out, format_sparse_rows(corpus, docs, pipeline));
    json inputs = artifact_inputs(s);
    inputs["corpus"] = {{"path", s.corpus}, {"sha256", hg::sha256_file(s.corpus)}};
    inputs["artifacts"] = {{"path", artifacts}, {"sha256", hg::sha256_file(artifacts)}};
    write_manifest(manifest_path(out), "featurize", json::object(), inputs, {out});
    std::cout << "featurized " << docs.size() << " articles with " << pipeline.space().size() << " features -> "
              << out << '\n';
    return 0;
}

// ---------------------------------------------------------------- evaluate

void print_reports(const std::vector<hg::EvaluationReport>& reports) {
    std::cout << std::left << std::setw(10) << "criterion" << std::setw(9) << "selector" << std::setw(11)
              << "classifier" << std::setw(7) << "size" << std::setw(10) << "balancing" << std::right
              << std::setw(7) << "WP" << std::setw(7) << "WR" << std::setw(7) << "WF" << std::setw(7) << "AUC"
              << std::setw(9) << "seconds" << '\n';
    for (const auto& r : reports) {
        std::cout << std::left << std::setw(10) << r.criterion.value() << std::setw(9) << hg::evaluator_tag(r.selector)
                  << std::setw(11) << hg::algorithm_name(r.classifier) << std::setw(7) << hg::size_label(r.size)
                  << std::setw(10) << hg::balancing_name(r.balancing) << std::right << std::fixed
                  << std::setprecision(3) << std::setw(7) << r.metrics.wp << std::setw(7) << r.metrics.wr
                  << std::setw(7) << r.metrics.wf << std::setw(7) << r.roc.auc << std::setprecision(1)
                  << std::setw(9) << r.seconds << '\n';
        std::cout.unsetf(std::ios::fixed);
    }
}

int cmd_evaluate(Settings s, const std::string& command, std::vector<std::size_t> default_sizes) {
    if (!s.seed) throw hg::UsageError(command + " needs --seed (or \"seed\" in --config)");
    require_file(s.corpus, "--corpus");
    const std::string out = require(s.out, "--out");
    const auto criteria = parse_criteria(s.criterion);
    const auto sizes = s.sizes.empty() ? default_sizes : parse_sizes(s.sizes);
    const auto selector = hg::parse_evaluator(s.selector);
    const auto balancing = hg::parse_balancing(s.balancing);
    const auto train = train_config(s);
    if (!s.model_out.empty()) require_file(s.artifacts, "--artifacts");

    const auto corpus = hg::load_corpus(s.corpus);
    const auto data = hg::ExperimentData::prepare(corpus, pipeline_config(s), analyzers(s), lexicon(s), ranks(s));

    std::vector<hg::EvaluationReport> reports;
    for (const auto c : criteria) {
        hg::ExperimentConfig cfg;
        cfg.criterion = c;
        cfg.selector = selector;
        cfg.train = train;
        cfg.sizes = sizes;
        cfg.balancing = balancing;
        cfg.folds = s.folds;
        auto rows = hg::run_grid(data, cfg);
        reports.insert(reports.end(), rows.begin(), rows.end());
    }

    fs::create_directories(fs::path(out) / "roc");
    std::vector<std::string> outputs;
    const std::string report_path = (fs::path(out) / "report.csv").string();
    hg::write_file(report_path, hg::format_report_csv(reports));
    for (const auto& r : reports) {
        const auto roc_path = (fs::path(out) / "roc" / (hg::roc_file_stem(r) + ".csv")).string();
        hg::write_file(roc_path, hg::format_roc_csv(r.roc));
        outputs.push_back(roc_path);
    }
    outputs.insert(outputs.begin(), report_path);

    if (!s.model_out.empty()) {
        const auto pipeline = hg::FeaturePipeline::load(s.artifacts);
        hg::ModelBundle bundle;
        bundle.fingerprint = pipeline.space().fingerprint();
        for (const auto c : criteria)
            bundle.models.push_back(
                hg::train_criterion_model(data, pipeline, c, selector, sizes.front(), balancing, train));
        bundle.save(s.model_out);
        std::cout << "trained " << bundle.models.size() << " model(s) on the full corpus -> " << s.model_out << '\n';
    }

    json inputs = artifact_inputs(s);
    inputs["corpus"] = {{"path", s.corpus}, {"sha256", hg::sha256_file(s.corpus)}};
    json settings = effective_settings(s);
    json size_list = json::array();
    for (auto v : sizes) size_list.push_back(hg::size_label(v));
    settings["sizes"] = size_list;
    settings["aggregation"] = "pooled confusion matrix over folds";
    write_manifest((fs::path(out) / "manifest.json").string(), command, settings, inputs, outputs);
    print_reports(reports);
    std::cout << "report -> " << report_path << '\n';
    return 0;
}

// ----------------------------------------------------------------- explain

int cmd_explain(const Settings& s) {
    if (!s.seed) throw hg::UsageError("explain needs --seed (or \"seed\" in --config)");
    require_file(s.corpus, "--corpus");
    const auto criteria = parse_criteria(s.criterion);
    const auto corpus = hg::load_corpus(s.corpus);
    const auto data = hg::ExperimentData::prepare(corpus, pipeline_config(s), analyzers(s), lexicon(s), ranks(s));
    if (!s.out.empty()) fs::create_directories(s.out);
    for (const auto c : criteria) {
        const auto report = hg::explain_criterion(data, c, *s.seed, s.k);
        std::cout << "criterion " << c.value() << " (" << hg::criterion_name(c) << "): top " << report.top.size()
                  << " features, * = in every evaluator's top " << report.top.size() << '\n';
        std::cout << hg::format_combined(report.top, report.scores) << '\n';
        if (!s.out.empty()) {
            const fs::path dir(s.out);
            const std::string stem = "c" + std::to_string(c.value());
            hg::write_file((dir / (stem + "_combined.tsv")).string(), hg::format_combined(report.top, report.scores));
            for (const auto& sc : report.scores)
                hg::write_file((dir / (stem + "_" + std::string(hg::evaluator_tag(sc.evaluator)) + ".tsv")).string(),
                               hg::format_scores(sc, report.space));
        }
    }
    return 0;
}

// ------------------------------------------------------------------- score

// Articles to grade. Unlike corpus records these may have an empty body or
// no source URL; label records are skipped.
std::vector<hg::Article> read_articles(const std::string& path) {
    std::vector<hg::Article> out;
    std::size_t line_no = 0;
    for (const auto& line : hg::split_lines(hg::read_file(path))) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw hg::DataError(where + "unreadable article: " + e.what());
        }
        if (!j.is_object()) throw hg::DataError(where + "unreadable article: not a JSON object");
        if (j.value("kind", "article") != "article") continue;
        try {
            hg::Article a;
            a.id = j.at("id").get<std::string>();
            a.title = j.value("title", "");
            a.body = j.value("body", "");
            a.source_url = j.value("source_url", "");
            a.links = j.value("links", std::vector<std::string>{});
            if (a.id.empty()) throw hg::DataError(where + "article id is empty");
            out.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw hg::DataError(where + "unreadable article: " + e.what());
        }
    }
    if (out.empty()) throw hg::DataError(path + ": no articles to score");
    return out;
}

int cmd_score(const Settings& s) {
    require_file(s.model, "--model");
    require_file(s.artifacts, "--artifacts");
    require_file(s.articles, "--articles");
    const auto bundle = hg::ModelBundle::load(s.model);
    const auto pipeline = hg::FeaturePipeline::load(s.artifacts);
    if (bundle.fingerprint != pipeline.space().fingerprint())
        throw hg::DataError("model " + s.model + " was trained on a different feature space than " + s.artifacts);
    hg::Corpus input;
    input.articles = read_articles(s.articles);
    const auto clean = hg::preprocess_all(input.articles, pipeline_config(s));
    const auto docs = hg::analyze_all(input.articles, clean, analyzers(s));

    std::ostringstream jsonl;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::vector<double> dense(pipeline.space().size(), 0.0);
        pipeline.transform(docs[i]).scatter(dense);
        std::cout << "article " << input.articles[i].id << '\n';
        json verdicts = json::object();
        for (const auto& m : bundle.models) {
            std::vector<double> row;
            row.reserve(m.selected.size());
            for (auto f : m.selected) row.push_back(dense.at(f));
            const int label = m.model.predict(row);
            const double score = m.model.score(row);
            const char* verdict = label == 1 ? "Satisfactory" : "NotSatisfactory";
            std::cout << "  " << std::left << std::setw(3) << m.criterion.value() << std::setw(20)
                      << hg::criterion_name(m.criterion) << std::setw(17) << verdict << std::right << std::fixed
                      << std::setprecision(4) << score << '\n';
            std::cout.unsetf(std::ios::fixed);
            verdicts[std::to_string(m.criterion.value())] = {{"verdict", verdict}, {"score", score}};
        }
        jsonl << json{{"article_id", input.articles[i].id}, {"criteria", verdicts}}.dump() << '\n';
    }
    if (!s.out.empty()) hg::write_file(s.out, jsonl.str());
    return 0;
}

void add_artifact_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("--pipeline", s.pipeline, "Preprocessing config (JSON)");
    cmd->add_option("--lexicon", s.lexicon, "Category lexicon (category<TAB>pattern)");
    cmd->add_option("--ranks", s.ranks, "Domain rank table (domain,rank)");
    cmd->add_option("--tagger", s.tagger, "POS tagger weight file");
}

void add_experiment_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("--corpus", s.corpus, "Corpus (JSON Lines)");
    cmd->add_option("--criterion", s.criterion, "Criterion 1-10 or \"all\"");
    cmd->add_option("--selector", s.selector, "Feature selector: pc, lr, rf");
    cmd->add_option("--classifier", s.classifier, "Classifier: svm, gnb, rf, ensemble");
    cmd->add_option("--sizes", s.sizes, "Feature sizes: 1000..5000, 100,500,all");
    cmd->add_option("--balancing", s.balancing, "none, under, over, smote");
    cmd->add_option("--seed", s.seed, "Random seed (required)");
    cmd->add_option("--folds", s.folds, "Cross-validation folds");
    cmd->add_option("--out", s.out, "Output directory");
    cmd->add_option("--rf-trees", s.rf_trees, "Trees per random forest");
    cmd->add_option("--svm-c", s.svm_c, "SVM box constraint C");
    cmd->add_option("--svm-degree", s.svm_degree, "Polynomial kernel degree");
    cmd->add_option("--smote-k", s.smote_k, "SMOTE neighbours");
    cmd->add_option("--model-out", s.model_out, "Also train full-corpus models and save them here");
    cmd->add_option("--artifacts", s.artifacts, "Fitted feature artifacts (for --model-out)");
    add_artifact_options(cmd, s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grade health news articles against ten editorial quality criteria"};
    app.require_subcommand(1);
    Settings s;
    app.add_option("--config", s.config, "JSON config; command-line flags take precedence");
    app.add_option("--workers", s.workers, "Worker threads (0 = all cores)");
    app.add_flag("--quiet", s.quiet, "Suppress warnings");

    auto* ingest = app.add_subcommand("ingest", "Validate and normalize a raw corpus, print class statistics");
    ingest->add_option("--in,--input", s.input, "Raw corpus records (JSON Lines)");
    ingest->add_option("--out", s.out, "Normalized corpus output");

    auto* preprocess = app.add_subcommand("preprocess", "Write cleaned token streams");
    preprocess->add_option("--corpus", s.corpus, "Corpus (JSON Lines)");
    preprocess->add_option("--out", s.out, "Output (JSON Lines)");
    preprocess->add_option("--pipeline", s.pipeline, "Preprocessing config (JSON)");

    auto* featurize = app.add_subcommand("featurize", "Fit feature artifacts (--fit) or featurize a corpus");
    featurize->add_option("--corpus", s.corpus, "Corpus (JSON Lines)");
    featurize->add_option("--artifacts", s.artifacts, "Feature artifact file");
    featurize->add_flag("--fit", s.fit, "Fit and save the artifacts");
    featurize->add_option("--out", s.out, "Sparse feature rows output");
    add_artifact_options(featurize, s);

    auto* evaluate = app.add_subcommand("evaluate", "Cross-validate a selector/classifier grid");
    add_experiment_options(evaluate, s);
    auto* sweep = app.add_subcommand("sweep", "Feature-size sweep: 1000..5000, 10000, all");
    add_experiment_options(sweep, s);

    auto* explain = app.add_subcommand("explain", "Most discriminating features per criterion");
    explain->add_option("--corpus", s.corpus, "Corpus (JSON Lines)");
    explain->add_option("--criterion", s.criterion, "Criterion 1-10 or \"all\"");
    explain->add_option("--seed", s.seed, "Random seed (required)");
    explain->add_option("--k", s.k, "Features to list");
    explain->add_option("--out", s.out, "Directory for score tables");
    add_artifact_options(explain, s);

    auto* score = app.add_subcommand("score", "Grade new articles with a trained model bundle");
    score->add_option("--model", s.model, "Model bundle from evaluate --model-out");
    score->add_option("--artifacts", s.artifacts, "Feature artifacts the model was trained with");
    score->add_option("--articles", s.articles, "Articles to grade (JSON Lines)");
    score->add_option("--out", s.out, "Verdicts output (JSON Lines)");
    add_artifact_options(score, s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(s, *cmd);
        hg::set_worker_count(s.workers);
        hg::set_warnings_enabled(!s.quiet);
        if (cmd == ingest) return cmd_ingest(s);
        if (cmd == preprocess) return cmd_preprocess(s);
        if (cmd == featurize) return cmd_featurize(s);
        if (cmd == evaluate) return cmd_evaluate(s, "evaluate", {hg::kAllFeatures});
        if (cmd == sweep) return cmd_evaluate(s, "sweep", hg::default_sweep_sizes());
        if (cmd == explain) return cmd_explain(s);
        if (cmd == score) return cmd_score(s);
    } catch (const hg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
