#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "healthgrade/eval.hpp"
#include "test_util.hpp"

using namespace hg;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
    const std::string cmd = std::string(HG_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct ScratchDir {
    fs::path path;
    ScratchDir() : path(fs::temp_directory_path() / ("hg_cli_" + std::to_string(getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

const fs::path& workdir() {
    static const ScratchDir dir;
    return dir.path;
}

std::string in_work(const std::string& name) { return (workdir() / name).string(); }

std::string demo_corpus() { return std::string(HG_SOURCE_DIR) + "/data/demo_corpus.jsonl"; }

std::size_t data_rows(const std::string& csv) {
    std::size_t n = 0;
    for (const auto& l : split_lines(csv))
        if (!l.empty() && l[0] != '#' && l.rfind("criterion,", 0) != 0) ++n;
    return n;
}

// Normalized corpus plus fitted artifacts shared by several cases.
const std::string& fitted_artifacts() {
    static const std::string path = [] {
        const auto corpus = in_work("corpus.jsonl");
        REQUIRE(run("ingest --in " + demo_corpus() + " --out " + corpus).code == 0);
        const auto artifacts = in_work("features.bin");
        REQUIRE(run("featurize --fit --corpus " + corpus + " --artifacts " + artifacts).code == 0);
        return artifacts;
    }();
    return path;
}

}  // namespace

TEST_CASE("ingest prints the class table") {
    const auto r = run("ingest --in " + demo_corpus() + " --out " + in_work("ingested.jsonl"));
    CHECK(r.code == 0);
    CHECK(contains(r.output, "ingested 300 articles"));
    CHECK(contains(r.output, "criterion"));
    CHECK(contains(r.output, "news-release"));
    CHECK(fs::exists(in_work("ingested.jsonl.manifest.json")));
}

TEST_CASE("reruns with unchanged inputs produce identical artifacts") {
    const auto corpus = in_work("rerun.jsonl");
    REQUIRE(run("ingest --in " + demo_corpus() + " --out " + corpus).code == 0);
    const auto first = read_file(corpus), first_manifest = read_file(corpus + ".manifest.json");
    REQUIRE(run("ingest --in " + demo_corpus() + " --out " + corpus).code == 0);
    CHECK(read_file(corpus) == first);
    CHECK(read_file(corpus + ".manifest.json") == first_manifest);

    const auto art = in_work("rerun.bin");
    REQUIRE(run("featurize --fit --corpus " + corpus + " --artifacts " + art).code == 0);
    const auto a1 = read_file(art), s1 = read_file(art + ".space.tsv"), m1 = read_file(art + ".manifest.json");
    REQUIRE(run("featurize --fit --corpus " + corpus + " --artifacts " + art).code == 0);
    CHECK(read_file(art) == a1);
    CHECK(read_file(art + ".space.tsv") == s1);
    CHECK(read_file(art + ".manifest.json") == m1);

    const auto clean = in_work("clean.jsonl");
    REQUIRE(run("preprocess --corpus " + corpus + " --out " + clean).code == 0);
    const auto c1 = read_file(clean);
    REQUIRE(run("preprocess --corpus " + corpus + " --out " + clean).code == 0);
    CHECK(read_file(clean) == c1);

    const auto manifest = json::parse(m1);
    CHECK(manifest["inputs"]["corpus"]["sha256"] == sha256_hex(read_file(corpus)));
}

TEST_CASE("featurize without fitted artifacts asks for a fit") {
    const auto r = run("featurize --corpus " + demo_corpus() + " --artifacts " + in_work("missing.bin") +
                       " --out " + in_work("rows.tsv"));
    CHECK(r.code == 2);
    CHECK(contains(r.output, "featurize --fit"));
}

TEST_CASE("featurize writes sparse rows and notices changed inputs") {
    const auto artifacts = fitted_artifacts();
    const auto rows = in_work("rows.tsv");
    const auto r = run("featurize --corpus " + in_work("corpus.jsonl") + " --artifacts " + artifacts + " --out " + rows);
    REQUIRE(r.code == 0);
    const auto lines = split_lines(read_file(rows));
    CHECK(lines[0].rfind("# ", 0) == 0);
    CHECK(lines[1].rfind("planted-0001\t", 0) == 0);

    const auto lexicon = in_work("lexicon.tsv");
    write_file(lexicon, read_file(std::string(HG_SOURCE_DIR) + "/data/lexicon.tsv") + "Extra\tzzzz\n");
    const auto changed = run("featurize --corpus " + in_work("corpus.jsonl") + " --artifacts " + artifacts +
                             " --lexicon " + lexicon + " --out " + rows);
    CHECK(changed.code == 2);
    CHECK(contains(changed.output, "featurize --fit"));
}

TEST_CASE("usage errors exit with 1") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    const auto no_seed = run("evaluate --corpus " + demo_corpus() + " --out " + in_work("x"));
    CHECK(no_seed.code == 1);
    CHECK(contains(no_seed.output, "--seed"));
    CHECK(run("evaluate --seed 1 --corpus " + demo_corpus() + " --out " + in_work("x") + " --criterion 11").code == 1);
    CHECK(run("evaluate --seed 1 --corpus " + demo_corpus() + " --out " + in_work("x") + " --classifier knn").code ==
          1);
}

TEST_CASE("data errors exit with 2") {
    const auto bad = in_work("bad.jsonl");
    write_file(bad, "{\"kind\":\"article\",\"id\":\n");
    CHECK(run("ingest --in " + bad + " --out " + in_work("bad_out.jsonl")).code == 2);
    CHECK(run("ingest --in " + in_work("nope.jsonl") + " --out " + in_work("bad_out.jsonl")).code == 2);
}

TEST_CASE("sweep sizes and the criterion grid") {
    const auto out = in_work("sweep");
    const auto r = run("evaluate --corpus " + demo_corpus() +
                       " --criterion 1 --selector pc --classifier svm --sizes 1000..5000 --folds 3 --seed 3 --out " +
                       out);
    REQUIRE(r.code == 0);
    const auto report = read_file(out + "/report.csv");
    CHECK(data_rows(report) == 5);
    CHECK(std::distance(fs::directory_iterator(out + "/roc"), fs::directory_iterator{}) == 5);
    const auto manifest = json::parse(read_file(out + "/manifest.json"));
    CHECK(manifest["settings"]["seed"] == 3);
    CHECK(manifest["outputs"].size() == 6);

    const auto all = in_work("all");
    REQUIRE(run("evaluate --corpus " + demo_corpus() + " --criterion all --sizes 100,all --folds 3 --seed 3 --out " +
                all)
                .code == 0);
    CHECK(data_rows(read_file(all + "/report.csv")) == 20);
}

TEST_CASE("config values yield to flags") {
    const auto cfg = in_work("run.json");
    write_file(cfg, json{{"corpus", demo_corpus()}, {"criterion", "2"}, {"folds", 3}, {"seed", 5}, {"sizes", "100"},
                         {"out", in_work("from_config")}}
                        .dump());
    const auto r = run("--config " + cfg + " evaluate --criterion 4");
    REQUIRE(r.code == 0);
    const auto report = read_file(in_work("from_config") + "/report.csv");
    const auto lines = split_lines(report);
    CHECK(lines[2].rfind("4,CoAE-PC,svm,100,", 0) == 0);
    const auto manifest = json::parse(read_file(in_work("from_config") + "/manifest.json"));
    CHECK(manifest["settings"]["criterion"] == "4");
    CHECK(manifest["settings"]["folds"] == 3);

    write_file(cfg, json{{"no_such_key", 1}}.dump());
    CHECK(run("--config " + cfg + " evaluate --seed 1").code == 1);
}

TEST_CASE("scoring new articles") {
    const auto artifacts = fitted_artifacts();
    const auto corpus = in_work("corpus.jsonl");
    const auto model = in_work("model.bin");
    REQUIRE(run("evaluate --corpus " + corpus + " --criterion all --sizes 200 --folds 3 --seed 9 --out " +
                in_work("for_model") + " --artifacts " + artifacts + " --model-out " + model)
                .code == 0);

    const auto two = in_work("two.jsonl");
    write_file(two,
               "{\"kind\":\"article\",\"id\":\"second\",\"title\":\"Drug prices\",\"body\":\"The cost of the pill is "
               "$400 a month.\"}\n"
               "{\"kind\":\"article\",\"id\":\"first\",\"title\":\"Nothing\",\"body\":\"\"}\n");
    const auto verdicts = in_work("verdicts.jsonl");
    const auto r = run("score --model " + model + " --artifacts " + artifacts + " --articles " + two + " --out " +
                       verdicts);
    REQUIRE(r.code == 0);
    const auto a = r.output.find("article second"), b = r.output.find("article first");
    CHECK(a != std::string::npos);
    CHECK(b != std::string::npos);
    CHECK(a < b);
    CHECK(contains(r.output, "warning"));
    const auto lines = split_lines(read_file(verdicts));
    REQUIRE(lines.size() >= 2);
    const auto empty = json::parse(lines[1]);
    CHECK(empty["article_id"] == "first");
    CHECK(empty["criteria"].size() == 10);
    for (const auto& [c, v] : empty["criteria"].items()) {
        CHECK((v["verdict"] == "Satisfactory" || v["verdict"] == "NotSatisfactory"));
        CHECK(std::isfinite(v["score"].get<double>()));
    }

    // Training articles the bundle places beyond the margin keep their training label.
    const auto loaded = load_corpus(corpus);
    const auto bundle = ModelBundle::load(model);
    const auto scored = json::parse(split_lines(read_file(verdicts))[0]);
    CHECK(scored["article_id"] == "second");
    const auto train_out = in_work("train_verdicts.jsonl");
    REQUIRE(run("score --model " + model + " --artifacts " + artifacts + " --articles " + corpus + " --out " +
                train_out)
                .code == 0);
    std::size_t confident = 0;
    for (const auto& line : split_lines(read_file(train_out))) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        const auto* labels = loaded.labels_for(j["article_id"].get<std::string>());
        REQUIRE(labels != nullptr);
        for (const auto& m : bundle.models) {
            const auto l = labels->at(m.criterion);
            if (l == Label::NotApplicable) continue;
            const int truth = l == Label::Satisfactory ? 1 : 0;
            const auto& v = j["criteria"][std::to_string(m.criterion.value())];
            if ((2 * truth - 1) * v["score"].get<double>() < 1.0) continue;
            CHECK(v["verdict"] == (truth ? "Satisfactory" : "NotSatisfactory"));
            ++confident;
        }
    }
    CHECK(confident > 100);

    const auto other = in_work("other.bin");
    write_file(in_work("small.jsonl"), [&] {
        std::string s;
        const auto ls = split_lines(read_file(corpus));
        for (std::size_t i = 0; i < 60 && i < ls.size(); ++i) s += ls[i] + "\n";
        return s;
    }());
    REQUIRE(run("featurize --fit --corpus " + in_work("small.jsonl") + " --artifacts " + other).code == 0);
    const auto mismatch = run("score --model " + model + " --artifacts " + other + " --articles " + two);
    CHECK(mismatch.code == 2);
    CHECK(contains(mismatch.output, "different feature space"));

    write_file(in_work("garbled.jsonl"), "not json\n");
    CHECK(run("score --model " + model + " --artifacts " + artifacts + " --articles " + in_work("garbled.jsonl"))
              .code == 2);
}

TEST_CASE("demo corpus evaluation finishes within five minutes") {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run("evaluate --corpus " + demo_corpus() + " --criterion 1 --seed 1 --out " + in_work("demo"));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.code == 0);
    CHECK(seconds < 300.0);
    CHECK(data_rows(read_file(in_work("demo") + "/report.csv")) == 1);
}
