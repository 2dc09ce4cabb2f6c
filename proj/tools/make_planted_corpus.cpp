// Writes a seed-fixed synthetic corpus whose labels follow planted terms.
//
//   make_planted_corpus --out corpus.jsonl [--articles 1000] [--noise 0.1] [--seed N]

#include <CLI11.hpp>

#include <iostream>

#include "healthgrade/corpus.hpp"
#include "healthgrade/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a planted-signal corpus"};
    std::string out;
    hg::synth::PlantedConfig config;
    app.add_option("--out", out, "Output corpus (JSON Lines)")->required();
    app.add_option("--articles", config.articles, "Number of articles");
    app.add_option("--noise", config.label_noise, "Label flip probability");
    app.add_option("--na-rate", config.na_rate, "Probability of a Not Applicable label");
    app.add_option("--seed", config.seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto planted = hg::synth::make_planted_corpus(config);
        hg::save_corpus(planted.corpus, out);
        std::cout << hg::format_stats(hg::corpus_stats(planted.corpus));
    } catch (const hg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return 0;
}
