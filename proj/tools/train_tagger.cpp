// Trains the averaged-perceptron POS tagger shipped as data/tagger.bin.
//
//   train_tagger --out data/tagger.bin [--sentences 20000] [--extra tagged.txt]
//
// Training data are sentences from the synthetic article grammar, plus any
// "word/TAG" lines given with --extra.

#include <CLI11.hpp>

#include <iostream>

#include "healthgrade/common.hpp"
#include "healthgrade/synth.hpp"
#include "healthgrade/tagger.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Train the perceptron POS tagger"};
    std::string out;
    std::string extra;
    std::size_t sentences = 20000;
    int iterations = 5;
    unsigned seed = 1;
    app.add_option("--out", out, "Output weight file")->required();
    app.add_option("--sentences", sentences, "Synthetic sentences to generate");
    app.add_option("--extra", extra, "Additional word/TAG sentence file")->check(CLI::ExistingFile);
    app.add_option("--iterations", iterations, "Training epochs");
    app.add_option("--seed", seed, "Shuffle seed");
    CLI11_PARSE(app, argc, argv);

    try {
        auto data = hg::synth::tagged_sentences(sentences, seed);
        if (!extra.empty()) {
            auto more = hg::parse_tagged_sentences(hg::read_file(extra));
            data.insert(data.end(), more.begin(), more.end());
        }
        const auto tagger = hg::PerceptronTagger::train(data, hg::penn_tagset(), iterations, seed);
        tagger.save(out);
        std::cout << "trained on " << data.size() << " sentences, " << tagger.feature_count() << " features -> "
                  << out << '\n';
    } catch (const hg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return 0;
}
