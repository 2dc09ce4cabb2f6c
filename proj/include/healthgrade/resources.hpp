#pragma once

#include <string_view>

namespace hg::resources {

// Data files from data/ compiled into the library.
std::string_view stopwords();      // data/stopwords.txt
std::string_view contractions();   // data/contractions.tsv
std::string_view lexicon();        // data/lexicon.tsv
std::string_view ranks();          // data/ranks.csv
std::string_view tagger_weights(); // data/tagger.bin

}  // namespace hg::resources
