#include "healthgrade/entities.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

namespace hg {

namespace {

const std::unordered_set<std::string_view> kHonorifics = {
    "Dr", "Mr", "Mrs", "Ms", "Prof", "Professor", "Sir", "Dame", "Rev", "Sen", "Rep", "Gov", "Nurse",
};

const std::unordered_set<std::string_view> kOrgKeywords = {
    "University", "Clinic",   "Hospital",  "Institute",  "Inc",         "Corp",       "Corporation",
    "Company",    "Co",       "Ltd",       "LLC",        "Association", "Foundation", "Center",
    "Centre",     "College",  "School",    "Agency",     "Administration", "Department",
    "Society",    "Council",  "Organization", "Organisation", "Group", "Laboratories", "Labs",
    "Pharmaceuticals", "Pharma", "Academy", "Network", "Trust", "Board", "Bureau", "Commission",
    "Services",   "Journal",  "Ministry",  "Medicine",   "Health",
};

const std::unordered_set<std::string_view> kOrgAcronyms = {
    "FDA", "NIH", "CDC", "WHO", "NHS", "AMA", "NCI", "EMA", "CMS", "AHA", "ACS", "USPSTF",
    "NICE", "MIT", "UCLA", "UCSF", "NYU", "AARP", "BMJ", "JAMA", "NEJM", "HHS", "NIMH", "ADA",
};

const std::unordered_set<std::string_view> kFirstNames = {
    "James", "John", "Robert", "Michael", "William", "David", "Richard", "Joseph", "Thomas",
    "Charles", "Daniel", "Matthew", "Anthony", "Mark", "Paul", "Steven", "Andrew", "Kenneth",
    "Joshua", "Kevin", "Brian", "George", "Edward", "Ronald", "Timothy", "Jason", "Jeffrey",
    "Ryan", "Jacob", "Gary", "Eric", "Peter", "Alan", "Frank", "Scott", "Samuel", "Benjamin",
    "Mary", "Patricia", "Jennifer", "Linda", "Elizabeth", "Barbara", "Susan", "Jessica", "Sarah",
    "Karen", "Nancy", "Lisa", "Margaret", "Betty", "Sandra", "Ashley", "Dorothy", "Kimberly",
    "Emily", "Donna", "Michelle", "Carol", "Amanda", "Melissa", "Deborah", "Stephanie", "Rebecca",
    "Laura", "Sharon", "Cynthia", "Kathleen", "Amy", "Shirley", "Angela", "Helen", "Anna", "Jane",
    "Maria", "Emma", "Olivia", "Sophia", "Julia", "Rachel", "Ruth", "Alice", "Grace", "Claire",
};

struct Word {
    std::string text;
    bool capitalized = false;
    bool breaks_after = false;  // punctuation after the word ends a name run
};

std::string strip_tags(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_tag = false;
    for (char c : text) {
        if (c == '<') {
            in_tag = true;
            out.push_back(' ');
        } else if (c == '>' && in_tag) {
            in_tag = false;
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    return out;
}

bool word_char(char c) {
    const auto uc = static_cast<unsigned char>(c);
    return std::isalnum(uc) || c == '\'' || c == '-' || c == '&' || uc >= 0x80;
}

std::vector<Word> tokenize(std::string_view raw) {
    const std::string text = strip_tags(raw);
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!word_char(text[i])) {
            const char c = text[i];
            if (!words.empty() && !std::isspace(static_cast<unsigned char>(c))) {
                Word& last = words.back();
                const bool abbrev = c == '.' && (kHonorifics.contains(last.text) ||
                                                 (last.text.size() == 1 && last.capitalized) ||
                                                 last.text == "Inc" || last.text == "Co" ||
                                                 last.text == "Corp" || last.text == "Ltd");
                if (!abbrev) last.breaks_after = true;
            }
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && word_char(text[j])) ++j;
        Word w;
        w.text = text.substr(i, j - i);
        w.capitalized = std::isupper(static_cast<unsigned char>(w.text.front())) != 0;
        words.push_back(std::move(w));
        i = j;
    }
    return words;
}

}  // namespace

EntityCounts GazetteerRecognizer::count(std::string_view raw_text) const {
    EntityCounts counts;
    const auto words = tokenize(raw_text);
    std::size_t i = 0;
    while (i < words.size()) {
        const Word& w = words[i];
        if (!w.capitalized) {
            ++i;
            continue;
        }
        // Honorific followed by a capitalized run: a person.
        if (kHonorifics.contains(w.text) && !w.breaks_after && i + 1 < words.size() &&
            words[i + 1].capitalized) {
            std::size_t j = i + 1;
            while (j < words.size() && words[j].capitalized) {
                if (words[j].breaks_after) {
                    ++j;
                    break;
                }
                ++j;
            }
            counts.persons += 1;
            i = j;
            continue;
        }
        // Capitalized run, allowing "of"/"for"/"and" inside organization names.
        std::vector<const Word*> run{&w};
        bool has_org_keyword = kOrgKeywords.contains(w.text);
        std::size_t j = i + 1;
        if (!w.breaks_after) {
            while (j < words.size()) {
                const Word& next = words[j];
                if (next.capitalized) {
                    run.push_back(&next);
                    has_org_keyword = has_org_keyword || kOrgKeywords.contains(next.text);
                    ++j;
                    if (next.breaks_after) break;
                    continue;
                }
                const bool connector = next.text == "of" || next.text == "for" || next.text == "and" ||
                                       next.text == "&";
                if (connector && has_org_keyword && !next.breaks_after && j + 1 < words.size() &&
                    words[j + 1].capitalized) {
                    ++j;
                    continue;
                }
                break;
            }
        }
        if (has_org_keyword) {
            counts.organizations += 1;
        } else if (std::any_of(run.begin(), run.end(), [](const Word* r) { return kOrgAcronyms.contains(r->text); })) {
            counts.organizations += 1;
        } else if (run.size() >= 2 && kFirstNames.contains(run.front()->text)) {
            counts.persons += 1;
        }
        i = j;
    }
    return counts;
}

}  // namespace hg
