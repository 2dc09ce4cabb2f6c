#pragma once

#include <string_view>

namespace hg {

struct EntityCounts {
    double persons = 0;
    double organizations = 0;
};

/// Pluggable named-entity counter run on raw article text.
class EntityRecognizer {
public:
    virtual ~EntityRecognizer() = default;
    virtual EntityCounts count(std::string_view raw_text) const = 0;
};

/// Capitalized-sequence heuristic. A sequence is a person when it follows an
/// honorific ("Dr.", "Prof.", ...) or starts with a known first name; it is an
/// organization when it contains an organization keyword ("University",
/// "Clinic", "Inc.", ...) or is a known agency acronym. Counts are mentions,
/// not distinct entities.
class GazetteerRecognizer final : public EntityRecognizer {
public:
    EntityCounts count(std::string_view raw_text) const override;
};

}  // namespace hg
