#pragma once

#include "moltpipe/record.hpp"
#include "moltpipe/text.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace moltpipe {

enum class EntityType {
    EmailAddress,
    PhoneNumber,
    CreditCard,
    Crypto,
    IbanCode,
    UsSsn,
    UsItin,
    ApiKey,
    Password,
    SeedPhrase,
};

std::string_view entity_type_name(EntityType type);  // "EMAIL_ADDRESS" etc.

struct EntitySpan {
    EntityType entity_type;
    std::size_t start;  // code-point offsets, half-open
    std::size_t end;
    std::string matched_text;
    std::string recognizer_id;
    double confidence = 1.0;

    bool operator==(const EntitySpan&) const = default;
};

struct MaskReport {
    std::map<std::string, std::size_t> entities_by_type;
    std::size_t fields_processed = 0;
    std::size_t fields_with_detection = 0;
    std::size_t total_entities = 0;

    void merge(const MaskReport& other);
};

struct RecognizerConfig {
    std::set<std::string> disabled_types;   // by entity-type name
    std::vector<std::string> password_stop_words = {
        "policy", "reset", "manager", "field", "required", "must",
        "protected", "strength", "hint", "prompt", "change",
        "changed", "incorrect", "invalid", "expired", "protection",
        "security", "recovery", "authentication", "login", "update"};
    // User-supplied extra patterns, matched with std::regex. Built-in
    // recognizers never backtrack; extras are the caller's risk.
    struct CustomPattern {
        std::string id;
        std::string type_name;
        std::string pattern;
        std::size_t min_len = 0;
    };
    std::vector<CustomPattern> custom_patterns;
};

class PiiEngine {
public:
    PiiEngine() : PiiEngine(RecognizerConfig{}) {}
    explicit PiiEngine(RecognizerConfig config);

    // All enabled recognizers, overlap-resolved, sorted by start offset.
    std::vector<EntitySpan> detect_entities(std::string_view text) const;

    // Individual recognizers; unresolved candidates.
    std::vector<EntitySpan> recognize_api_key(const CodepointView& v) const;
    std::vector<EntitySpan> recognize_password(const CodepointView& v) const;
    std::vector<EntitySpan> recognize_seed_phrase(const CodepointView& v) const;
    std::vector<EntitySpan> recognize_standard(const CodepointView& v) const;

    std::string mask(std::string_view text, const std::vector<EntitySpan>& spans) const;

    // Masks title, content, and every comment recursively; sentinels and
    // platform identifiers are untouched.
    std::pair<PostRecord, MaskReport> anonymize_record(const PostRecord& record) const;

    const RecognizerConfig& config() const { return config_; }

private:
    RecognizerConfig config_;
    bool enabled(EntityType t) const;
    std::string mask_field(const std::string& text, MaskReport& report) const;
};

// Longer span wins; ties by recognizer priority (custom > generic), then
// earlier start. Result is non-overlapping, sorted by start.
std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> spans);

int recognizer_priority(EntityType type);

std::string placeholder_for(EntityType type);  // "<PII:EMAIL_ADDRESS>"

}  // namespace moltpipe
