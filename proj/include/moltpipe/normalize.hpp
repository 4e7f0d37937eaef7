#pragma once

#include "moltpipe/record.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moltpipe {

inline constexpr std::string_view kSentinelSpam = "<REMOVED-SPAM>";
inline constexpr std::string_view kSentinelBlocklist = "<REMOVED-BLOCKLIST>";
inline constexpr std::string_view kSentinelTooLong = "<REMOVED-TOO-LONG>";

enum class FieldOutcome { Clean, RemovedSpam, RemovedBlocklist, RemovedTooLong };

std::string_view sentinel_for(FieldOutcome outcome);
bool is_sentinel(std::string_view text);

struct FieldResult {
    FieldOutcome outcome = FieldOutcome::Clean;
    std::string text;  // cleaned text when Clean, the sentinel string otherwise
    std::optional<std::string> reason;

    bool clean() const { return outcome == FieldOutcome::Clean; }
};

struct SpamParams {
    int max_consecutive_token_repeats = 10;
    int ngram_len = 3;
    int max_consecutive_ngram_repeats = 5;
};

// Decodes HTML/XML character references, collapses Unicode whitespace runs
// to single spaces, and trims. Idempotent.
std::string normalize_text(std::string_view raw);

bool detect_spam(std::string_view normalized, const SpamParams& params = {});

// Case-insensitive phrase match on word boundaries.
bool apply_blocklist(std::string_view normalized, const std::vector<std::string>& blocklist);

// Token = maximal run of non-whitespace code points.
bool exceeds_length(std::string_view normalized, std::size_t limit_tokens = 100000);

// normalize, then spam -> blocklist -> too-long, first hit wins.
FieldResult sanitize_field(std::string_view raw, const SpamParams& params,
                           const std::vector<std::string>& blocklist,
                           std::size_t limit_tokens = 100000);

// One phrase per line, '#' starts a comment, blank lines ignored.
std::vector<std::string> load_blocklist(const std::string& path);

// FNV-1a-64 over the UTF-8 bytes of the first 200 code points.
std::uint64_t template_hash(std::string_view normalized);

struct DuplicateCluster {
    std::uint64_t hash;
    std::size_t count;
    std::vector<std::string> sample_post_ids;  // up to 5
};

// Clusters with count >= 2, sorted by count descending, ties by hash.
std::vector<DuplicateCluster> duplicate_report(const Corpus& corpus);

}  // namespace moltpipe
