#pragma once

#include "moltpipe/analytics.hpp"
#include "moltpipe/crawl.hpp"
#include "moltpipe/normalize.hpp"
#include "moltpipe/pii.hpp"
#include "moltpipe/record.hpp"

#include <optional>
#include <string>
#include <vector>

namespace moltpipe {

inline constexpr std::string_view kToolkitVersion = "1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StageToggles {
    bool clean = true;
    bool anonymize = true;
    bool langid = true;
    bool analyze = true;
};

struct AnalyticsOptions {
    std::string self_domain = "www.moltbook.com";
    double rate_threshold_per_hour = 10.0;
    std::uint64_t xmin = 1;
};

struct PipelineConfig {
    StageToggles stages;
    std::string input;
    std::string output_dir = ".";
    CrawlConfig crawl;
    SpamParams spam;
    std::size_t length_limit_tokens = 100000;
    std::optional<std::string> blocklist_path;
    RecognizerConfig recognizers;
    std::optional<std::string> langid_model;
    AnalyticsOptions analytics;
    int parallelism = 1;
    std::uint64_t seed = 0;

    static PipelineConfig from_json(const Json& j);
    static PipelineConfig load(const std::string& path);
    Json to_json() const;
    // FNV-1a over the canonical form of every semantically meaningful
    // field (output_dir excluded).
    std::uint64_t config_hash() const;
    // Throws ConfigError on invariant violations or missing paths.
    void validate(bool require_input) const;
};

struct StageCounts {
    std::string stage;
    std::size_t records_in = 0;
    std::size_t records_out = 0;
    std::int64_t wall_ms = 0;
};

struct RemovalCounts {
    std::size_t spam = 0;
    std::size_t blocklist = 0;
    std::size_t too_long = 0;
};

struct RunManifest {
    std::string toolkit_version{kToolkitVersion};
    std::uint64_t config_hash = 0;
    std::vector<StageCounts> stages;
    MaskReport anonymization;
    RemovalCounts removals;
    std::size_t fields_processed_clean = 0;

    Json to_json() const;
    static RunManifest from_json(const Json& j);
};

// Field-level clean over one record; records are never dropped.
PostRecord clean_record(const PostRecord& record, const SpamParams& spam,
                        const std::vector<std::string>& blocklist, std::size_t limit_tokens,
                        RemovalCounts& removals, std::size_t& fields_processed);

struct RunResult {
    RunManifest manifest;
    std::optional<CorpusStats> stats;
    std::string final_output_path;
};

// Stages in fixed order: clean -> anonymize -> langid -> analyze.
// Intermediates are materialized under output_dir; byte-identical outputs
// for a fixed config and input, regardless of parallelism.
RunResult run_pipeline(const PipelineConfig& config);

// Table-shaped release report: corpus totals plus the anonymization
// summary. `stats` may be null when the analyze stage was disabled.
Json emit_report(const Corpus& corpus, const RunManifest& manifest, const CorpusStats* stats);
std::string render_report_text(const Json& report);

}  // namespace moltpipe
