#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "moltpipe/pipeline.hpp"
#include "moltpipe/record.hpp"

#include "fixture.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace moltpipe;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& child = "") const {
        return child.empty() ? path.string() : (path / child).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

PipelineConfig fixture_config(const TempDir& dir, const fixture::Truth& truth) {
    PipelineConfig cfg;
    cfg.input = dir.str("raw.jsonl");
    cfg.output_dir = dir.str("out");
    cfg.length_limit_tokens = truth.length_limit_tokens;
    cfg.blocklist_path = dir.str("blocklist.txt");
    std::ofstream bl(*cfg.blocklist_path, std::ios::trunc);
    for (const auto& phrase : truth.blocklist) bl << phrase << '\n';
    bl.close();
    return cfg;
}

}  // namespace

TEST_CASE("config: load, validate, hash semantics") {
    TempDir dir("moltpipe_cfg_test");
    {
        std::ofstream f(dir.str("input.jsonl"));
        f << "";
    }
    PipelineConfig cfg;
    cfg.input = dir.str("input.jsonl");
    cfg.output_dir = dir.str("out");
    CHECK_NOTHROW(cfg.validate(true));

    PipelineConfig bad = cfg;
    bad.parallelism = 0;
    CHECK_THROWS_AS(bad.validate(false), ConfigError);
    bad = cfg;
    bad.input = dir.str("missing.jsonl");
    CHECK_THROWS_AS(bad.validate(true), ConfigError);
    bad = cfg;
    bad.blocklist_path = dir.str("missing.txt");
    CHECK_THROWS_AS(bad.validate(false), ConfigError);

    // Hash: stable, insensitive to output_dir and parallelism, sensitive to
    // semantic fields.
    const std::uint64_t h = cfg.config_hash();
    CHECK(h == cfg.config_hash());
    PipelineConfig moved = cfg;
    moved.output_dir = dir.str("elsewhere");
    moved.parallelism = 8;
    CHECK(moved.config_hash() == h);
    PipelineConfig changed = cfg;
    changed.spam.ngram_len = 4;
    CHECK(changed.config_hash() != h);
    changed = cfg;
    changed.length_limit_tokens = 99;
    CHECK(changed.config_hash() != h);
    changed = cfg;
    changed.stages.langid = false;
    CHECK(changed.config_hash() != h);

    // JSON round-trip preserves the hash.
    PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.config_hash() == h);

    // Malformed config file is a ConfigError.
    {
        std::ofstream f(dir.str("bad.json"));
        f << "{not json";
    }
    CHECK_THROWS_AS(PipelineConfig::load(dir.str("bad.json")), ConfigError);
}

TEST_CASE("clean_record: sentinels applied per field, records never dropped") {
    auto [corpus, truth] = fixture::make_corpus();
    RemovalCounts removals;
    std::size_t fields = 0;
    std::vector<PostRecord> cleaned;
    for (const auto& p : corpus.posts)
        cleaned.push_back(
            clean_record(p, SpamParams{}, truth.blocklist, truth.length_limit_tokens,
                         removals, fields));
    CHECK(cleaned.size() == corpus.posts.size());
    CHECK(removals.spam == truth.spam_fields);
    CHECK(removals.blocklist == truth.blocklist_fields);
    CHECK(removals.too_long == truth.too_long_fields);
    // Fields = title + content + every comment, for every record.
    CHECK(fields == 2 * corpus.posts.size() + truth.total_comments);
    std::size_t comments_after = 0;
    for (const auto& p : cleaned) comments_after += count_comments(p);
    CHECK(comments_after == truth.total_comments);
}

TEST_CASE("full run on the fixture: manifest matches planted ground truth") {
    auto [corpus, truth] = fixture::make_corpus();
    TempDir dir("moltpipe_run_test");
    write_corpus(corpus, dir.str("raw.jsonl"));
    PipelineConfig cfg = fixture_config(dir, truth);

    RunResult result = run_pipeline(cfg);
    const RunManifest& m = result.manifest;
    CHECK(m.removals.spam == truth.spam_fields);
    CHECK(m.removals.blocklist == truth.blocklist_fields);
    CHECK(m.removals.too_long == truth.too_long_fields);
    CHECK(m.anonymization.total_entities == truth.total_entities);
    for (const auto& [type, count] : truth.entities_by_type)
        CHECK(m.anonymization.entities_by_type.at(type) == count);

    // Stage conservation: records are never dropped.
    REQUIRE(m.stages.size() == 4);
    for (const auto& s : m.stages) {
        CHECK(s.records_in == truth.total_posts);
        CHECK(s.records_out == truth.total_posts);
    }

    // Grep-count oracle: manifest entity totals equal placeholders in output.
    const std::string tagged = slurp(dir.str("out/tagged.jsonl"));
    CHECK(count_occurrences(tagged, "<PII:") == truth.total_entities);
    for (const auto& [type, count] : truth.entities_by_type)
        CHECK(count_occurrences(tagged, "<PII:" + type + ">") == count);
    CHECK(count_occurrences(tagged, "<REMOVED-SPAM>") == truth.spam_fields);
    CHECK(count_occurrences(tagged, "<REMOVED-BLOCKLIST>") == truth.blocklist_fields);
    CHECK(count_occurrences(tagged, "<REMOVED-TOO-LONG>") == truth.too_long_fields);

    // All intermediates and reports exist.
    for (const char* name : {"clean.jsonl", "masked.jsonl", "tagged.jsonl", "stats.json",
                             "manifest.json"})
        CHECK(fs::exists(dir.str(std::string("out/") + name)));
    CHECK(fs::exists(dir.str("out/plots/depth_histogram.csv")));

    // Manifest on disk round-trips.
    RunManifest reloaded = RunManifest::from_json(Json::parse(slurp(dir.str("out/manifest.json"))));
    CHECK(reloaded.to_json().dump() == m.to_json().dump());
    CHECK(reloaded.config_hash == cfg.config_hash());
}

TEST_CASE("determinism: parallelism 1 vs 8 produce byte-identical outputs") {
    auto [corpus, truth] = fixture::make_corpus();
    TempDir dir1("moltpipe_par1");
    TempDir dir8("moltpipe_par8");
    write_corpus(corpus, dir1.str("raw.jsonl"));
    write_corpus(corpus, dir8.str("raw.jsonl"));
    PipelineConfig c1 = fixture_config(dir1, truth);
    c1.parallelism = 1;
    PipelineConfig c8 = fixture_config(dir8, truth);
    c8.parallelism = 8;
    run_pipeline(c1);
    run_pipeline(c8);
    for (const char* name : {"clean.jsonl", "masked.jsonl", "tagged.jsonl", "stats.json"}) {
        INFO(name);
        CHECK(slurp(dir1.str(std::string("out/") + name)) ==
              slurp(dir8.str(std::string("out/") + name)));
    }
    // Manifests agree except for wall times.
    Json m1 = Json::parse(slurp(dir1.str("out/manifest.json")));
    Json m8 = Json::parse(slurp(dir8.str("out/manifest.json")));
    for (auto& s : m1["stages"]) s.erase("wall_ms");
    for (auto& s : m8["stages"]) s.erase("wall_ms");
    CHECK(m1.dump() == m8.dump());
}

TEST_CASE("stage toggles: analyze-only run leaves records untouched") {
    auto [corpus, truth] = fixture::make_corpus();
    TempDir dir("moltpipe_toggle");
    write_corpus(corpus, dir.str("raw.jsonl"));
    PipelineConfig cfg = fixture_config(dir, truth);
    cfg.stages.clean = cfg.stages.anonymize = cfg.stages.langid = false;
    RunResult result = run_pipeline(cfg);
    REQUIRE(result.manifest.stages.size() == 1);
    CHECK(result.manifest.stages[0].stage == "analyze");
    REQUIRE(result.stats.has_value());
    CHECK(result.stats->tree.comment_count == truth.total_comments);
    // No cleaning happened, so no sentinel or placeholder output files.
    CHECK_FALSE(fs::exists(dir.str("out/clean.jsonl")));
    CHECK(result.final_output_path == cfg.input);
}

TEST_CASE("emit_report: fixture totals equal direct recount; edge cases") {
    auto [corpus, truth] = fixture::make_corpus();
    TempDir dir("moltpipe_report");
    write_corpus(corpus, dir.str("raw.jsonl"));
    PipelineConfig cfg = fixture_config(dir, truth);
    RunResult result = run_pipeline(cfg);

    // Report over the tagged output.
    Corpus tagged;
    tagged.posts.clear();
    {
        auto lines = read_lines(dir.str("out/tagged.jsonl"));
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
        for (std::size_t i = 0; i < lines.size(); ++i)
            tagged.posts.push_back(parse_post(lines[i], i + 1));
    }
    Json report = emit_report(tagged, result.manifest, &*result.stats);
    CHECK(report["empty"] == false);
    CHECK(report["total_posts"] == truth.total_posts);
    CHECK(report["total_comments"] == truth.total_comments);
    CHECK(report["unique_communities"] == truth.unique_communities);
    CHECK(report["unique_authors"] == 15);
    CHECK(report["date_range"]["start"] == corpus.posts.front().created_at);
    CHECK(report["date_range"]["end"] == corpus.posts.back().created_at);
    CHECK(report["avg_comments_per_post"].get<double>() ==
          doctest::Approx(static_cast<double>(truth.total_comments) / truth.total_posts));
    CHECK(report["anonymization"]["total_entities_masked"] == truth.total_entities);
    CHECK(report["dominant_language"]["lang"] == "en");
    // Language shares within the classifier's ±3-point corpus tolerance.
    CHECK(report["dominant_language"]["share"].get<double>() ==
          doctest::Approx(0.8).epsilon(0.04));

    // Text rendering contains the headline rows.
    const std::string text = render_report_text(report);
    CHECK(text.find("Total Posts") != std::string::npos);
    CHECK(text.find("Unique Communities") != std::string::npos);
    CHECK(text.find("Avg Comments / Post") != std::string::npos);
    CHECK(text.find("Dominant Language") != std::string::npos);

    // Empty corpus: zeroed report with the explicit flag.
    Json empty = emit_report(Corpus{}, RunManifest{}, nullptr);
    CHECK(empty["empty"] == true);
    CHECK(empty["total_posts"] == 0);
    CHECK(empty["dominant_language"].is_null());

    // Single-language corpus: share is exactly 1.
    Corpus mono;
    for (int i = 0; i < 3; ++i) {
        PostRecord p = corpus.posts[i * 5];  // English slots
        p.post_id = "mono" + std::to_string(i);
        p.lang = "en";
        p.comments.clear();
        mono.posts.push_back(p);
    }
    Json mono_report = emit_report(mono, RunManifest{}, nullptr);
    CHECK(mono_report["dominant_language"]["share"] == 1.0);
}

TEST_CASE("stage failure leaves prior outputs intact") {
    auto [corpus, truth] = fixture::make_corpus();
    TempDir dir("moltpipe_fail");
    write_corpus(corpus, dir.str("raw.jsonl"));
    {
        std::ofstream f(dir.str("raw.jsonl"), std::ios::app);
        f << "{broken json\n";
    }
    PipelineConfig cfg = fixture_config(dir, truth);
    CHECK_THROWS_AS(run_pipeline(cfg), ParseError);
}
