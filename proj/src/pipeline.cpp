#include "moltpipe/pipeline.hpp"

#include "moltpipe/langid.hpp"
#include "moltpipe/text.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

namespace moltpipe {

namespace {

std::int64_t wall_ms_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Static chunking into `degree` workers; output order is input order, so
// the schedule never shows in the result.
template <typename Fn>
void parallel_for(std::size_t n, int degree, Fn&& fn) {
    if (degree <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(degree), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

PipelineConfig PipelineConfig::from_json(const Json& j) {
    PipelineConfig c;
    if (j.contains("stages")) {
        const auto& s = j["stages"];
        c.stages.clean = s.value("clean", true);
        c.stages.anonymize = s.value("anonymize", true);
        c.stages.langid = s.value("langid", true);
        c.stages.analyze = s.value("analyze", true);
    }
    c.input = j.value("input", "");
    c.output_dir = j.value("output_dir", ".");
    if (j.contains("crawl")) {
        const auto& cr = j["crawl"];
        c.crawl.base_url = cr.value("base_url", "");
        c.crawl.batch_size = cr.value("batch_size", 4);
        c.crawl.inter_batch_delay_ms = cr.value("inter_batch_delay_ms", std::int64_t{1000});
        if (cr.contains("window_start") && cr["window_start"].is_string())
            c.crawl.window_start = cr["window_start"].get<std::string>();
        if (cr.contains("window_end") && cr["window_end"].is_string())
            c.crawl.window_end = cr["window_end"].get<std::string>();
        c.crawl.max_retries = cr.value("max_retries", 3);
        c.crawl.user_agent = cr.value("user_agent", std::string("moltpipe/1.0"));
        if (cr.contains("bearer_token") && cr["bearer_token"].is_string())
            c.crawl.bearer_token = cr["bearer_token"].get<std::string>();
    }
    if (j.contains("spam")) {
        const auto& s = j["spam"];
        c.spam.max_consecutive_token_repeats = s.value("max_consecutive_token_repeats", 10);
        c.spam.ngram_len = s.value("ngram_len", 3);
        c.spam.max_consecutive_ngram_repeats = s.value("max_consecutive_ngram_repeats", 5);
    }
    c.length_limit_tokens = j.value("length_limit_tokens", std::size_t{100000});
    if (j.contains("blocklist_path") && j["blocklist_path"].is_string())
        c.blocklist_path = j["blocklist_path"].get<std::string>();
    if (j.contains("recognizers")) {
        const auto& r = j["recognizers"];
        if (r.contains("disabled_types"))
            for (const auto& t : r["disabled_types"])
                c.recognizers.disabled_types.insert(t.get<std::string>());
        if (r.contains("password_stop_words")) {
            c.recognizers.password_stop_words.clear();
            for (const auto& w : r["password_stop_words"])
                c.recognizers.password_stop_words.push_back(w.get<std::string>());
        }
        if (r.contains("custom_patterns")) {
            for (const auto& p : r["custom_patterns"]) {
                RecognizerConfig::CustomPattern cp;
                cp.id = p.value("id", "");
                cp.type_name = p.value("type", "");
                cp.pattern = p.value("pattern", "");
                cp.min_len = p.value("min_len", std::size_t{0});
                c.recognizers.custom_patterns.push_back(std::move(cp));
            }
        }
    }
    if (j.contains("langid_model") && j["langid_model"].is_string())
        c.langid_model = j["langid_model"].get<std::string>();
    if (j.contains("analytics")) {
        const auto& a = j["analytics"];
        c.analytics.self_domain = a.value("self_domain", std::string("www.moltbook.com"));
        c.analytics.rate_threshold_per_hour = a.value("rate_threshold_per_hour", 10.0);
        c.analytics.xmin = a.value("xmin", std::uint64_t{1});
    }
    c.parallelism = j.value("parallelism", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    Json j = Json::parse(f, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
    return from_json(j);
}

Json PipelineConfig::to_json() const {
    Json j = Json::object();
    j["stages"] = {{"clean", stages.clean},
                   {"anonymize", stages.anonymize},
                   {"langid", stages.langid},
                   {"analyze", stages.analyze}};
    j["input"] = input;
    j["output_dir"] = output_dir;
    Json cr = Json::object();
    cr["base_url"] = crawl.base_url;
    cr["batch_size"] = crawl.batch_size;
    cr["inter_batch_delay_ms"] = crawl.inter_batch_delay_ms;
    if (crawl.window_start) cr["window_start"] = *crawl.window_start;
    if (crawl.window_end) cr["window_end"] = *crawl.window_end;
    cr["max_retries"] = crawl.max_retries;
    cr["user_agent"] = crawl.user_agent;
    if (crawl.bearer_token) cr["bearer_token"] = *crawl.bearer_token;
    j["crawl"] = cr;
    j["spam"] = {{"max_consecutive_token_repeats", spam.max_consecutive_token_repeats},
                 {"ngram_len", spam.ngram_len},
                 {"max_consecutive_ngram_repeats", spam.max_consecutive_ngram_repeats}};
    j["length_limit_tokens"] = length_limit_tokens;
    if (blocklist_path) j["blocklist_path"] = *blocklist_path;
    Json rec = Json::object();
    rec["disabled_types"] = Json::array();
    for (const auto& t : recognizers.disabled_types) rec["disabled_types"].push_back(t);
    rec["password_stop_words"] = recognizers.password_stop_words;
    rec["custom_patterns"] = Json::array();
    for (const auto& p : recognizers.custom_patterns)
        rec["custom_patterns"].push_back(
            {{"id", p.id}, {"type", p.type_name}, {"pattern", p.pattern}, {"min_len", p.min_len}});
    j["recognizers"] = rec;
    if (langid_model) j["langid_model"] = *langid_model;
    j["analytics"] = {{"self_domain", analytics.self_domain},
                      {"rate_threshold_per_hour", analytics.rate_threshold_per_hour},
                      {"xmin", analytics.xmin}};
    j["parallelism"] = parallelism;
    j["seed"] = seed;
    return j;
}

std::uint64_t PipelineConfig::config_hash() const {
    Json j = to_json();
    // The hash identifies how fields are transformed, not which file they come
    // from or where results land, so paths and the worker count stay out. For
    // the blocklist and language model the contents are what matter, so their
    // path entries are replaced by a digest of the referenced file.
    j.erase("input");
    j.erase("output_dir");
    j.erase("parallelism");
    auto digest_path = [&](const char* key, const std::optional<std::string>& path) {
        j.erase(key);
        if (!path) return;
        std::ifstream in(*path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        j[std::string(key) + "_digest"] = fnv1a64(buf.str());
    };
    digest_path("blocklist_path", blocklist_path);
    digest_path("langid_model", langid_model);
    // nlohmann::json (non-ordered) sorts keys, giving a canonical dump.
    const nlohmann::json canonical = nlohmann::json::parse(j.dump());
    return fnv1a64(canonical.dump());
}

void PipelineConfig::validate(bool require_input) const {
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (crawl.batch_size < 1) throw ConfigError("crawl.batch_size must be >= 1");
    if (crawl.inter_batch_delay_ms < 0) throw ConfigError("crawl.inter_batch_delay_ms must be >= 0");
    if (spam.max_consecutive_token_repeats < 2 || spam.ngram_len < 2 ||
        spam.max_consecutive_ngram_repeats < 2)
        throw ConfigError("spam thresholds must all be >= 2");
    if (require_input) {
        if (input.empty()) throw ConfigError("input path is required");
        if (!std::filesystem::exists(input)) throw ConfigError("input does not exist: " + input);
    }
    if (blocklist_path && !std::filesystem::exists(*blocklist_path))
        throw ConfigError("blocklist does not exist: " + *blocklist_path);
    if (langid_model && !std::filesystem::exists(*langid_model))
        throw ConfigError("langid model does not exist: " + *langid_model);
}

// ---------------------------------------------------------------------------
// Manifest

Json RunManifest::to_json() const {
    Json j = Json::object();
    j["toolkit_version"] = toolkit_version;
    j["config_hash"] = config_hash;
    Json st = Json::array();
    for (const auto& s : stages)
        st.push_back({{"stage", s.stage},
                      {"records_in", s.records_in},
                      {"records_out", s.records_out},
                      {"wall_ms", s.wall_ms}});
    j["stages"] = st;
    Json ent = Json::object();
    for (const auto& [type, count] : anonymization.entities_by_type) ent[type] = count;
    j["anonymization"] = {{"fields_processed", anonymization.fields_processed},
                          {"fields_with_pii", anonymization.fields_with_detection},
                          {"total_entities_masked", anonymization.total_entities},
                          {"entities_by_type", ent}};
    j["removals"] = {{"spam", removals.spam},
                     {"blocklist", removals.blocklist},
                     {"too_long", removals.too_long}};
    j["fields_processed_clean"] = fields_processed_clean;
    return j;
}

RunManifest RunManifest::from_json(const Json& j) {
    RunManifest m;
    m.toolkit_version = j.value("toolkit_version", std::string());
    m.config_hash = j.value("config_hash", std::uint64_t{0});
    for (const auto& s : j.value("stages", Json::array())) {
        m.stages.push_back({s.value("stage", std::string()), s.value("records_in", std::size_t{0}),
                            s.value("records_out", std::size_t{0}),
                            s.value("wall_ms", std::int64_t{0})});
    }
    if (j.contains("anonymization")) {
        const auto& a = j["anonymization"];
        m.anonymization.fields_processed = a.value("fields_processed", std::size_t{0});
        m.anonymization.fields_with_detection = a.value("fields_with_pii", std::size_t{0});
        m.anonymization.total_entities = a.value("total_entities_masked", std::size_t{0});
        const Json ent = a.value("entities_by_type", Json::object());
        for (const auto& [type, count] : ent.items())
            m.anonymization.entities_by_type[type] = count.get<std::size_t>();
    }
    if (j.contains("removals")) {
        m.removals.spam = j["removals"].value("spam", std::size_t{0});
        m.removals.blocklist = j["removals"].value("blocklist", std::size_t{0});
        m.removals.too_long = j["removals"].value("too_long", std::size_t{0});
    }
    m.fields_processed_clean = j.value("fields_processed_clean", std::size_t{0});
    return m;
}

// ---------------------------------------------------------------------------
// Clean stage

namespace {

std::string apply_clean(const std::string& raw, const SpamParams& spam,
                        const std::vector<std::string>& blocklist, std::size_t limit_tokens,
                        RemovalCounts& removals, std::size_t& fields_processed) {
    ++fields_processed;
    FieldResult r = sanitize_field(raw, spam, blocklist, limit_tokens);
    switch (r.outcome) {
        case FieldOutcome::RemovedSpam: ++removals.spam; break;
        case FieldOutcome::RemovedBlocklist: ++removals.blocklist; break;
        case FieldOutcome::RemovedTooLong: ++removals.too_long; break;
        case FieldOutcome::Clean: break;
    }
    return std::move(r.text);
}

void clean_comment(CommentNode& c, const SpamParams& spam,
                   const std::vector<std::string>& blocklist, std::size_t limit_tokens,
                   RemovalCounts& removals, std::size_t& fields_processed) {
    c.content = apply_clean(c.content, spam, blocklist, limit_tokens, removals, fields_processed);
    for (auto& r : c.replies) clean_comment(r, spam, blocklist, limit_tokens, removals, fields_processed);
}

}  // namespace

PostRecord clean_record(const PostRecord& record, const SpamParams& spam,
                        const std::vector<std::string>& blocklist, std::size_t limit_tokens,
                        RemovalCounts& removals, std::size_t& fields_processed) {
    PostRecord out = record;
    out.title = apply_clean(out.title, spam, blocklist, limit_tokens, removals, fields_processed);
    out.content = apply_clean(out.content, spam, blocklist, limit_tokens, removals, fields_processed);
    for (auto& c : out.comments)
        clean_comment(c, spam, blocklist, limit_tokens, removals, fields_processed);
    return out;
}

// ---------------------------------------------------------------------------
// Run

RunResult run_pipeline(const PipelineConfig& config) {
    config.validate(/*require_input=*/true);
    std::filesystem::create_directories(config.output_dir);
    RunResult result;
    result.manifest.config_hash = config.config_hash();

    std::vector<std::string> blocklist;
    if (config.blocklist_path) blocklist = load_blocklist(*config.blocklist_path);

    auto in_lines = read_lines(config.input);
    // Drop trailing blank lines but keep record identity 1:1 with lines.
    while (!in_lines.empty() && in_lines.back().empty()) in_lines.pop_back();

    std::vector<PostRecord> records(in_lines.size());
    parallel_for(in_lines.size(), config.parallelism,
                 [&](std::size_t i) { records[i] = parse_post(in_lines[i], i + 1); });

    std::string current_path = config.input;

    auto write_stage = [&](const std::vector<PostRecord>& recs, const std::string& name) {
        std::vector<std::string> lines(recs.size());
        parallel_for(recs.size(), config.parallelism,
                     [&](std::size_t i) { lines[i] = serialize_post(recs[i]); });
        const std::string path = config.output_dir + "/" + name;
        write_lines(lines, path);
        return path;
    };

    if (config.stages.clean) {
        const std::int64_t t0 = wall_ms_now();
        std::vector<PostRecord> cleaned(records.size());
        std::vector<RemovalCounts> shard_removals(records.size());
        std::vector<std::size_t> shard_fields(records.size(), 0);
        parallel_for(records.size(), config.parallelism, [&](std::size_t i) {
            cleaned[i] = clean_record(records[i], config.spam, blocklist,
                                      config.length_limit_tokens, shard_removals[i],
                                      shard_fields[i]);
        });
        for (std::size_t i = 0; i < records.size(); ++i) {
            result.manifest.removals.spam += shard_removals[i].spam;
            result.manifest.removals.blocklist += shard_removals[i].blocklist;
            result.manifest.removals.too_long += shard_removals[i].too_long;
            result.manifest.fields_processed_clean += shard_fields[i];
        }
        const std::size_t in_count = records.size();
        records = std::move(cleaned);
        current_path = write_stage(records, "clean.jsonl");
        result.manifest.stages.push_back(
            {"clean", in_count, records.size(), wall_ms_now() - t0});
    }

    if (config.stages.anonymize) {
        const std::int64_t t0 = wall_ms_now();
        const PiiEngine engine(config.recognizers);
        std::vector<PostRecord> masked(records.size());
        std::vector<MaskReport> shard_reports(records.size());
        parallel_for(records.size(), config.parallelism, [&](std::size_t i) {
            auto [rec, report] = engine.anonymize_record(records[i]);
            masked[i] = std::move(rec);
            shard_reports[i] = std::move(report);
        });
        for (const auto& r : shard_reports) result.manifest.anonymization.merge(r);
        const std::size_t in_count = records.size();
        records = std::move(masked);
        current_path = write_stage(records, "masked.jsonl");
        result.manifest.stages.push_back(
            {"anonymize", in_count, records.size(), wall_ms_now() - t0});
    }

    if (config.stages.langid) {
        const std::int64_t t0 = wall_ms_now();
        std::optional<NgramClassifier> loaded;
        if (config.langid_model) loaded = NgramClassifier::load(*config.langid_model);
        const Classifier& classifier =
            loaded ? static_cast<const Classifier&>(*loaded) : NgramClassifier::builtin();
        parallel_for(records.size(), config.parallelism,
                     [&](std::size_t i) { tag_record(records[i], classifier); });
        current_path = write_stage(records, "tagged.jsonl");
        result.manifest.stages.push_back(
            {"langid", records.size(), records.size(), wall_ms_now() - t0});
    }

    if (config.stages.analyze) {
        const std::int64_t t0 = wall_ms_now();
        Corpus corpus;
        corpus.posts = records;
        result.stats = corpus_stats(corpus, config.analytics.self_domain,
                                    config.analytics.rate_threshold_per_hour,
                                    config.analytics.xmin);
        std::ofstream f(config.output_dir + "/stats.json", std::ios::trunc);
        f << stats_to_json(*result.stats).dump(2) << '\n';
        write_plot_csvs(*result.stats, config.output_dir + "/plots");
        result.manifest.stages.push_back(
            {"analyze", records.size(), records.size(), wall_ms_now() - t0});
    }

    result.final_output_path = current_path;
    {
        std::ofstream f(config.output_dir + "/manifest.json", std::ios::trunc);
        f << result.manifest.to_json().dump(2) << '\n';
    }
    return result;
}

// ---------------------------------------------------------------------------
// Report

Json emit_report(const Corpus& corpus, const RunManifest& manifest, const CorpusStats* stats) {
    Json j = Json::object();
    j["empty"] = corpus.posts.empty();
    j["total_posts"] = corpus.posts.size();
    std::size_t total_comments = 0;
    std::set<std::string> communities, authors;
    std::optional<std::int64_t> min_ts, max_ts;
    std::size_t total_post_chars = 0;
    std::map<std::string, std::size_t> lang_counts;
    for (const auto& p : corpus.posts) {
        total_comments += count_comments(p);
        communities.insert(p.submolt_name);
        authors.insert(p.author_id);
        if (!min_ts || p.created_at_epoch < *min_ts) min_ts = p.created_at_epoch;
        if (!max_ts || p.created_at_epoch > *max_ts) max_ts = p.created_at_epoch;
        total_post_chars += codepoint_length(p.content);
        if (p.lang) ++lang_counts[*p.lang];
    }
    j["total_comments"] = total_comments;
    j["unique_communities"] = communities.size();
    j["unique_authors"] = authors.size();
    if (min_ts) {
        j["date_range"] = {{"start", format_iso8601(*min_ts)}, {"end", format_iso8601(*max_ts)}};
    } else {
        j["date_range"] = nullptr;
    }
    j["avg_comments_per_post"] =
        corpus.posts.empty()
            ? 0.0
            : static_cast<double>(total_comments) / static_cast<double>(corpus.posts.size());
    j["avg_post_length_chars"] =
        corpus.posts.empty()
            ? 0.0
            : static_cast<double>(total_post_chars) / static_cast<double>(corpus.posts.size());
    if (!lang_counts.empty()) {
        std::string best;
        std::size_t best_count = 0, tagged = 0;
        for (const auto& [lang, count] : lang_counts) {
            tagged += count;
            if (count > best_count || (count == best_count && lang < best)) {
                best = lang;
                best_count = count;
            }
        }
        j["dominant_language"] = {
            {"lang", best},
            {"share", static_cast<double>(best_count) / static_cast<double>(tagged)}};
    } else {
        j["dominant_language"] = nullptr;
    }
    Json ent = Json::object();
    for (const auto& [type, count] : manifest.anonymization.entities_by_type) ent[type] = count;
    j["anonymization"] = {{"fields_processed", manifest.anonymization.fields_processed},
                          {"fields_with_pii", manifest.anonymization.fields_with_detection},
                          {"total_entities_masked", manifest.anonymization.total_entities},
                          {"entities_by_type", ent},
                          {"removed_spam", manifest.removals.spam},
                          {"removed_blocklist", manifest.removals.blocklist},
                          {"removed_too_long", manifest.removals.too_long}};
    if (stats) j["stats"] = stats_to_json(*stats);
    return j;
}

std::string render_report_text(const Json& report) {
    std::string out;
    auto row = [&](const std::string& k, const std::string& v) {
        out += k;
        out.append(k.size() < 28 ? 28 - k.size() : 1, ' ');
        out += v + "\n";
    };
    row("Total Posts", std::to_string(report["total_posts"].get<std::size_t>()));
    row("Total Comments", std::to_string(report["total_comments"].get<std::size_t>()));
    row("Unique Communities", std::to_string(report["unique_communities"].get<std::size_t>()));
    row("Unique Authors", std::to_string(report["unique_authors"].get<std::size_t>()));
    if (report["date_range"].is_object())
        row("Date Range", report["date_range"]["start"].get<std::string>() + " to " +
                              report["date_range"]["end"].get<std::string>());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", report["avg_comments_per_post"].get<double>());
    row("Avg Comments / Post", buf);
    std::snprintf(buf, sizeof buf, "%.1f", report["avg_post_length_chars"].get<double>());
    row("Avg Post Length (chars)", buf);
    if (report["dominant_language"].is_object()) {
        std::snprintf(buf, sizeof buf, "%s (%.1f%%)",
                      report["dominant_language"]["lang"].get<std::string>().c_str(),
                      100.0 * report["dominant_language"]["share"].get<double>());
        row("Dominant Language", buf);
    }
    out += "\nAnonymization\n";
    const auto& a = report["anonymization"];
    row("Text fields processed", std::to_string(a["fields_processed"].get<std::size_t>()));
    row("Fields with PII detected", std::to_string(a["fields_with_pii"].get<std::size_t>()));
    row("Total entities masked", std::to_string(a["total_entities_masked"].get<std::size_t>()));
    row("Removed (spam)", std::to_string(a["removed_spam"].get<std::size_t>()));
    row("Removed (blocklist)", std::to_string(a["removed_blocklist"].get<std::size_t>()));
    row("Removed (too long)", std::to_string(a["removed_too_long"].get<std::size_t>()));
    for (const auto& [type, count] : a["entities_by_type"].items())
        row("  " + type, std::to_string(count.get<std::size_t>()));
    return out;
}

}  // namespace moltpipe
