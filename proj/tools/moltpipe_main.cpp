// moltpipe: collect, sanitize, anonymize, language-tag, and characterize
// corpora of social-platform posts stored as JSON Lines.

#include <CLI11.hpp>

#include "moltpipe/analytics.hpp"
#include "moltpipe/crawl.hpp"
#include "moltpipe/langid.hpp"
#include "moltpipe/normalize.hpp"
#include "moltpipe/pii.hpp"
#include "moltpipe/pipeline.hpp"
#include "moltpipe/record.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace moltpipe;

constexpr int kExitOk = 0;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitStageFailure = 3;
constexpr int kExitPartialCrawl = 4;

struct CommonOpts {
    std::string config_path;
    std::string input;
    std::string output;
    int parallelism = 0;  // 0 = use config value
};

PipelineConfig load_config(const CommonOpts& opts) {
    std::string path = opts.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("MOLTPIPE_CONFIG")) path = env;
    }
    PipelineConfig cfg = path.empty() ? PipelineConfig{} : PipelineConfig::load(path);
    if (!opts.input.empty()) cfg.input = opts.input;
    if (!opts.output.empty()) cfg.output_dir = opts.output;
    if (opts.parallelism > 0) cfg.parallelism = opts.parallelism;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (JSON); defaults to $MOLTPIPE_CONFIG");
    cmd->add_option("--parallelism,-j", opts.parallelism, "Worker threads");
}

std::vector<PostRecord> read_records(const std::string& path) {
    auto lines = read_lines(path);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::vector<PostRecord> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(parse_post(lines[i], i + 1));
    return out;
}

void write_records(const std::vector<PostRecord>& records, const std::string& path) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(serialize_post(r));
    write_lines(lines, path);
}

int cmd_crawl(const PipelineConfig& cfg, const std::string& out_path) {
    if (cfg.crawl.base_url.empty()) {
        std::cerr << "crawl: base_url is required (config crawl.base_url)\n";
        return kExitConfigInvalid;
    }
    auto client = make_httplib_client();
    SystemClock clock;
    CrawlResult result = crawl(cfg.crawl, *client, clock);
    write_corpus(result.corpus, out_path);
    std::ofstream log_out(out_path + ".log.json", std::ios::trunc);
    log_out << result.log.to_json().dump(2) << '\n';
    std::cerr << "crawl: fetched " << result.log.fetched << " posts, " << result.log.retries
              << " retries, " << result.log.skipped << " skipped\n";
    return result.partial ? kExitPartialCrawl : kExitOk;
}

int cmd_clean(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_path) {
    std::vector<std::string> blocklist;
    if (cfg.blocklist_path) blocklist = load_blocklist(*cfg.blocklist_path);
    auto records = read_records(in_path);
    RemovalCounts removals;
    std::size_t fields = 0;
    for (auto& r : records)
        r = clean_record(r, cfg.spam, blocklist, cfg.length_limit_tokens, removals, fields);
    write_records(records, out_path);
    std::cerr << "clean: " << fields << " fields, removed spam=" << removals.spam
              << " blocklist=" << removals.blocklist << " too_long=" << removals.too_long << '\n';
    return kExitOk;
}

int cmd_anonymize(const PipelineConfig& cfg, const std::string& in_path,
                  const std::string& out_path) {
    PiiEngine engine(cfg.recognizers);
    auto records = read_records(in_path);
    MaskReport report;
    for (auto& r : records) {
        auto [masked, rep] = engine.anonymize_record(r);
        r = std::move(masked);
        report.merge(rep);
    }
    write_records(records, out_path);
    std::cerr << "anonymize: " << report.total_entities << " entities in "
              << report.fields_with_detection << "/" << report.fields_processed << " fields\n";
    return kExitOk;
}

int cmd_langid(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_path) {
    std::optional<NgramClassifier> loaded;
    if (cfg.langid_model) loaded = NgramClassifier::load(*cfg.langid_model);
    const Classifier& classifier =
        loaded ? static_cast<const Classifier&>(*loaded) : NgramClassifier::builtin();
    auto records = read_records(in_path);
    std::size_t tagged = 0;
    for (auto& r : records) tagged += tag_record(r, classifier);
    write_records(records, out_path);
    std::cerr << "langid: tagged " << tagged << " fields\n";
    return kExitOk;
}

int cmd_analyze(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_path,
                const std::string& plots_dir) {
    Corpus corpus;
    corpus.posts = read_records(in_path);
    CorpusStats stats = corpus_stats(corpus, cfg.analytics.self_domain,
                                     cfg.analytics.rate_threshold_per_hour, cfg.analytics.xmin);
    std::ofstream f(out_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << stats_to_json(stats).dump(2) << '\n';
    if (!plots_dir.empty()) write_plot_csvs(stats, plots_dir);
    return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& manifest_path,
               const std::string& out_path, bool text) {
    Corpus corpus;
    corpus.posts = read_records(in_path);
    RunManifest manifest;
    if (!manifest_path.empty()) {
        std::ifstream f(manifest_path);
        if (!f) throw std::runtime_error("cannot open manifest " + manifest_path);
        manifest = RunManifest::from_json(Json::parse(f));
    }
    Json report = emit_report(corpus, manifest, nullptr);
    if (text) {
        std::string rendered = render_report_text(report);
        if (out_path.empty()) {
            std::cout << rendered;
        } else {
            std::ofstream f(out_path, std::ios::trunc);
            f << rendered;
        }
    } else if (out_path.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        std::ofstream f(out_path, std::ios::trunc);
        f << report.dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moltpipe: corpus collection, sanitization, and analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string in_path, out_path, plots_dir, manifest_path;
    bool report_text = false;

    auto* crawl_cmd = app.add_subcommand("crawl", "Fetch posts from a feed API into JSONL");
    add_common(crawl_cmd, opts);
    crawl_cmd->add_option("--out", out_path, "Output corpus path")->required();

    auto* clean_cmd = app.add_subcommand("clean", "Normalize text and apply removal filters");
    add_common(clean_cmd, opts);
    clean_cmd->add_option("--in", in_path, "Input JSONL")->required();
    clean_cmd->add_option("--out", out_path, "Output JSONL")->required();

    auto* anon_cmd = app.add_subcommand("anonymize", "Mask PII spans with typed placeholders");
    add_common(anon_cmd, opts);
    anon_cmd->add_option("--in", in_path, "Input JSONL")->required();
    anon_cmd->add_option("--out", out_path, "Output JSONL")->required();

    auto* lang_cmd = app.add_subcommand("langid", "Tag records with detected language");
    add_common(lang_cmd, opts);
    lang_cmd->add_option("--in", in_path, "Input JSONL")->required();
    lang_cmd->add_option("--out", out_path, "Output JSONL")->required();

    auto* analyze_cmd = app.add_subcommand("analyze", "Compute corpus statistics");
    add_common(analyze_cmd, opts);
    analyze_cmd->add_option("--in", in_path, "Input JSONL")->required();
    analyze_cmd->add_option("--out", out_path, "Output stats JSON")->required();
    analyze_cmd->add_option("--plots", plots_dir, "Directory for plot CSVs");
    std::string self_domain;
    analyze_cmd->add_option("--self-domain", self_domain, "Domain counted as self-links");

    auto* run_cmd = app.add_subcommand("run", "Run the full pipeline per config");
    add_common(run_cmd, opts);
    run_cmd->add_option("--in", opts.input, "Input JSONL (overrides config)");
    run_cmd->add_option("--out-dir", opts.output, "Output directory (overrides config)");

    auto* report_cmd = app.add_subcommand("report", "Summarize a corpus and run manifest");
    add_common(report_cmd, opts);
    report_cmd->add_option("--in", in_path, "Input JSONL")->required();
    report_cmd->add_option("--manifest", manifest_path, "Run manifest JSON");
    report_cmd->add_option("--out", out_path, "Output path (default stdout)");
    report_cmd->add_flag("--text", report_text, "Render as aligned text instead of JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        moltpipe::PipelineConfig cfg = load_config(opts);
        if (!self_domain.empty()) cfg.analytics.self_domain = self_domain;
        try {
            if (app.got_subcommand(crawl_cmd)) return cmd_crawl(cfg, out_path);
            if (app.got_subcommand(clean_cmd)) return cmd_clean(cfg, in_path, out_path);
            if (app.got_subcommand(anon_cmd)) return cmd_anonymize(cfg, in_path, out_path);
            if (app.got_subcommand(lang_cmd)) return cmd_langid(cfg, in_path, out_path);
            if (app.got_subcommand(analyze_cmd)) return cmd_analyze(cfg, in_path, out_path, plots_dir);
            if (app.got_subcommand(run_cmd)) {
                cfg.validate(true);
                moltpipe::RunResult result = moltpipe::run_pipeline(cfg);
                std::cerr << "run: wrote " << result.final_output_path << '\n';
                return kExitOk;
            }
            if (app.got_subcommand(report_cmd))
                return cmd_report(in_path, manifest_path, out_path, report_text);
        } catch (const moltpipe::CrawlError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitStageFailure;
        } catch (const moltpipe::ParseError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitStageFailure;
        } catch (const std::runtime_error& e) {
            if (dynamic_cast<const moltpipe::ConfigError*>(&e)) throw;
            std::cerr << "error: " << e.what() << '\n';
            return kExitStageFailure;
        }
    } catch (const moltpipe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStageFailure;
    }
    return kExitOk;
}
