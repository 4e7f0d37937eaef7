#pragma once

#include "moltpipe/record.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace moltpipe {

struct LexicalStats {
    std::size_t total_tokens = 0;
    std::size_t vocabulary_size = 0;
    double ttr = 0.0;
    double hapax_ratio = 0.0;
    double fk_grade_median = 0.0;
    double fk_grade_mean = 0.0;
    double char_length_mean = 0.0;
    double char_length_median = 0.0;
    std::size_t posts_considered = 0;
};

struct TreeStats {
    std::map<std::size_t, std::size_t> depth_histogram;
    std::size_t max_depth = 0;
    std::map<std::size_t, double> mean_length_by_depth;  // characters (code points)
    std::size_t comment_count = 0;
    std::optional<double> ttfc_median_s;
    std::optional<double> ttfc_mean_s;
    std::size_t ttfc_anomalies = 0;  // comment timestamps before the post, clamped to 0
};

struct PowerLawFit {
    double alpha = 0.0;
    std::uint64_t xmin = 1;
    std::size_t n_tail = 0;
    bool degenerate = false;  // all observations equal xmin
};

struct AuthorStats {
    std::vector<std::pair<std::string, std::size_t>> rank_frequency;  // sorted descending
    std::optional<PowerLawFit> fit;  // absent when too few observations
    std::size_t authors_over_rate = 0;
    std::size_t unique_authors = 0;
};

struct UrlStats {
    double posts_with_url_fraction = 0.0;
    std::map<std::string, std::size_t> domain_counts;
    std::string self_domain;
    std::size_t self_link_count = 0;
    std::size_t posts_with_url = 0;
};

struct CommunityRow {
    std::string submolt_name;
    std::size_t post_count = 0;
    double comments_per_post = 0.0;
    double mean_post_length = 0.0;
};

struct CommunityStats {
    std::vector<CommunityRow> rows;  // sorted by post_count descending, name tiebreak
    double median_comments_per_post = 0.0;
};

struct CorpusStats {
    LexicalStats lexical;
    TreeStats tree;
    AuthorStats authors;
    UrlStats urls;
    CommunityStats communities;
};

// Lowercased Unicode-word tokens, punctuation dropped.
std::vector<std::string> lexical_tokens(std::string_view text);

// 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
// Throws std::invalid_argument when the text has no words.
double flesch_kincaid(std::string_view text);
std::size_t count_syllables(std::string_view word);

LexicalStats lexical_stats(const Corpus& corpus);
TreeStats tree_stats(const Corpus& corpus);

// Seconds from post creation to the earliest comment at any depth.
// Negative deltas clamp to 0; `anomaly` reports whether that happened.
std::optional<double> time_to_first_comment(const PostRecord& post, bool* anomaly = nullptr);

// Discrete MLE, alpha = 1 + n / sum ln(x_i / (xmin - 0.5)) over x_i >= xmin.
// Throws std::invalid_argument with fewer than 50 tail observations.
PowerLawFit fit_power_law(const std::vector<std::uint64_t>& counts, std::uint64_t xmin = 1);

AuthorStats author_stats(const Corpus& corpus, double rate_threshold_per_hour = 10.0);
UrlStats url_stats(const Corpus& corpus, const std::string& self_domain);
CommunityStats community_stats(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus, const std::string& self_domain,
                         double rate_threshold_per_hour = 10.0, std::uint64_t xmin = 1);

Json stats_to_json(const CorpusStats& stats);
void write_plot_csvs(const CorpusStats& stats, const std::string& dir);

// Extracts http(s) URLs and returns their normalized domains (lowercased,
// port and userinfo stripped), with multiplicity.
std::vector<std::string> extract_url_domains(std::string_view text);

}  // namespace moltpipe
