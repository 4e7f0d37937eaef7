#include "moltpipe/analytics.hpp"

#include "moltpipe/normalize.hpp"
#include "moltpipe/text.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace moltpipe {

namespace {

double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

bool usable_content(const PostRecord& p) {
    return !p.content.empty() && !is_sentinel(p.content);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tokenization and readability

std::vector<std::string> lexical_tokens(std::string_view text) {
    const CodepointView v = decode_utf8(text);
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : v.points) {
        if (is_word_char(cp) && cp != U'_') {
            append_utf8(current, to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::size_t count_syllables(std::string_view word) {
    // Vowel-group counting with a silent-e rule; minimum of 1.
    auto is_vowel = [](char c) {
        switch (c) {
            case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
            default: return false;
        }
    };
    std::string w = ascii_lower(word);
    std::size_t groups = 0;
    bool in_group = false;
    for (char c : w) {
        if (is_vowel(c)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    if (groups > 1 && w.size() >= 2 && w.back() == 'e' && !is_vowel(w[w.size() - 2])) --groups;
    return std::max<std::size_t>(groups, 1);
}

double flesch_kincaid(std::string_view text) {
    // Sentences split on .!? followed by space or end of text.
    const CodepointView v = decode_utf8(text);
    std::size_t sentences = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const char32_t c = v[i];
        if (c == U'.' || c == U'!' || c == U'?') {
            if (i + 1 == v.size() || is_unicode_space(v[i + 1])) ++sentences;
        }
    }
    const auto tokens = lexical_tokens(text);
    if (tokens.empty()) throw std::invalid_argument("flesch_kincaid: no words");
    if (sentences == 0) sentences = 1;
    std::size_t syllables = 0;
    for (const auto& t : tokens) syllables += count_syllables(t);
    const double words = static_cast<double>(tokens.size());
    return 0.39 * (words / static_cast<double>(sentences)) +
           11.8 * (static_cast<double>(syllables) / words) - 15.59;
}

// ---------------------------------------------------------------------------
// Lexical statistics

LexicalStats lexical_stats(const Corpus& corpus) {
    if (corpus.posts.empty()) throw std::invalid_argument("lexical_stats: empty corpus");
    LexicalStats s;
    std::unordered_map<std::string, std::size_t> type_counts;
    std::vector<double> fk_grades;
    std::vector<double> char_lengths;
    for (const auto& p : corpus.posts) {
        if (!usable_content(p)) continue;
        ++s.posts_considered;
        for (auto& t : lexical_tokens(p.content)) {
            ++s.total_tokens;
            ++type_counts[t];
        }
        char_lengths.push_back(static_cast<double>(codepoint_length(p.content)));
        try {
            fk_grades.push_back(flesch_kincaid(p.content));
        } catch (const std::invalid_argument&) {
            // content with no words contributes no grade
        }
    }
    s.vocabulary_size = type_counts.size();
    std::size_t hapax = 0;
    for (const auto& [type, count] : type_counts)
        if (count == 1) ++hapax;
    s.ttr = s.total_tokens > 0
                ? static_cast<double>(s.vocabulary_size) / static_cast<double>(s.total_tokens)
                : 0.0;
    s.hapax_ratio = s.vocabulary_size > 0
                        ? static_cast<double>(hapax) / static_cast<double>(s.vocabulary_size)
                        : 0.0;
    if (!fk_grades.empty()) {
        double sum = 0;
        for (double g : fk_grades) sum += g;
        s.fk_grade_mean = sum / static_cast<double>(fk_grades.size());
        std::sort(fk_grades.begin(), fk_grades.end());
        s.fk_grade_median = median_of_sorted(fk_grades);
    }
    if (!char_lengths.empty()) {
        double sum = 0;
        for (double l : char_lengths) sum += l;
        s.char_length_mean = sum / static_cast<double>(char_lengths.size());
        std::sort(char_lengths.begin(), char_lengths.end());
        s.char_length_median = median_of_sorted(char_lengths);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Comment trees

TreeStats tree_stats(const Corpus& corpus) {
    TreeStats s;
    std::map<std::size_t, std::pair<std::size_t, double>> length_acc;  // depth -> (count, sum)
    std::vector<double> ttfc_values;
    double ttfc_sum = 0.0;
    for (const auto& p : corpus.posts) {
        for (const auto& [node, depth] : flatten_comments(p)) {
            ++s.depth_histogram[depth];
            ++s.comment_count;
            auto& [count, sum] = length_acc[depth];
            ++count;
            sum += static_cast<double>(codepoint_length(node->content));
        }
        bool anomaly = false;
        if (auto ttfc = time_to_first_comment(p, &anomaly)) {
            ttfc_values.push_back(*ttfc);
            ttfc_sum += *ttfc;
        }
        if (anomaly) ++s.ttfc_anomalies;
    }
    if (!s.depth_histogram.empty()) s.max_depth = s.depth_histogram.rbegin()->first;
    for (const auto& [depth, acc] : length_acc)
        s.mean_length_by_depth[depth] = acc.second / static_cast<double>(acc.first);
    if (!ttfc_values.empty()) {
        s.ttfc_mean_s = ttfc_sum / static_cast<double>(ttfc_values.size());
        std::sort(ttfc_values.begin(), ttfc_values.end());
        s.ttfc_median_s = median_of_sorted(ttfc_values);
    }
    return s;
}

std::optional<double> time_to_first_comment(const PostRecord& post, bool* anomaly) {
    if (anomaly) *anomaly = false;
    std::optional<std::int64_t> earliest;
    for (const auto& [node, depth] : flatten_comments(post)) {
        if (!earliest || node->created_at_epoch < *earliest) earliest = node->created_at_epoch;
    }
    if (!earliest) return std::nullopt;
    std::int64_t delta = *earliest - post.created_at_epoch;
    if (delta < 0) {
        delta = 0;
        if (anomaly) *anomaly = true;
    }
    return static_cast<double>(delta);
}

// ---------------------------------------------------------------------------
// Power-law fitting

PowerLawFit fit_power_law(const std::vector<std::uint64_t>& counts, std::uint64_t xmin) {
    PowerLawFit fit;
    fit.xmin = xmin;
    double log_sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t x : counts) {
        if (x < xmin) continue;
        ++n;
        log_sum += std::log(static_cast<double>(x) / (static_cast<double>(xmin) - 0.5));
    }
    if (n < 50) throw std::invalid_argument("fit_power_law: too few observations (" +
                                            std::to_string(n) + " >= xmin)");
    fit.n_tail = n;
    // A tail sitting entirely at xmin drives the true MLE toward infinity;
    // flag the fit as degenerate rather than reporting a number to trust.
    bool all_equal_xmin = true;
    for (std::uint64_t x : counts) {
        if (x >= xmin && x != xmin) { all_equal_xmin = false; break; }
    }
    fit.degenerate = all_equal_xmin;
    fit.alpha = log_sum > 0.0 ? 1.0 + static_cast<double>(n) / log_sum
                              : std::numeric_limits<double>::infinity();
    return fit;
}

// ---------------------------------------------------------------------------
// Authors

AuthorStats author_stats(const Corpus& corpus, double rate_threshold_per_hour) {
    AuthorStats s;
    struct Acc {
        std::size_t count = 0;
        std::int64_t first = 0, last = 0;
    };
    std::unordered_map<std::string, Acc> by_author;
    for (const auto& p : corpus.posts) {
        Acc& a = by_author[p.author_id];
        if (a.count == 0) {
            a.first = a.last = p.created_at_epoch;
        } else {
            a.first = std::min(a.first, p.created_at_epoch);
            a.last = std::max(a.last, p.created_at_epoch);
        }
        ++a.count;
    }
    s.unique_authors = by_author.size();
    std::vector<std::uint64_t> counts;
    for (const auto& [author, acc] : by_author) {
        s.rank_frequency.emplace_back(author, acc.count);
        counts.push_back(acc.count);
        // Active span clamped to at least one hour.
        const double span_hours =
            std::max(1.0, static_cast<double>(acc.last - acc.first) / 3600.0);
        if (static_cast<double>(acc.count) / span_hours > rate_threshold_per_hour)
            ++s.authors_over_rate;
    }
    std::sort(s.rank_frequency.begin(), s.rank_frequency.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    try {
        s.fit = fit_power_law(counts);
    } catch (const std::invalid_argument&) {
        s.fit = std::nullopt;
    }
    return s;
}

// ---------------------------------------------------------------------------
// URLs

namespace {

bool is_scheme_at(const std::u32string& lower, std::size_t i, std::size_t& after_scheme) {
    static const std::u32string http = U"http://";
    static const std::u32string https = U"https://";
    for (const auto& scheme : {https, http}) {
        if (i + scheme.size() <= lower.size() &&
            lower.compare(i, scheme.size(), scheme) == 0) {
            after_scheme = i + scheme.size();
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> extract_url_domains(std::string_view text) {
    const CodepointView v = decode_utf8(text);
    std::u32string lower;
    lower.reserve(v.size());
    for (char32_t cp : v.points) lower.push_back(to_lower(cp));
    std::vector<std::string> domains;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        std::size_t host_start;
        if (!is_scheme_at(lower, i, host_start)) continue;
        std::size_t j = host_start;
        while (j < lower.size() && lower[j] != U'/' && lower[j] != U'?' && lower[j] != U'#' &&
               !is_unicode_space(lower[j]) && lower[j] != U'"' && lower[j] != U'<' &&
               lower[j] != U'>' && lower[j] != U')')
            ++j;
        std::u32string host = lower.substr(host_start, j - host_start);
        // strip userinfo and port
        if (auto at = host.rfind(U'@'); at != std::u32string::npos) host = host.substr(at + 1);
        if (auto colon = host.find(U':'); colon != std::u32string::npos) host = host.substr(0, colon);
        while (!host.empty() && (host.back() == U'.' || host.back() == U','))
            host.pop_back();
        if (!host.empty()) domains.push_back(encode_utf8(host));
        i = j;
    }
    return domains;
}

UrlStats url_stats(const Corpus& corpus, const std::string& self_domain) {
    UrlStats s;
    s.self_domain = ascii_lower(self_domain);
    for (const auto& p : corpus.posts) {
        std::vector<std::string> domains;
        if (usable_content(p)) domains = extract_url_domains(p.content);
        if (p.url && !p.url->empty()) {
            auto extra = extract_url_domains(*p.url);
            domains.insert(domains.end(), extra.begin(), extra.end());
        }
        if (!domains.empty()) ++s.posts_with_url;
        for (auto& d : domains) {
            ++s.domain_counts[d];
            if (d == s.self_domain) ++s.self_link_count;
        }
    }
    s.posts_with_url_fraction =
        corpus.posts.empty()
            ? 0.0
            : static_cast<double>(s.posts_with_url) / static_cast<double>(corpus.posts.size());
    return s;
}

// ---------------------------------------------------------------------------
// Communities

CommunityStats community_stats(const Corpus& corpus) {
    CommunityStats s;
    struct Acc {
        std::size_t posts = 0;
        std::size_t comments = 0;
        double length_sum = 0.0;
    };
    std::map<std::string, Acc> by_submolt;
    for (const auto& p : corpus.posts) {
        Acc& a = by_submolt[p.submolt_name];
        ++a.posts;
        a.comments += count_comments(p);
        a.length_sum += static_cast<double>(codepoint_length(p.content));
    }
    std::vector<double> cpp_values;
    for (const auto& [name, acc] : by_submolt) {
        CommunityRow row;
        row.submolt_name = name;
        row.post_count = acc.posts;
        row.comments_per_post =
            static_cast<double>(acc.comments) / static_cast<double>(acc.posts);
        row.mean_post_length = acc.length_sum / static_cast<double>(acc.posts);
        cpp_values.push_back(row.comments_per_post);
        s.rows.push_back(std::move(row));
    }
    std::sort(s.rows.begin(), s.rows.end(), [](const CommunityRow& a, const CommunityRow& b) {
        if (a.post_count != b.post_count) return a.post_count > b.post_count;
        return a.submolt_name < b.submolt_name;
    });
    std::sort(cpp_values.begin(), cpp_values.end());
    s.median_comments_per_post = median_of_sorted(cpp_values);
    return s;
}

// ---------------------------------------------------------------------------
// Aggregate + output

CorpusStats corpus_stats(const Corpus& corpus, const std::string& self_domain,
                         double rate_threshold_per_hour, std::uint64_t xmin) {
    CorpusStats s;
    if (!corpus.posts.empty()) s.lexical = lexical_stats(corpus);
    s.tree = tree_stats(corpus);
    s.authors = author_stats(corpus, rate_threshold_per_hour);
    if (s.authors.fit && xmin != 1) {
        std::vector<std::uint64_t> counts;
        for (const auto& [a, c] : s.authors.rank_frequency) counts.push_back(c);
        try {
            s.authors.fit = fit_power_law(counts, xmin);
        } catch (const std::invalid_argument&) {
            s.authors.fit = std::nullopt;
        }
    }
    s.urls = url_stats(corpus, self_domain);
    s.communities = community_stats(corpus);
    return s;
}

Json stats_to_json(const CorpusStats& s) {
    Json j = Json::object();
    j["lexical"] = {{"total_tokens", s.lexical.total_tokens},
                    {"vocabulary_size", s.lexical.vocabulary_size},
                    {"ttr", s.lexical.ttr},
                    {"hapax_ratio", s.lexical.hapax_ratio},
                    {"fk_grade_median", s.lexical.fk_grade_median},
                    {"fk_grade_mean", s.lexical.fk_grade_mean},
                    {"char_length_mean", s.lexical.char_length_mean},
                    {"char_length_median", s.lexical.char_length_median},
                    {"posts_considered", s.lexical.posts_considered}};
    Json depth_hist = Json::object();
    for (const auto& [d, c] : s.tree.depth_histogram) depth_hist[std::to_string(d)] = c;
    Json length_by_depth = Json::object();
    for (const auto& [d, l] : s.tree.mean_length_by_depth) length_by_depth[std::to_string(d)] = l;
    j["tree"] = {{"depth_histogram", depth_hist},
                 {"max_depth", s.tree.max_depth},
                 {"mean_length_by_depth", length_by_depth},
                 {"comment_count", s.tree.comment_count},
                 {"ttfc_median_s", s.tree.ttfc_median_s ? Json(*s.tree.ttfc_median_s) : Json(nullptr)},
                 {"ttfc_mean_s", s.tree.ttfc_mean_s ? Json(*s.tree.ttfc_mean_s) : Json(nullptr)},
                 {"ttfc_anomalies", s.tree.ttfc_anomalies}};
    Json authors = Json::object();
    authors["unique_authors"] = s.authors.unique_authors;
    authors["authors_over_rate"] = s.authors.authors_over_rate;
    if (s.authors.fit) {
        authors["power_law"] = {{"alpha", s.authors.fit->alpha},
                                {"xmin", s.authors.fit->xmin},
                                {"n_tail", s.authors.fit->n_tail},
                                {"degenerate", s.authors.fit->degenerate}};
    } else {
        authors["power_law"] = nullptr;
    }
    Json top = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(s.authors.rank_frequency.size(), 20); ++i) {
        top.push_back({{"author_id", s.authors.rank_frequency[i].first},
                       {"posts", s.authors.rank_frequency[i].second}});
    }
    authors["top_authors"] = top;
    j["authors"] = authors;
    Json domains = Json::object();
    for (const auto& [d, c] : s.urls.domain_counts) domains[d] = c;
    j["urls"] = {{"posts_with_url_fraction", s.urls.posts_with_url_fraction},
                 {"posts_with_url", s.urls.posts_with_url},
                 {"self_domain", s.urls.self_domain},
                 {"self_link_count", s.urls.self_link_count},
                 {"domain_counts", domains}};
    Json communities = Json::array();
    for (const auto& row : s.communities.rows) {
        communities.push_back({{"submolt_name", row.submolt_name},
                               {"post_count", row.post_count},
                               {"comments_per_post", row.comments_per_post},
                               {"mean_post_length", row.mean_post_length}});
    }
    j["communities"] = {{"rows", communities},
                        {"median_comments_per_post", s.communities.median_comments_per_post}};
    return j;
}

void write_plot_csvs(const CorpusStats& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/depth_histogram.csv", std::ios::trunc);
        f << "depth,count\n";
        for (const auto& [d, c] : s.tree.depth_histogram) f << d << ',' << c << '\n';
    }
    {
        std::ofstream f(dir + "/rank_frequency.csv", std::ios::trunc);
        f << "rank,author_id,posts\n";
        std::size_t rank = 1;
        for (const auto& [author, count] : s.authors.rank_frequency)
            f << rank++ << ',' << author << ',' << count << '\n';
    }
    {
        std::ofstream f(dir + "/domain_counts.csv", std::ios::trunc);
        f << "domain,count\n";
        std::vector<std::pair<std::string, std::size_t>> rows(s.urls.domain_counts.begin(),
                                                              s.urls.domain_counts.end());
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [d, c] : rows) f << d << ',' << c << '\n';
    }
}

}  // namespace moltpipe
