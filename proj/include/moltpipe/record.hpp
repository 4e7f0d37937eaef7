#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace moltpipe {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    enum class Kind { MalformedSyntax, SchemaViolation };
    Kind kind;
    std::size_t line_number;  // 1-based; 0 when unknown
    std::string field_path;

    ParseError(Kind k, std::size_t line, std::string path, const std::string& msg);
};

struct CommentNode {
    std::string id;
    std::string content;
    std::optional<std::string> parent_id;  // absent for top-level
    std::int64_t upvotes = 0;
    std::int64_t downvotes = 0;
    std::string created_at;
    std::int64_t created_at_epoch = 0;  // seconds, UTC
    std::string author_id;
    std::string author_name;
    std::optional<std::string> lang;
    std::optional<double> lang_score;
    std::vector<CommentNode> replies;
    Json extras = Json::object();

    bool operator==(const CommentNode&) const = default;
};

struct PostRecord {
    std::string post_id;
    std::string title;
    std::string content;
    std::optional<std::string> url;
    std::int64_t upvotes = 0;
    std::int64_t downvotes = 0;
    std::int64_t comment_count = 0;  // platform counter; not trusted by analytics
    std::string created_at;
    std::int64_t created_at_epoch = 0;
    std::string submolt_id;
    std::string submolt_name;
    std::string author_id;
    std::string author_name;
    std::optional<std::string> lang;
    std::optional<double> lang_score;
    std::vector<CommentNode> comments;
    Json extras = Json::object();

    bool operator==(const PostRecord&) const = default;
};

struct CorpusMeta {
    std::optional<std::string> window_start;
    std::optional<std::string> window_end;
    std::vector<std::string> feeds;
};

struct Corpus {
    std::vector<PostRecord> posts;
    CorpusMeta meta;
};

// ISO-8601 → seconds since epoch, UTC. Missing timezone is treated as UTC.
// Throws ParseError(SchemaViolation) on unparseable input.
std::int64_t parse_iso8601(const std::string& ts, const std::string& field_path = "created_at",
                           std::size_t line = 0);
std::string format_iso8601(std::int64_t epoch_seconds);

// One record per line. `comments` may be a nested array or a JSON-encoded
// string holding one; output always uses the nested-array form.
PostRecord parse_post(std::string_view line, std::size_t line_number = 0);
PostRecord post_from_json(const Json& j, std::size_t line_number = 0);
std::string serialize_post(const PostRecord& record);
Json post_to_json(const PostRecord& record);

// Pre-order traversal; top-level comments are depth 0.
std::vector<std::pair<const CommentNode*, std::size_t>> flatten_comments(const PostRecord& record);
std::size_t count_comments(const PostRecord& record);

// Line-delimited files, UTF-8; gzip input is detected by magic bytes.
Corpus read_corpus(const std::string& path);
void write_corpus(const Corpus& corpus, const std::string& path);

// Streaming per-line access for pipeline stages.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::vector<std::string>& lines, const std::string& path);

}  // namespace moltpipe
