#include "moltpipe/record.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <zlib.h>

namespace moltpipe {

namespace {

std::string make_message(ParseError::Kind kind, std::size_t line, const std::string& path,
                         const std::string& msg) {
    std::string out = kind == ParseError::Kind::MalformedSyntax ? "malformed-syntax" : "schema-violation";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!path.empty()) out += " [" + path + "]";
    out += ": " + msg;
    return out;
}

}  // namespace

ParseError::ParseError(Kind k, std::size_t line, std::string path, const std::string& msg)
    : std::runtime_error(make_message(k, line, path, msg)),
      kind(k),
      line_number(line),
      field_path(std::move(path)) {}

// ---------------------------------------------------------------------------
// Timestamps

namespace {

// Days since 1970-01-01 from a civil date (Gregorian, proleptic).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool read_digits(const std::string& s, std::size_t& i, unsigned count, std::int64_t& out) {
    out = 0;
    for (unsigned k = 0; k < count; ++k) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + (s[i] - '0');
        ++i;
    }
    return true;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& ts, const std::string& field_path, std::size_t line) {
    auto fail = [&](const std::string& why) -> std::int64_t {
        throw ParseError(ParseError::Kind::SchemaViolation, line, field_path,
                         "bad ISO-8601 timestamp \"" + ts + "\": " + why);
    };
    std::size_t i = 0;
    std::int64_t year, month, day;
    if (!read_digits(ts, i, 4, year)) return fail("year");
    if (i >= ts.size() || ts[i] != '-') return fail("expected '-'");
    ++i;
    if (!read_digits(ts, i, 2, month) || month < 1 || month > 12) return fail("month");
    if (i >= ts.size() || ts[i] != '-') return fail("expected '-'");
    ++i;
    if (!read_digits(ts, i, 2, day) || day < 1 || day > 31) return fail("day");

    std::int64_t hour = 0, minute = 0, second = 0;
    std::int64_t tz_offset = 0;
    if (i < ts.size()) {
        if (ts[i] != 'T' && ts[i] != 't' && ts[i] != ' ') return fail("expected 'T'");
        ++i;
        if (!read_digits(ts, i, 2, hour) || hour > 23) return fail("hour");
        if (i >= ts.size() || ts[i] != ':') return fail("expected ':'");
        ++i;
        if (!read_digits(ts, i, 2, minute) || minute > 59) return fail("minute");
        if (i < ts.size() && ts[i] == ':') {
            ++i;
            if (!read_digits(ts, i, 2, second) || second > 60) return fail("second");
            if (second == 60) second = 59;  // leap second, folded
        }
        if (i < ts.size() && ts[i] == '.') {
            ++i;
            while (i < ts.size() && ts[i] >= '0' && ts[i] <= '9') ++i;  // fraction dropped
        }
        if (i < ts.size()) {
            const char c = ts[i];
            if (c == 'Z' || c == 'z') {
                ++i;
            } else if (c == '+' || c == '-') {
                const int sign = c == '+' ? 1 : -1;
                ++i;
                std::int64_t oh, om = 0;
                if (!read_digits(ts, i, 2, oh)) return fail("tz hour");
                if (i < ts.size() && ts[i] == ':') ++i;
                if (i < ts.size() && ts[i] >= '0' && ts[i] <= '9') {
                    if (!read_digits(ts, i, 2, om)) return fail("tz minute");
                }
                tz_offset = sign * (oh * 3600 + om * 60);
            }
        }
    }
    if (i != ts.size()) return fail("trailing characters");
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - tz_offset;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) { rem += 86400; --days; }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const std::unordered_set<std::string>& known_post_fields() {
    static const std::unordered_set<std::string> f = {
        "post_id", "title", "content", "url", "upvotes", "downvotes", "comment_count",
        "created_at", "submolt_id", "submolt_name", "author_id", "author_name",
        "lang", "lang_score", "comments"};
    return f;
}

const std::unordered_set<std::string>& known_comment_fields() {
    static const std::unordered_set<std::string> f = {
        "id", "content", "parent_id", "upvotes", "downvotes", "created_at",
        "author_id", "author_name", "lang", "lang_score", "replies"};
    return f;
}

std::string require_string(const Json& j, const char* key, const std::string& path,
                           std::size_t line) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + key, "missing required field");
    if (!it->is_string())
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + key, "expected string");
    return it->get<std::string>();
}

std::int64_t require_count(const Json& j, const char* key, const std::string& path,
                           std::size_t line) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + key, "missing required field");
    if (!it->is_number_integer())
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + key, "expected integer");
    const std::int64_t v = it->get<std::int64_t>();
    if (v < 0)
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + key, "expected non-negative integer");
    return v;
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

CommentNode comment_from_json(const Json& j, const std::optional<std::string>& container_id,
                              const std::string& path, std::size_t line) {
    if (!j.is_object())
        throw ParseError(ParseError::Kind::SchemaViolation, line, path, "comment must be an object");
    CommentNode c;
    c.id = require_string(j, "id", path, line);
    c.content = require_string(j, "content", path, line);
    c.parent_id = optional_string(j, "parent_id");
    c.upvotes = require_count(j, "upvotes", path, line);
    c.downvotes = require_count(j, "downvotes", path, line);
    c.created_at = require_string(j, "created_at", path, line);
    c.created_at_epoch = parse_iso8601(c.created_at, path + "created_at", line);
    c.author_id = require_string(j, "author_id", path, line);
    c.author_name = require_string(j, "author_name", path, line);
    c.lang = optional_string(j, "lang");
    if (auto it = j.find("lang_score"); it != j.end() && it->is_number())
        c.lang_score = it->get<double>();

    if (c.parent_id && container_id && *c.parent_id != *container_id)
        throw ParseError(ParseError::Kind::SchemaViolation, line, path + "parent_id",
                         "comment \"" + c.id + "\" has parent_id \"" + *c.parent_id +
                             "\" but is nested under \"" + *container_id + "\"");

    if (auto it = j.find("replies"); it != j.end() && !it->is_null()) {
        if (!it->is_array())
            throw ParseError(ParseError::Kind::SchemaViolation, line, path + "replies", "expected array");
        std::size_t k = 0;
        for (const auto& rj : *it) {
            c.replies.push_back(comment_from_json(
                rj, c.id, path + "replies[" + std::to_string(k) + "].", line));
            ++k;
        }
    }
    for (const auto& [key, value] : j.items()) {
        if (!known_comment_fields().count(key)) c.extras[key] = value;
    }
    return c;
}

Json comment_to_json(const CommentNode& c) {
    Json j = Json::object();
    j["id"] = c.id;
    j["content"] = c.content;
    j["parent_id"] = c.parent_id ? Json(*c.parent_id) : Json(nullptr);
    j["upvotes"] = c.upvotes;
    j["downvotes"] = c.downvotes;
    j["created_at"] = c.created_at;
    j["author_id"] = c.author_id;
    j["author_name"] = c.author_name;
    if (c.lang) j["lang"] = *c.lang;
    if (c.lang_score) j["lang_score"] = *c.lang_score;
    j["replies"] = Json::array();
    for (const auto& r : c.replies) j["replies"].push_back(comment_to_json(r));
    for (const auto& [key, value] : c.extras.items()) j[key] = value;
    return j;
}

}  // namespace

PostRecord post_from_json(const Json& j, std::size_t line) {
    if (!j.is_object())
        throw ParseError(ParseError::Kind::SchemaViolation, line, "", "record must be an object");
    PostRecord p;
    p.post_id = require_string(j, "post_id", "", line);
    if (p.post_id.empty())
        throw ParseError(ParseError::Kind::SchemaViolation, line, "post_id", "must be non-empty");
    p.title = require_string(j, "title", "", line);
    p.content = require_string(j, "content", "", line);
    p.url = optional_string(j, "url");
    p.upvotes = require_count(j, "upvotes", "", line);
    p.downvotes = require_count(j, "downvotes", "", line);
    p.comment_count = require_count(j, "comment_count", "", line);
    p.created_at = require_string(j, "created_at", "", line);
    p.created_at_epoch = parse_iso8601(p.created_at, "created_at", line);
    p.submolt_id = require_string(j, "submolt_id", "", line);
    p.submolt_name = require_string(j, "submolt_name", "", line);
    p.author_id = require_string(j, "author_id", "", line);
    p.author_name = require_string(j, "author_name", "", line);
    p.lang = optional_string(j, "lang");
    if (auto it = j.find("lang_score"); it != j.end() && it->is_number())
        p.lang_score = it->get<double>();

    auto it = j.find("comments");
    if (it == j.end())
        throw ParseError(ParseError::Kind::SchemaViolation, line, "comments", "missing required field");
    Json comments_array;
    if (it->is_array()) {
        comments_array = *it;
    } else if (it->is_string()) {
        // Release files carry the tree as a JSON-encoded string; accept both.
        comments_array = Json::parse(it->get<std::string>(), nullptr, false);
        if (comments_array.is_discarded() || !comments_array.is_array())
            throw ParseError(ParseError::Kind::SchemaViolation, line, "comments",
                             "string form does not contain a JSON array");
    } else if (it->is_null()) {
        comments_array = Json::array();
    } else {
        throw ParseError(ParseError::Kind::SchemaViolation, line, "comments",
                         "expected array or JSON-encoded string");
    }
    std::size_t k = 0;
    for (const auto& cj : comments_array) {
        p.comments.push_back(comment_from_json(
            cj, std::nullopt, "comments[" + std::to_string(k) + "].", line));
        ++k;
    }
    for (const auto& [key, value] : j.items()) {
        if (!known_post_fields().count(key)) p.extras[key] = value;
    }
    return p;
}

PostRecord parse_post(std::string_view line, std::size_t line_number) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
        throw ParseError(ParseError::Kind::MalformedSyntax, line_number, "", "unparseable JSON line");
    return post_from_json(j, line_number);
}

Json post_to_json(const PostRecord& p) {
    Json j = Json::object();
    j["post_id"] = p.post_id;
    j["title"] = p.title;
    j["content"] = p.content;
    if (p.url) j["url"] = *p.url;
    j["upvotes"] = p.upvotes;
    j["downvotes"] = p.downvotes;
    j["comment_count"] = p.comment_count;
    j["created_at"] = p.created_at;
    j["submolt_id"] = p.submolt_id;
    j["submolt_name"] = p.submolt_name;
    j["author_id"] = p.author_id;
    j["author_name"] = p.author_name;
    if (p.lang) j["lang"] = *p.lang;
    if (p.lang_score) j["lang_score"] = *p.lang_score;
    j["comments"] = Json::array();
    for (const auto& c : p.comments) j["comments"].push_back(comment_to_json(c));
    for (const auto& [key, value] : p.extras.items()) j[key] = value;
    return j;
}

std::string serialize_post(const PostRecord& record) {
    return post_to_json(record).dump();
}

std::vector<std::pair<const CommentNode*, std::size_t>> flatten_comments(const PostRecord& record) {
    std::vector<std::pair<const CommentNode*, std::size_t>> out;
    // Explicit stack; nesting depth is input-bounded.
    std::vector<std::pair<const CommentNode*, std::size_t>> stack;
    for (auto it = record.comments.rbegin(); it != record.comments.rend(); ++it)
        stack.emplace_back(&*it, 0);
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        out.emplace_back(node, depth);
        for (auto it = node->replies.rbegin(); it != node->replies.rend(); ++it)
            stack.emplace_back(&*it, depth + 1);
    }
    return out;
}

std::size_t count_comments(const PostRecord& record) {
    return flatten_comments(record).size();
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

bool is_gzip_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    char magic[2] = {0, 0};
    f.read(magic, 2);
    return f.gcount() == 2 && static_cast<unsigned char>(magic[0]) == 0x1F &&
           static_cast<unsigned char>(magic[1]) == 0x8B;
}

std::vector<std::string> read_gzip_lines(const std::string& path) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string current;
    char buf[1 << 16];
    int n;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) {
        for (int i = 0; i < n; ++i) {
            if (buf[i] == '\n') {
                lines.push_back(std::move(current));
                current.clear();
            } else {
                current.push_back(buf[i]);
            }
        }
    }
    gzclose(gz);
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
}

}  // namespace

std::vector<std::string> read_lines(const std::string& path) {
    if (is_gzip_file(path)) return read_gzip_lines(path);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_lines(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& l : lines) {
        f << l << '\n';
    }
}

Corpus read_corpus(const std::string& path) {
    Corpus corpus;
    std::size_t line_no = 0;
    std::unordered_set<std::string> seen_ids;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        PostRecord p = parse_post(line, line_no);
        if (!seen_ids.insert(p.post_id).second)
            throw ParseError(ParseError::Kind::SchemaViolation, line_no, "post_id",
                             "duplicate post_id \"" + p.post_id + "\"");
        corpus.posts.push_back(std::move(p));
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::vector<std::string> lines;
    lines.reserve(corpus.posts.size());
    for (const auto& p : corpus.posts) lines.push_back(serialize_post(p));
    write_lines(lines, path);
}

}  // namespace moltpipe
