#include "moltpipe/normalize.hpp"

#include "moltpipe/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

namespace moltpipe {

std::string_view sentinel_for(FieldOutcome outcome) {
    switch (outcome) {
        case FieldOutcome::RemovedSpam: return kSentinelSpam;
        case FieldOutcome::RemovedBlocklist: return kSentinelBlocklist;
        case FieldOutcome::RemovedTooLong: return kSentinelTooLong;
        case FieldOutcome::Clean: break;
    }
    return {};
}

bool is_sentinel(std::string_view text) {
    return text == kSentinelSpam || text == kSentinelBlocklist || text == kSentinelTooLong;
}

// ---------------------------------------------------------------------------
// Entity decoding

namespace {

// Common named character references. Unknown names pass through verbatim.
const std::unordered_map<std::string, char32_t>& named_entities() {
    static const std::unordered_map<std::string, char32_t> m = {
        {"amp", U'&'},       {"lt", U'<'},        {"gt", U'>'},
        {"quot", U'"'},      {"apos", U'\''},     {"nbsp", 0xA0},
        {"copy", 0xA9},      {"reg", 0xAE},       {"trade", 0x2122},
        {"hellip", 0x2026},  {"mdash", 0x2014},   {"ndash", 0x2013},
        {"ldquo", 0x201C},   {"rdquo", 0x201D},   {"lsquo", 0x2018},
        {"rsquo", 0x2019},   {"laquo", 0xAB},     {"raquo", 0xBB},
        {"deg", 0xB0},       {"plusmn", 0xB1},    {"times", 0xD7},
        {"divide", 0xF7},    {"frac12", 0xBD},    {"frac14", 0xBC},
        {"frac34", 0xBE},    {"sup2", 0xB2},      {"sup3", 0xB3},
        {"micro", 0xB5},     {"para", 0xB6},      {"sect", 0xA7},
        {"middot", 0xB7},    {"bull", 0x2022},    {"dagger", 0x2020},
        {"euro", 0x20AC},    {"pound", 0xA3},     {"yen", 0xA5},
        {"cent", 0xA2},      {"curren", 0xA4},    {"szlig", 0xDF},
        {"agrave", 0xE0},    {"aacute", 0xE1},    {"acirc", 0xE2},
        {"atilde", 0xE3},    {"auml", 0xE4},      {"aring", 0xE5},
        {"aelig", 0xE6},     {"ccedil", 0xE7},    {"egrave", 0xE8},
        {"eacute", 0xE9},    {"ecirc", 0xEA},     {"euml", 0xEB},
        {"igrave", 0xEC},    {"iacute", 0xED},    {"icirc", 0xEE},
        {"iuml", 0xEF},      {"ntilde", 0xF1},    {"ograve", 0xF2},
        {"oacute", 0xF3},    {"ocirc", 0xF4},     {"otilde", 0xF5},
        {"ouml", 0xF6},      {"oslash", 0xF8},    {"ugrave", 0xF9},
        {"uacute", 0xFA},    {"ucirc", 0xFB},     {"uuml", 0xFC},
        {"yacute", 0xFD},    {"yuml", 0xFF},      {"iexcl", 0xA1},
        {"iquest", 0xBF},    {"oelig", 0x153},    {"prime", 0x2032},
        {"Prime", 0x2033},   {"larr", 0x2190},    {"rarr", 0x2192},
        {"uarr", 0x2191},    {"darr", 0x2193},    {"harr", 0x2194},
        {"infin", 0x221E},   {"ne", 0x2260},      {"le", 0x2264},
        {"ge", 0x2265},      {"minus", 0x2212},   {"shy", 0xAD},
        {"ensp", 0x2002},    {"emsp", 0x2003},    {"thinsp", 0x2009},
    };
    return m;
}

// Tries to decode one character reference starting at points[i] (which is
// '&'). On success writes the code point and the index one past ';'.
bool decode_entity(const std::u32string& points, std::size_t i, char32_t& out,
                   std::size_t& next) {
    const std::size_t n = points.size();
    std::size_t j = i + 1;
    if (j >= n) return false;
    if (points[j] == U'#') {
        ++j;
        bool hex = false;
        if (j < n && (points[j] == U'x' || points[j] == U'X')) { hex = true; ++j; }
        char32_t cp = 0;
        std::size_t digits = 0;
        while (j < n && digits < 8) {
            const char32_t c = points[j];
            int v;
            if (c >= U'0' && c <= U'9') v = static_cast<int>(c - U'0');
            else if (hex && c >= U'a' && c <= U'f') v = static_cast<int>(c - U'a') + 10;
            else if (hex && c >= U'A' && c <= U'F') v = static_cast<int>(c - U'A') + 10;
            else break;
            cp = cp * (hex ? 16 : 10) + v;
            ++j;
            ++digits;
        }
        if (digits == 0 || j >= n || points[j] != U';') return false;
        if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
        out = cp;
        next = j + 1;
        return true;
    }
    std::string name;
    while (j < n && name.size() < 12 && is_ascii_alnum(points[j])) {
        name.push_back(static_cast<char>(points[j]));
        ++j;
    }
    if (name.empty() || j >= n || points[j] != U';') return false;
    auto it = named_entities().find(name);
    if (it == named_entities().end()) {
        // Case-insensitive fallback for the handful that matter.
        it = named_entities().find(ascii_lower(name));
        if (it == named_entities().end()) return false;
    }
    out = it->second;
    next = j + 1;
    return true;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    const CodepointView view = decode_utf8(raw);
    std::u32string decoded;
    decoded.reserve(view.size());
    for (std::size_t i = 0; i < view.size();) {
        if (view[i] == U'&') {
            char32_t cp;
            std::size_t next;
            if (decode_entity(view.points, i, cp, next)) {
                decoded.push_back(cp);
                i = next;
                continue;
            }
        }
        decoded.push_back(view[i]);
        ++i;
    }
    std::u32string collapsed;
    collapsed.reserve(decoded.size());
    bool pending_space = false;
    for (char32_t cp : decoded) {
        if (is_unicode_space(cp)) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(U' ');
        pending_space = false;
        collapsed.push_back(cp);
    }
    return encode_utf8(collapsed);
}

// ---------------------------------------------------------------------------
// Screening

namespace {

std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && static_cast<unsigned char>(text[i]) == ' ') ++i;
        std::size_t start = i;
        while (i < text.size() && static_cast<unsigned char>(text[i]) != ' ') ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

}  // namespace

bool detect_spam(std::string_view normalized, const SpamParams& params) {
    const auto tokens = split_tokens(normalized);
    const std::size_t n = tokens.size();
    if (n == 0) return false;

    // Consecutive identical tokens.
    std::size_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        run = tokens[i] == tokens[i - 1] ? run + 1 : 1;
        if (run >= static_cast<std::size_t>(params.max_consecutive_token_repeats)) return true;
    }

    // Consecutive repeats of the same ngram_len-gram: positions where
    // tokens[i] == tokens[i + p] chain into a periodic run.
    const std::size_t p = static_cast<std::size_t>(params.ngram_len);
    if (n >= 2 * p) {
        std::size_t match_run = 0;
        for (std::size_t i = 0; i + p < n; ++i) {
            match_run = tokens[i] == tokens[i + p] ? match_run + 1 : 0;
            // match_run periodic positions cover (match_run / p) + 1 full
            // repeats of one p-gram once match_run is a multiple of p.
            if (match_run >= p * (static_cast<std::size_t>(params.max_consecutive_ngram_repeats) - 1))
                return true;
        }
    }
    return false;
}

bool apply_blocklist(std::string_view normalized, const std::vector<std::string>& blocklist) {
    if (blocklist.empty()) return false;
    const CodepointView view = decode_utf8(normalized);
    std::u32string lower;
    lower.reserve(view.size());
    for (char32_t cp : view.points) lower.push_back(to_lower(cp));
    for (const auto& phrase : blocklist) {
        if (phrase.empty()) continue;
        CodepointView pv = decode_utf8(phrase);
        std::u32string needle;
        for (char32_t cp : pv.points) needle.push_back(to_lower(cp));
        std::size_t pos = 0;
        while ((pos = lower.find(needle, pos)) != std::u32string::npos) {
            const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
            const std::size_t end = pos + needle.size();
            const bool right_ok = end == lower.size() || !is_word_char(lower[end]);
            if (left_ok && right_ok) return true;
            ++pos;
        }
    }
    return false;
}

bool exceeds_length(std::string_view normalized, std::size_t limit_tokens) {
    // Count tokens without materializing them.
    std::size_t count = 0;
    bool in_token = false;
    for (char c : normalized) {
        if (c == ' ') {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            if (++count > limit_tokens) return true;
        }
    }
    return false;
}

FieldResult sanitize_field(std::string_view raw, const SpamParams& params,
                           const std::vector<std::string>& blocklist,
                           std::size_t limit_tokens) {
    // Sentinels pass through unchanged.
    if (raw == kSentinelSpam) return {FieldOutcome::RemovedSpam, std::string(kSentinelSpam), {}};
    if (raw == kSentinelBlocklist)
        return {FieldOutcome::RemovedBlocklist, std::string(kSentinelBlocklist), {}};
    if (raw == kSentinelTooLong)
        return {FieldOutcome::RemovedTooLong, std::string(kSentinelTooLong), {}};

    std::string text = normalize_text(raw);
    if (detect_spam(text, params))
        return {FieldOutcome::RemovedSpam, std::string(kSentinelSpam), "repeated tokens or phrases"};
    if (apply_blocklist(text, blocklist))
        return {FieldOutcome::RemovedBlocklist, std::string(kSentinelBlocklist), "blocklist phrase"};
    if (exceeds_length(text, limit_tokens))
        return {FieldOutcome::RemovedTooLong, std::string(kSentinelTooLong),
                "more than " + std::to_string(limit_tokens) + " tokens"};
    return {FieldOutcome::Clean, std::move(text), {}};
}

std::vector<std::string> load_blocklist(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open blocklist " + path);
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = line.find_last_not_of(" \t");
        phrases.push_back(line.substr(a, b - a + 1));
    }
    return phrases;
}

std::uint64_t template_hash(std::string_view normalized) {
    const CodepointView view = decode_utf8(normalized);
    const std::size_t cps = std::min<std::size_t>(view.size(), 200);
    return fnv1a64(normalized.substr(0, view.byte_offsets[cps]));
}

std::vector<DuplicateCluster> duplicate_report(const Corpus& corpus) {
    struct Acc {
        std::size_t count = 0;
        std::vector<std::string> samples;
    };
    std::map<std::uint64_t, Acc> by_hash;
    for (const auto& post : corpus.posts) {
        if (is_sentinel(post.content) || post.content.empty()) continue;
        Acc& acc = by_hash[template_hash(post.content)];
        ++acc.count;
        if (acc.samples.size() < 5) acc.samples.push_back(post.post_id);
    }
    std::vector<DuplicateCluster> out;
    for (const auto& [hash, acc] : by_hash) {
        if (acc.count >= 2) out.push_back({hash, acc.count, acc.samples});
    }
    std::sort(out.begin(), out.end(), [](const DuplicateCluster& a, const DuplicateCluster& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.hash < b.hash;
    });
    return out;
}

}  // namespace moltpipe
