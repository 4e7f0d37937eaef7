#include "moltpipe/pii.hpp"

#include "moltpipe/bip39.hpp"
#include "moltpipe/checksum.hpp"
#include "moltpipe/normalize.hpp"

#include <algorithm>
#include <functional>
#include <regex>
#include <unordered_set>

namespace moltpipe {

std::string_view entity_type_name(EntityType type) {
    switch (type) {
        case EntityType::EmailAddress: return "EMAIL_ADDRESS";
        case EntityType::PhoneNumber: return "PHONE_NUMBER";
        case EntityType::CreditCard: return "CREDIT_CARD";
        case EntityType::Crypto: return "CRYPTO";
        case EntityType::IbanCode: return "IBAN_CODE";
        case EntityType::UsSsn: return "US_SSN";
        case EntityType::UsItin: return "US_ITIN";
        case EntityType::ApiKey: return "API_KEY";
        case EntityType::Password: return "PASSWORD";
        case EntityType::SeedPhrase: return "SEED_PHRASE";
    }
    return "UNKNOWN";
}

int recognizer_priority(EntityType type) {
    switch (type) {
        case EntityType::SeedPhrase: return 100;
        case EntityType::ApiKey: return 95;
        case EntityType::Password: return 90;
        case EntityType::Crypto: return 60;
        case EntityType::IbanCode: return 55;
        case EntityType::CreditCard: return 50;
        case EntityType::EmailAddress: return 45;
        case EntityType::PhoneNumber: return 40;
        case EntityType::UsSsn: return 35;
        case EntityType::UsItin: return 30;
    }
    return 0;
}

std::string placeholder_for(EntityType type) {
    return "<PII:" + std::string(entity_type_name(type)) + ">";
}

void MaskReport::merge(const MaskReport& other) {
    for (const auto& [type, count] : other.entities_by_type) entities_by_type[type] += count;
    fields_processed += other.fields_processed;
    fields_with_detection += other.fields_with_detection;
    total_entities += other.total_entities;
}

bool is_bip39_word(std::string_view w) {
    static const std::unordered_set<std::string_view> set(kBip39Words.begin(), kBip39Words.end());
    return set.count(w) > 0;
}

// ---------------------------------------------------------------------------
// Scanner helpers. All recognizers are single-pass character scanners over
// decoded code points; no backtracking regex anywhere on input text.

namespace {

bool is_pattern_char(char32_t c) {
    return is_ascii_alnum(c) || c == U'_' || c == U'-';
}

std::string slice_text(const CodepointView& v, std::string_view original, std::size_t start,
                       std::size_t end) {
    (void)original;
    std::string out;
    for (std::size_t i = start; i < end; ++i) append_utf8(out, v[i]);
    return out;
}

EntitySpan make_span(const CodepointView& v, EntityType type, std::size_t start, std::size_t end,
                     std::string recognizer_id, double confidence) {
    return EntitySpan{type, start, end, slice_text(v, {}, start, end), std::move(recognizer_id),
                      confidence};
}

bool all_same_digits(const std::string& digits) {
    for (char c : digits)
        if (c != digits[0]) return false;
    return !digits.empty();
}

}  // namespace

// ---------------------------------------------------------------------------
// Custom recognizers

std::vector<EntitySpan> PiiEngine::recognize_api_key(const CodepointView& v) const {
    std::vector<EntitySpan> out;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 3 < n; ++i) {
        if (v[i] != U's' || v[i + 1] != U'k' || v[i + 2] != U'-') continue;
        if (i > 0 && is_pattern_char(v[i - 1])) continue;
        std::size_t j = i + 3;
        while (j < n && is_pattern_char(v[j])) ++j;
        const std::size_t run = j - (i + 3);
        if (run >= 20 && run <= 100)
            out.push_back(make_span(v, EntityType::ApiKey, i, j, "api_key", 0.95));
        i = j;  // skip past the run either way
    }
    return out;
}

std::vector<EntitySpan> PiiEngine::recognize_password(const CodepointView& v) const {
    std::vector<EntitySpan> out;
    const std::size_t n = v.size();
    static const std::u32string kKeywords[3] = {U"password", U"passwd", U"pwd"};
    auto lower = [&](std::size_t i) { return to_lower(v[i]); };

    for (std::size_t i = 0; i < n; ++i) {
        if (lower(i) != U'p') continue;
        if (i > 0 && is_word_char(v[i - 1])) continue;
        std::size_t kw_end = 0;
        for (const auto& kw : kKeywords) {
            if (i + kw.size() > n) continue;
            bool match = true;
            for (std::size_t k = 0; k < kw.size(); ++k) {
                if (lower(i + k) != kw[k]) { match = false; break; }
            }
            if (match) { kw_end = i + kw.size(); break; }
        }
        if (kw_end == 0) continue;
        if (kw_end < n && is_word_char(v[kw_end])) continue;  // "passwords", "pwdfile"

        std::size_t m = kw_end;
        const std::size_t before_sep = m;
        while (m < n && is_unicode_space(v[m])) ++m;
        if (m < n && (v[m] == U':' || v[m] == U'=')) {
            ++m;
            while (m < n && is_unicode_space(v[m])) ++m;
        } else if (m > before_sep && m + 1 < n && lower(m) == U'i' && lower(m + 1) == U's' &&
                   (m + 2 == n || !is_word_char(v[m + 2]))) {
            m += 2;
            while (m < n && is_unicode_space(v[m])) ++m;
        }
        if (m >= n) continue;
        std::size_t tok_end = m;
        while (tok_end < n && !is_unicode_space(v[tok_end])) ++tok_end;
        if (tok_end - m < 4) continue;

        // Stop set comparison on the lowercased token with edge punctuation
        // stripped.
        std::size_t a = m, b = tok_end;
        while (a < b && !is_ascii_alnum(v[a])) ++a;
        while (b > a && !is_ascii_alnum(v[b - 1])) --b;
        std::string word;
        for (std::size_t k = a; k < b; ++k) append_utf8(word, to_lower(v[k]));
        bool stopped = word.empty() || word == "password" || word == "passwd" || word == "pwd";
        if (!stopped) {
            for (const auto& s : config_.password_stop_words) {
                if (word == s) { stopped = true; break; }
            }
        }
        if (stopped) continue;
        out.push_back(make_span(v, EntityType::Password, m, tok_end, "password", 0.7));
        i = tok_end;
    }
    return out;
}

std::vector<EntitySpan> PiiEngine::recognize_seed_phrase(const CodepointView& v) const {
    std::vector<EntitySpan> out;
    const std::size_t n = v.size();

    struct Tok { std::size_t core_start, core_end; bool in_list; };
    std::vector<Tok> tokens;
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_unicode_space(v[i])) ++i;
        if (i >= n) break;
        std::size_t start = i;
        while (i < n && !is_unicode_space(v[i])) ++i;
        std::size_t a = start, b = i;
        while (a < b && !is_ascii_alpha(v[a]) && !is_ascii_digit(v[a])) ++a;
        while (b > a && !is_ascii_alpha(v[b - 1]) && !is_ascii_digit(v[b - 1])) --b;
        bool in_list = b > a && b - a >= 3 && b - a <= 8;
        std::string word;
        if (in_list) {
            for (std::size_t k = a; k < b; ++k) {
                const char32_t c = to_lower(v[k]);
                if (c < U'a' || c > U'z') { in_list = false; break; }
                word.push_back(static_cast<char>(c));
            }
        }
        if (in_list) in_list = is_bip39_word(word);
        tokens.push_back({a, b, in_list});
    }

    std::size_t run_start = 0, run_len = 0;
    auto flush = [&](std::size_t end_idx) {
        if (run_len >= 12) {
            out.push_back(make_span(v, EntityType::SeedPhrase, tokens[run_start].core_start,
                                    tokens[end_idx - 1].core_end, "seed_phrase", 0.9));
        }
        run_len = 0;
    };
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (tokens[t].in_list) {
            if (run_len == 0) run_start = t;
            ++run_len;
        } else {
            flush(t);
        }
    }
    flush(tokens.size());
    return out;
}

// ---------------------------------------------------------------------------
// Standard recognizers

namespace {

bool is_email_local_char(char32_t c) {
    return is_ascii_alnum(c) || c == U'.' || c == U'_' || c == U'%' || c == U'+' || c == U'-';
}

void scan_email(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] != U'@') continue;
        // local part
        std::size_t start = i;
        while (start > 0 && is_email_local_char(v[start - 1])) --start;
        while (start < i && !is_ascii_alnum(v[start])) ++start;  // must begin alnum
        if (start == i) continue;
        if (start > 0 && v[start - 1] == U'@') continue;
        // domain: labels of [alnum-] joined by '.', last label alpha, len >= 2
        std::size_t j = i + 1;
        while (j < n && (is_ascii_alnum(v[j]) || v[j] == U'-' || v[j] == U'.')) ++j;
        std::size_t end = j;
        while (end > i + 1 && (v[end - 1] == U'.' || v[end - 1] == U'-')) --end;
        if (end <= i + 1) continue;
        // validate labels
        bool ok = true, has_dot = false;
        std::size_t label_start = i + 1, last_label_start = i + 1;
        for (std::size_t k = i + 1; k <= end; ++k) {
            if (k == end || v[k] == U'.') {
                if (k == label_start) { ok = false; break; }
                if (v[label_start] == U'-' || v[k - 1] == U'-') { ok = false; break; }
                last_label_start = label_start;
                if (k < end) { has_dot = true; label_start = k + 1; }
            }
        }
        if (!ok || !has_dot) continue;
        std::size_t tld_len = end - last_label_start;
        if (tld_len < 2) continue;
        bool tld_alpha = true;
        for (std::size_t k = last_label_start; k < end; ++k)
            if (!is_ascii_alpha(v[k])) { tld_alpha = false; break; }
        if (!tld_alpha) continue;
        out.push_back(make_span(v, EntityType::EmailAddress, start, end, "email", 0.9));
        i = end;
    }
}

void scan_phone(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        // International form: '+' then 8-15 digits with separators.
        if (v[i] == U'+' && (i == 0 || (!is_word_char(v[i - 1]) && v[i - 1] != U'+'))) {
            std::size_t j = i + 1;
            std::string digits;
            std::size_t last_digit = 0;
            while (j < n) {
                const char32_t c = v[j];
                if (is_ascii_digit(c)) {
                    digits.push_back(static_cast<char>(c));
                    last_digit = j;
                    ++j;
                } else if ((c == U' ' || c == U'-' || c == U'.' || c == U'(' || c == U')') &&
                           digits.size() < 15) {
                    ++j;
                } else {
                    break;
                }
                if (digits.size() > 15) break;
            }
            if (digits.size() >= 8 && digits.size() <= 15 && !all_same_digits(digits) &&
                (last_digit + 1 == n || !is_word_char(v[last_digit + 1]))) {
                out.push_back(make_span(v, EntityType::PhoneNumber, i, last_digit + 1,
                                        "phone_intl", 0.75));
                i = last_digit;
                continue;
            }
        }
        // NANP forms: (ddd) ddd-dddd | ddd-ddd-dddd | ddd.ddd.dddd | ddd-dddd
        if ((is_ascii_digit(v[i]) || v[i] == U'(') &&
            (i == 0 || (!is_word_char(v[i - 1]) && v[i - 1] != U'-' && v[i - 1] != U'.'))) {
            std::size_t j = i;
            const bool paren = v[j] == U'(';
            if (paren) ++j;
            auto digits_at = [&](std::size_t pos, std::size_t count) {
                if (pos + count > n) return false;
                for (std::size_t k = 0; k < count; ++k)
                    if (!is_ascii_digit(v[pos + k])) return false;
                return true;
            };
            std::string digits;
            auto take = [&](std::size_t pos, std::size_t count) {
                for (std::size_t k = 0; k < count; ++k)
                    digits.push_back(static_cast<char>(v[pos + k]));
                return pos + count;
            };
            std::size_t end = 0;
            if (paren) {
                if (digits_at(j, 3) && j + 3 < n && v[j + 3] == U')') {
                    j = take(j, 3) + 1;
                    if (j < n && v[j] == U' ') ++j;
                    if (digits_at(j, 3) && j + 3 < n && (v[j + 3] == U'-' || v[j + 3] == U'.')) {
                        j = take(j, 3) + 1;
                        if (digits_at(j, 4)) end = take(j, 4);
                    }
                }
            } else if (digits_at(j, 3) && j + 3 < n && (v[j + 3] == U'-' || v[j + 3] == U'.')) {
                const char32_t sep = v[j + 3];
                j = take(j, 3) + 1;
                if (digits_at(j, 3) && j + 3 < n && v[j + 3] == sep && digits_at(j + 4, 4)) {
                    j = take(j, 3) + 1;
                    end = take(j, 4);
                } else if (digits_at(j, 4)) {
                    end = take(j, 4);  // 7-digit local number
                }
            }
            if (end > 0 && (end == n || (!is_word_char(v[end]) && v[end] != U'-')) &&
                !all_same_digits(digits)) {
                out.push_back(make_span(v, EntityType::PhoneNumber, i, end, "phone_nanp", 0.75));
                i = end - 1;
            }
        }
    }
}

void scan_credit_card(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_ascii_digit(v[i])) continue;
        if (i > 0 && (is_word_char(v[i - 1]) || v[i - 1] == U'-' || v[i - 1] == U'.')) {
            while (i < n && is_ascii_digit(v[i])) ++i;
            continue;
        }
        std::string digits;
        std::size_t j = i, last_digit = i;
        while (j < n && digits.size() <= 19) {
            if (is_ascii_digit(v[j])) {
                digits.push_back(static_cast<char>(v[j]));
                last_digit = j;
                ++j;
            } else if ((v[j] == U' ' || v[j] == U'-') && j + 1 < n && is_ascii_digit(v[j + 1])) {
                ++j;
            } else {
                break;
            }
        }
        if (digits.size() >= 13 && digits.size() <= 19 &&
            (last_digit + 1 == n || !is_word_char(v[last_digit + 1])) && luhn_valid(digits)) {
            out.push_back(
                make_span(v, EntityType::CreditCard, i, last_digit + 1, "credit_card", 0.85));
        }
        i = last_digit;
    }
}

void scan_iban(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 4 < n; ++i) {
        if (!(v[i] >= U'A' && v[i] <= U'Z') || !(v[i + 1] >= U'A' && v[i + 1] <= U'Z')) continue;
        if (i > 0 && is_word_char(v[i - 1])) continue;
        if (!is_ascii_digit(v[i + 2]) || !is_ascii_digit(v[i + 3])) continue;
        std::size_t j = i + 4;
        while (j < n && is_ascii_alnum(v[j])) ++j;
        const std::size_t len = j - i;
        if (len < 15 || len > 34) { i = j; continue; }
        if (j < n && is_word_char(v[j])) { i = j; continue; }
        std::string candidate;
        for (std::size_t k = i; k < j; ++k) {
            char32_t c = v[k];
            if (c >= U'a' && c <= U'z') c -= 32;
            candidate.push_back(static_cast<char>(c));
        }
        const int expect = iban_country_length(candidate.substr(0, 2));
        if (expect != 0 && static_cast<int>(len) != expect) { i = j; continue; }
        if (iban_checksum_valid(candidate)) {
            out.push_back(make_span(v, EntityType::IbanCode, i, j, "iban", 0.9));
        }
        i = j;
    }
}

void scan_ssn_itin(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 11 <= n; ++i) {
        if (!is_ascii_digit(v[i])) continue;
        if (i > 0 && (is_word_char(v[i - 1]) || v[i - 1] == U'-' || v[i - 1] == U'.')) continue;
        // ddd-dd-dddd
        bool shape = is_ascii_digit(v[i + 1]) && is_ascii_digit(v[i + 2]) && v[i + 3] == U'-' &&
                     is_ascii_digit(v[i + 4]) && is_ascii_digit(v[i + 5]) && v[i + 6] == U'-' &&
                     is_ascii_digit(v[i + 7]) && is_ascii_digit(v[i + 8]) &&
                     is_ascii_digit(v[i + 9]) && is_ascii_digit(v[i + 10]);
        if (!shape) continue;
        if (i + 11 < n && (is_word_char(v[i + 11]) || v[i + 11] == U'-')) continue;
        const int area = (static_cast<int>(v[i]) - '0') * 100 +
                         (static_cast<int>(v[i + 1]) - '0') * 10 + (static_cast<int>(v[i + 2]) - '0');
        const int group = (static_cast<int>(v[i + 4]) - '0') * 10 + (static_cast<int>(v[i + 5]) - '0');
        int serial = 0;
        for (int k = 7; k <= 10; ++k) serial = serial * 10 + (static_cast<int>(v[i + k]) - '0');
        if (area >= 900) {
            // ITIN: 9xx with a group in the assigned ranges.
            const bool itin_group = (group >= 50 && group <= 65) || (group >= 70 && group <= 88) ||
                                    (group >= 90 && group <= 92) || (group >= 94 && group <= 99);
            if (itin_group && serial != 0)
                out.push_back(make_span(v, EntityType::UsItin, i, i + 11, "us_itin", 0.85));
        } else if (area != 0 && area != 666 && group != 0 && serial != 0) {
            out.push_back(make_span(v, EntityType::UsSsn, i, i + 11, "us_ssn", 0.85));
        }
        i += 10;
    }
}

bool is_base58_char(char32_t c) {
    if (!is_ascii_alnum(c)) return false;
    return c != U'0' && c != U'O' && c != U'I' && c != U'l';
}

bool is_bech32_char(char32_t c) {
    return (c >= U'a' && c <= U'z') || is_ascii_digit(c);
}

bool is_hex_char(char32_t c) {
    return is_ascii_digit(c) || (c >= U'a' && c <= U'f') || (c >= U'A' && c <= U'F');
}

void scan_crypto(const CodepointView& v, std::vector<EntitySpan>& out) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && is_word_char(v[i - 1])) continue;
        // 0x-prefixed 40-hex address
        if (v[i] == U'0' && i + 1 < n && v[i + 1] == U'x') {
            std::size_t j = i + 2;
            while (j < n && is_hex_char(v[j])) ++j;
            if (j - (i + 2) == 40 && (j == n || !is_word_char(v[j]))) {
                out.push_back(make_span(v, EntityType::Crypto, i, j, "crypto_eth", 0.85));
                i = j - 1;
                continue;
            }
        }
        // bech32 (bc1... / tb1...)
        if (i + 3 < n && ((v[i] == U'b' && v[i + 1] == U'c') || (v[i] == U't' && v[i + 1] == U'b')) &&
            v[i + 2] == U'1') {
            std::size_t j = i;
            while (j < n && is_bech32_char(v[j])) ++j;
            const std::size_t len = j - i;
            if (len >= 14 && len <= 74 && (j == n || !is_word_char(v[j]))) {
                std::string token;
                for (std::size_t k = i; k < j; ++k) token.push_back(static_cast<char>(v[k]));
                if (bech32_valid(token)) {
                    out.push_back(make_span(v, EntityType::Crypto, i, j, "crypto_bech32", 0.9));
                    i = j - 1;
                    continue;
                }
            }
        }
        // Base58Check (legacy "1..." / "3...")
        if (v[i] == U'1' || v[i] == U'3') {
            std::size_t j = i;
            while (j < n && is_base58_char(v[j])) ++j;
            const std::size_t len = j - i;
            if (len >= 25 && len <= 35 && (j == n || !is_word_char(v[j]))) {
                std::string token;
                for (std::size_t k = i; k < j; ++k) token.push_back(static_cast<char>(v[k]));
                if (base58check_valid(token)) {
                    out.push_back(make_span(v, EntityType::Crypto, i, j, "crypto_base58", 0.9));
                    i = j - 1;
                    continue;
                }
            }
            if (len > 1) i = j - 1;
        }
    }
}

}  // namespace

std::vector<EntitySpan> PiiEngine::recognize_standard(const CodepointView& v) const {
    std::vector<EntitySpan> out;
    if (enabled(EntityType::EmailAddress)) scan_email(v, out);
    if (enabled(EntityType::PhoneNumber)) scan_phone(v, out);
    if (enabled(EntityType::CreditCard)) scan_credit_card(v, out);
    if (enabled(EntityType::IbanCode)) scan_iban(v, out);
    if (enabled(EntityType::UsSsn) || enabled(EntityType::UsItin)) {
        std::vector<EntitySpan> ssn;
        scan_ssn_itin(v, ssn);
        for (auto& s : ssn) {
            if (enabled(s.entity_type)) out.push_back(std::move(s));
        }
    }
    if (enabled(EntityType::Crypto)) scan_crypto(v, out);
    return out;
}

// ---------------------------------------------------------------------------

PiiEngine::PiiEngine(RecognizerConfig config) : config_(std::move(config)) {
    for (const auto& p : config_.custom_patterns) {
        // Validate eagerly so a bad config fails at construction.
        std::regex re(p.pattern);
        (void)re;
    }
}

bool PiiEngine::enabled(EntityType t) const {
    return config_.disabled_types.count(std::string(entity_type_name(t))) == 0;
}

std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> spans) {
    std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
        const std::size_t la = a.end - a.start, lb = b.end - b.start;
        if (la != lb) return la > lb;
        const int pa = recognizer_priority(a.entity_type), pb = recognizer_priority(b.entity_type);
        if (pa != pb) return pa > pb;
        return a.start < b.start;
    });
    std::vector<EntitySpan> kept;
    for (auto& s : spans) {
        bool overlaps = false;
        for (const auto& k : kept) {
            if (s.start < k.end && k.start < s.end) { overlaps = true; break; }
        }
        if (!overlaps) kept.push_back(std::move(s));
    }
    std::sort(kept.begin(), kept.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
    return kept;
}

std::vector<EntitySpan> PiiEngine::detect_entities(std::string_view text) const {
    const CodepointView v = decode_utf8(text);
    std::vector<EntitySpan> spans;
    if (enabled(EntityType::ApiKey)) {
        auto s = recognize_api_key(v);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    if (enabled(EntityType::Password)) {
        auto s = recognize_password(v);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    if (enabled(EntityType::SeedPhrase)) {
        auto s = recognize_seed_phrase(v);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    {
        auto s = recognize_standard(v);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    if (!config_.custom_patterns.empty()) {
        // std::regex works on bytes; map byte offsets back to code points.
        const std::string subject(text);
        for (const auto& p : config_.custom_patterns) {
            std::regex re(p.pattern);
            for (auto it = std::sregex_iterator(subject.begin(), subject.end(), re);
                 it != std::sregex_iterator(); ++it) {
                if (it->length(0) < static_cast<std::ptrdiff_t>(p.min_len)) continue;
                const std::size_t byte_start = static_cast<std::size_t>(it->position(0));
                const std::size_t byte_end = byte_start + static_cast<std::size_t>(it->length(0));
                const auto cp_at = [&](std::size_t byte) {
                    return static_cast<std::size_t>(
                        std::lower_bound(v.byte_offsets.begin(), v.byte_offsets.end(), byte) -
                        v.byte_offsets.begin());
                };
                EntityType type = EntityType::ApiKey;
                for (int t = 0; t <= static_cast<int>(EntityType::SeedPhrase); ++t) {
                    if (entity_type_name(static_cast<EntityType>(t)) == p.type_name)
                        type = static_cast<EntityType>(t);
                }
                spans.push_back(make_span(v, type, cp_at(byte_start), cp_at(byte_end), p.id, 0.6));
            }
        }
    }
    return resolve_overlaps(std::move(spans));
}

std::string PiiEngine::mask(std::string_view text, const std::vector<EntitySpan>& spans) const {
    if (spans.empty()) return std::string(text);
    const CodepointView v = decode_utf8(text);
    std::string out;
    out.reserve(text.size());
    std::size_t cursor_bytes = 0;
    for (const auto& s : spans) {
        const std::size_t start_byte = v.byte_offsets[std::min(s.start, v.size())];
        const std::size_t end_byte = v.byte_offsets[std::min(s.end, v.size())];
        out.append(text.substr(cursor_bytes, start_byte - cursor_bytes));
        out.append(placeholder_for(s.entity_type));
        cursor_bytes = end_byte;
    }
    out.append(text.substr(cursor_bytes));
    return out;
}

std::string PiiEngine::mask_field(const std::string& text, MaskReport& report) const {
    ++report.fields_processed;
    if (text.empty() || is_sentinel(text)) return text;
    const auto spans = detect_entities(text);
    if (spans.empty()) return text;
    ++report.fields_with_detection;
    for (const auto& s : spans) {
        ++report.entities_by_type[std::string(entity_type_name(s.entity_type))];
        ++report.total_entities;
    }
    return mask(text, spans);
}

namespace {

void anonymize_comment(const PiiEngine& engine, CommentNode& c, MaskReport& report,
                       const std::function<std::string(const std::string&, MaskReport&)>& f) {
    c.content = f(c.content, report);
    for (auto& r : c.replies) anonymize_comment(engine, r, report, f);
}

}  // namespace

std::pair<PostRecord, MaskReport> PiiEngine::anonymize_record(const PostRecord& record) const {
    PostRecord out = record;
    MaskReport report;
    auto f = [this](const std::string& text, MaskReport& r) { return mask_field(text, r); };
    out.title = mask_field(out.title, report);
    out.content = mask_field(out.content, report);
    for (auto& c : out.comments) anonymize_comment(*this, c, report, f);
    return {std::move(out), std::move(report)};
}

}  // namespace moltpipe
