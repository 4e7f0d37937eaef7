#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "moltpipe/normalize.hpp"
#include "moltpipe/text.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace moltpipe;

namespace {

std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Quadratic reference detector, obviously correct: try every start position
// and repeat count.
bool brute_spam(std::string_view normalized, const SpamParams& p) {
    auto toks = split_tokens(normalized);
    const std::size_t n = toks.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t run = 1;
        while (i + run < n && toks[i + run] == toks[i]) ++run;
        if (run >= static_cast<std::size_t>(p.max_consecutive_token_repeats)) return true;
    }
    const std::size_t g = static_cast<std::size_t>(p.ngram_len);
    for (std::size_t i = 0; i + g <= n; ++i) {
        std::size_t reps = 1;
        while (true) {
            const std::size_t next = i + reps * g;
            if (next + g > n) break;
            bool same = true;
            for (std::size_t k = 0; k < g; ++k)
                if (toks[next + k] != toks[i + k]) { same = false; break; }
            if (!same) break;
            ++reps;
        }
        if (reps >= static_cast<std::size_t>(p.max_consecutive_ngram_repeats)) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("normalize_text: entity decoding, whitespace collapse, trim") {
    CHECK(normalize_text("a &amp; b") == "a & b");
    CHECK(normalize_text("&lt;tag&gt;") == "<tag>");
    CHECK(normalize_text("x &#65; y") == "x A y");
    CHECK(normalize_text("x &#x1F600; y") == "x \U0001F600 y");
    CHECK(normalize_text("  a \t\n b  ") == "a b");
    CHECK(normalize_text("a b") == "a b");       // NBSP is whitespace
    CHECK(normalize_text("a  b") == "a b"); // em-space run
    CHECK(normalize_text("") == "");
    CHECK(normalize_text("   \n\t ") == "");
    // Unknown entities pass through untouched.
    CHECK(normalize_text("&notarealentity;") == "&notarealentity;");
}

TEST_CASE("normalize_text is idempotent on random noisy inputs") {
    std::mt19937_64 rng(1234);
    const std::vector<std::string> pieces = {"word", "&amp;", "  ", "\t", "&#66;", " ",
                                             "end.", "&quot;", "\n\n", "café", "&#x42;"};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const std::size_t n = rng() % 30;
        for (std::size_t k = 0; k < n; ++k) s += pieces[rng() % pieces.size()];
        const std::string once = normalize_text(s);
        CHECK(normalize_text(once) == once);
    }
}

TEST_CASE("detect_spam: consecutive token repeats") {
    SpamParams p;
    std::string nine, ten;
    for (int i = 0; i < 9; ++i) nine += "buy ";
    for (int i = 0; i < 10; ++i) ten += "buy ";
    CHECK_FALSE(detect_spam(normalize_text(nine), p));
    CHECK(detect_spam(normalize_text(ten), p));
    CHECK(detect_spam(normalize_text("intro " + ten + " outro"), p));
}

TEST_CASE("detect_spam: repeated 3-gram") {
    SpamParams p;
    std::string five, four;
    for (int i = 0; i < 5; ++i) five += "claw the moon ";
    for (int i = 0; i < 4; ++i) four += "claw the moon ";
    CHECK(detect_spam(normalize_text(five), p));
    CHECK_FALSE(detect_spam(normalize_text(four), p));
    CHECK(detect_spam(normalize_text("preamble " + five + "post"), p));
}

TEST_CASE("detect_spam matches brute-force oracle on random token streams") {
    std::mt19937_64 rng(77);
    const std::vector<std::string> vocab = {"a", "b", "c", "claw", "moon"};
    int hits = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string s;
        const std::size_t n = rng() % 60;
        for (std::size_t k = 0; k < n; ++k) {
            // Skewed choice so long runs actually occur.
            s += vocab[rng() % 100 < 55 ? 0 : rng() % vocab.size()];
            s += ' ';
        }
        const std::string norm = normalize_text(s);
        const bool expected = brute_spam(norm, SpamParams{});
        hits += expected;
        REQUIRE(detect_spam(norm, SpamParams{}) == expected);
    }
    CHECK(hits > 100);  // the generator must exercise the positive branch
}

TEST_CASE("blocklist matches case-insensitively on word boundaries") {
    const std::vector<std::string> bl = {"crab rave", "forbidden"};
    CHECK(apply_blocklist("join the CRAB Rave tonight", bl));
    CHECK(apply_blocklist("forbidden", bl));
    CHECK_FALSE(apply_blocklist("crabrave is one word", bl));
    CHECK_FALSE(apply_blocklist("unforbidden words", bl));
    CHECK_FALSE(apply_blocklist("forbiddenness", bl));
    CHECK_FALSE(apply_blocklist("anything", {}));
}

TEST_CASE("length limit counts whitespace-delimited tokens") {
    std::string many;
    for (int i = 0; i < 101; ++i) many += "t ";
    CHECK(exceeds_length(normalize_text(many), 100));
    CHECK_FALSE(exceeds_length(normalize_text("a b c"), 3));
    CHECK(exceeds_length(normalize_text("a b c d"), 3));
}

TEST_CASE("sanitize_field: order spam -> blocklist -> too-long; sentinels pass through") {
    SpamParams p;
    const std::vector<std::string> bl = {"claw"};
    std::string spammy;
    for (int i = 0; i < 12; ++i) spammy += "claw ";
    // Both spam and blocklisted: spam wins.
    auto r = sanitize_field(spammy, p, bl);
    CHECK(r.outcome == FieldOutcome::RemovedSpam);
    CHECK(r.text == kSentinelSpam);
    // Blocklisted and over-limit: blocklist wins.
    std::string long_blocked = "claw ";
    for (int i = 0; i < 10; ++i) long_blocked += "w" + std::to_string(i) + " ";
    auto r2 = sanitize_field(long_blocked, p, bl, 5);
    CHECK(r2.outcome == FieldOutcome::RemovedBlocklist);
    CHECK(r2.text == kSentinelBlocklist);
    // Over-limit only.
    std::string long_only;
    for (int i = 0; i < 10; ++i) long_only += "w" + std::to_string(i) + " ";
    auto r3 = sanitize_field(long_only, p, {}, 5);
    CHECK(r3.outcome == FieldOutcome::RemovedTooLong);
    CHECK(r3.text == kSentinelTooLong);
    // Clean text is normalized, not replaced.
    auto r4 = sanitize_field("  hello &amp; goodbye ", p, bl);
    CHECK(r4.clean());
    CHECK(r4.text == "hello & goodbye");
    // A field already holding a sentinel is left exactly as is (idempotence).
    for (std::string_view s : {kSentinelSpam, kSentinelBlocklist, kSentinelTooLong}) {
        auto rs = sanitize_field(s, p, bl, 1);
        CHECK(rs.text == s);
    }
}

TEST_CASE("sanitize_field is idempotent") {
    SpamParams p;
    const std::vector<std::string> bl = {"claw the moon"};
    std::mt19937_64 rng(31);
    const std::vector<std::string> pieces = {"claw ", "the ", "moon ", "a ", "&amp; ", "  "};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const std::size_t n = rng() % 40;
        for (std::size_t k = 0; k < n; ++k) s += pieces[rng() % pieces.size()];
        const auto once = sanitize_field(s, p, bl, 20);
        const auto twice = sanitize_field(once.text, p, bl, 20);
        REQUIRE(twice.text == once.text);
    }
}

TEST_CASE("template_hash: equal prefixes of 200 code points collide, others do not") {
    std::string base;
    for (int i = 0; i < 200; ++i) base += static_cast<char>('a' + i % 26);
    CHECK(template_hash(base + " tail one") == template_hash(base + " another tail"));
    CHECK(template_hash(base) == template_hash(base + "x"));
    CHECK(template_hash("short text") != template_hash("short texts"));
    // Hash is over code points, not bytes: 200 multibyte chars then junk.
    std::string uni;
    for (int i = 0; i < 200; ++i) uni += "é";
    CHECK(template_hash(uni + "AAA") == template_hash(uni + "BBB"));
    // Matches plain FNV-1a over the clipped bytes.
    CHECK(template_hash("abc") == fnv1a64("abc"));
}

TEST_CASE("duplicate_report clusters by template hash") {
    Corpus corpus;
    auto add = [&](const std::string& id, const std::string& content) {
        PostRecord p;
        p.post_id = id;
        p.title = "t";
        p.content = content;
        p.created_at = "2025-05-14T08:30:00Z";
        p.created_at_epoch = 0;
        p.submolt_id = "s";
        p.submolt_name = "m";
        p.author_id = "u";
        p.author_name = "a";
        corpus.posts.push_back(p);
    };
    for (int i = 0; i < 7; ++i) add("dup" + std::to_string(i), "same boilerplate body");
    for (int i = 0; i < 2; ++i) add("pair" + std::to_string(i), "another template");
    add("solo", "unique content");
    add("sent", std::string(kSentinelSpam));
    add("sent2", std::string(kSentinelSpam));
    add("empty1", "");
    add("empty2", "");
    auto report = duplicate_report(corpus);
    REQUIRE(report.size() == 2);  // sentinels and empties never cluster
    CHECK(report[0].count == 7);
    CHECK(report[0].sample_post_ids.size() == 5);
    CHECK(report[0].sample_post_ids[0] == "dup0");
    CHECK(report[1].count == 2);
    CHECK(report[1].sample_post_ids == std::vector<std::string>{"pair0", "pair1"});
}

TEST_CASE("load_blocklist skips comments and blanks") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "moltpipe_blocklist_test.txt").string();
    {
        std::ofstream f(path, std::ios::trunc);
        f << "# header comment\n\nclaw the moon\n  spaced phrase  \n#tail\n";
    }
    auto bl = load_blocklist(path);
    REQUIRE(bl.size() == 2);
    CHECK(bl[0] == "claw the moon");
    CHECK(bl[1] == "spaced phrase");
    std::filesystem::remove(path);
}
