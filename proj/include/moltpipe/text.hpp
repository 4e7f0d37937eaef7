#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace moltpipe {

// Decoded UTF-8 string: code points plus the byte offset where each one
// starts. byte_offsets has size() + 1 entries; the last one is the total
// byte length, so the bytes of code point i are
// [byte_offsets[i], byte_offsets[i+1]).
struct CodepointView {
    std::u32string points;
    std::vector<std::size_t> byte_offsets;
    std::size_t invalid_sequences = 0;

    std::size_t size() const { return points.size(); }
    char32_t operator[](std::size_t i) const { return points[i]; }
};

// Invalid sequences become U+FFFD and are counted.
CodepointView decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view points);

// Slice [start, end) of `text` in code-point offsets.
std::string codepoint_slice(std::string_view text, std::size_t start, std::size_t end);
std::size_t codepoint_length(std::string_view text);

bool is_unicode_space(char32_t cp);
// Letters and digits, approximated for non-ASCII: any code point that is
// neither whitespace nor in the common punctuation/symbol ranges counts
// as a word character.
bool is_word_char(char32_t cp);
bool is_ascii_alnum(char32_t cp);
bool is_ascii_digit(char32_t cp);
bool is_ascii_alpha(char32_t cp);

char32_t to_lower(char32_t cp);
std::string ascii_lower(std::string_view s);

// FNV-1a over bytes, the project-wide stable 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace moltpipe
