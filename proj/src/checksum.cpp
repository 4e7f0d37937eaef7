#include "moltpipe/checksum.hpp"

#include <cstring>
#include <unordered_map>

namespace moltpipe {

bool luhn_valid(std::string_view digits) {
    if (digits.empty()) return false;
    int sum = 0;
    bool doubled = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it < '0' || *it > '9') return false;
        int d = *it - '0';
        if (doubled) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        doubled = !doubled;
    }
    return sum % 10 == 0;
}

bool iban_checksum_valid(std::string_view iban) {
    if (iban.size() < 5) return false;
    // Move the first four characters to the end, expand letters to digits,
    // and take the whole number mod 97 incrementally.
    std::string rearranged(iban.substr(4));
    rearranged += iban.substr(0, 4);
    std::uint64_t rem = 0;
    for (char c : rearranged) {
        if (c >= '0' && c <= '9') {
            rem = (rem * 10 + static_cast<std::uint64_t>(c - '0')) % 97;
        } else if (c >= 'A' && c <= 'Z') {
            rem = (rem * 100 + static_cast<std::uint64_t>(c - 'A' + 10)) % 97;
        } else {
            return false;
        }
    }
    return rem == 1;
}

int iban_country_length(std::string_view cc) {
    static const std::unordered_map<std::string, int> lengths = {
        {"AD", 24}, {"AE", 23}, {"AL", 28}, {"AT", 20}, {"AZ", 28}, {"BA", 20},
        {"BE", 16}, {"BG", 22}, {"BH", 22}, {"BR", 29}, {"BY", 28}, {"CH", 21},
        {"CR", 22}, {"CY", 28}, {"CZ", 24}, {"DE", 22}, {"DK", 18}, {"DO", 28},
        {"EE", 20}, {"EG", 29}, {"ES", 24}, {"FI", 18}, {"FO", 18}, {"FR", 27},
        {"GB", 22}, {"GE", 22}, {"GI", 23}, {"GL", 18}, {"GR", 27}, {"GT", 28},
        {"HR", 21}, {"HU", 28}, {"IE", 22}, {"IL", 23}, {"IS", 26}, {"IT", 27},
        {"JO", 30}, {"KW", 30}, {"KZ", 20}, {"LB", 28}, {"LI", 21}, {"LT", 20},
        {"LU", 20}, {"LV", 21}, {"MC", 27}, {"MD", 24}, {"ME", 22}, {"MK", 19},
        {"MR", 27}, {"MT", 31}, {"MU", 30}, {"NL", 18}, {"NO", 15}, {"PK", 24},
        {"PL", 28}, {"PS", 29}, {"PT", 25}, {"QA", 29}, {"RO", 24}, {"RS", 22},
        {"SA", 24}, {"SE", 24}, {"SI", 19}, {"SK", 24}, {"SM", 27}, {"TN", 24},
        {"TR", 26}, {"UA", 29}, {"VA", 22}, {"VG", 24}, {"XK", 20},
    };
    auto it = lengths.find(std::string(cc));
    return it == lengths.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4)

namespace {

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

void sha256_block(std::uint32_t state[8], const std::uint8_t* block) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = (static_cast<std::uint32_t>(block[4 * i]) << 24) |
               (static_cast<std::uint32_t>(block[4 * i + 1]) << 16) |
               (static_cast<std::uint32_t>(block[4 * i + 2]) << 8) |
               static_cast<std::uint32_t>(block[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state[0], b = state[1], c = state[2], d = state[3];
    std::uint32_t e = state[4], f = state[5], g = state[6], h = state[7];
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = h + s1 + ch + kSha256K[i] + w[i];
        const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = s0 + maj;
        h = g; g = f; f = e; e = d + t1;
        d = c; c = b; b = a; a = t1 + t2;
    }
    state[0] += a; state[1] += b; state[2] += c; state[3] += d;
    state[4] += e; state[5] += f; state[6] += g; state[7] += h;
}

}  // namespace

std::array<std::uint8_t, 32> sha256(std::string_view data) {
    std::uint32_t state[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                              0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    const std::uint64_t bit_len = static_cast<std::uint64_t>(data.size()) * 8;
    std::size_t i = 0;
    while (i + 64 <= data.size()) {
        sha256_block(state, reinterpret_cast<const std::uint8_t*>(data.data()) + i);
        i += 64;
    }
    std::uint8_t tail[128] = {0};
    const std::size_t rem = data.size() - i;
    std::memcpy(tail, data.data() + i, rem);
    tail[rem] = 0x80;
    const std::size_t total = rem + 1 + 8 <= 64 ? 64 : 128;
    for (int k = 0; k < 8; ++k)
        tail[total - 1 - k] = static_cast<std::uint8_t>(bit_len >> (8 * k));
    sha256_block(state, tail);
    if (total == 128) sha256_block(state, tail + 64);
    std::array<std::uint8_t, 32> out;
    for (int k = 0; k < 8; ++k) {
        out[4 * k] = static_cast<std::uint8_t>(state[k] >> 24);
        out[4 * k + 1] = static_cast<std::uint8_t>(state[k] >> 16);
        out[4 * k + 2] = static_cast<std::uint8_t>(state[k] >> 8);
        out[4 * k + 3] = static_cast<std::uint8_t>(state[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Base58Check

namespace {

int base58_digit(char c) {
    static const char* alphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    const char* p = std::strchr(alphabet, c);
    return p && c != '\0' ? static_cast<int>(p - alphabet) : -1;
}

}  // namespace

bool base58check_valid(std::string_view address) {
    if (address.size() < 25 || address.size() > 35) return false;
    std::vector<std::uint8_t> bytes;
    bytes.reserve(25);
    std::size_t leading_ones = 0;
    while (leading_ones < address.size() && address[leading_ones] == '1') ++leading_ones;
    for (char c : address) {
        const int d = base58_digit(c);
        if (d < 0) return false;
        int carry = d;
        for (auto it = bytes.rbegin(); it != bytes.rend(); ++it) {
            const int v = *it * 58 + carry;
            *it = static_cast<std::uint8_t>(v & 0xFF);
            carry = v >> 8;
        }
        while (carry > 0) {
            bytes.insert(bytes.begin(), static_cast<std::uint8_t>(carry & 0xFF));
            carry >>= 8;
        }
    }
    bytes.insert(bytes.begin(), leading_ones, 0);
    if (bytes.size() != 25) return false;
    const std::string_view payload(reinterpret_cast<const char*>(bytes.data()), 21);
    const auto first = sha256(payload);
    const auto second = sha256(std::string_view(reinterpret_cast<const char*>(first.data()), 32));
    return std::memcmp(second.data(), bytes.data() + 21, 4) == 0;
}

// ---------------------------------------------------------------------------
// Bech32 / Bech32m

namespace {

std::uint32_t bech32_polymod(const std::vector<std::uint8_t>& values) {
    static const std::uint32_t gen[5] = {0x3b6a57b2, 0x26508e6d, 0x1ea119fa, 0x3d4233dd, 0x2a1462b3};
    std::uint32_t chk = 1;
    for (std::uint8_t v : values) {
        const std::uint32_t top = chk >> 25;
        chk = ((chk & 0x1ffffff) << 5) ^ v;
        for (int i = 0; i < 5; ++i)
            if ((top >> i) & 1) chk ^= gen[i];
    }
    return chk;
}

int bech32_charset_index(char c) {
    static const char* charset = "qpzry9x8gf2tvdw0s3jn54khce6mua7l";
    const char* p = std::strchr(charset, c);
    return p && c != '\0' ? static_cast<int>(p - charset) : -1;
}

}  // namespace

bool bech32_valid(std::string_view address) {
    const auto sep = address.rfind('1');
    if (sep == std::string_view::npos || sep == 0 || sep + 7 > address.size()) return false;
    if (address.size() > 90) return false;
    std::vector<std::uint8_t> values;
    values.reserve(address.size() + 8);
    for (std::size_t i = 0; i < sep; ++i) {
        const char c = address[i];
        if (c < 33 || c > 126 || (c >= 'A' && c <= 'Z')) return false;
        values.push_back(static_cast<std::uint8_t>(c >> 5));
    }
    values.push_back(0);
    for (std::size_t i = 0; i < sep; ++i)
        values.push_back(static_cast<std::uint8_t>(address[i] & 0x1f));
    for (std::size_t i = sep + 1; i < address.size(); ++i) {
        const int d = bech32_charset_index(address[i]);
        if (d < 0) return false;
        values.push_back(static_cast<std::uint8_t>(d));
    }
    const std::uint32_t chk = bech32_polymod(values);
    return chk == 1 || chk == 0x2bc830a3;  // bech32 or bech32m
}

}  // namespace moltpipe
