#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace moltpipe {

// Mod-10 checksum over a digit string (no separators).
bool luhn_valid(std::string_view digits);

// IBAN rearrangement + digit expansion leaves remainder 1 mod 97.
// Expects an uppercase candidate with no separators.
bool iban_checksum_valid(std::string_view iban);
// Country code -> required total length; 0 when unknown.
int iban_country_length(std::string_view country_code);

std::array<std::uint8_t, 32> sha256(std::string_view data);

// Base58Check: decodes, then verifies the 4-byte double-SHA256 checksum.
bool base58check_valid(std::string_view address);

// BIP-173/350 checksum over a "hrp1data" string (bech32 or bech32m).
bool bech32_valid(std::string_view address);

}  // namespace moltpipe
