#pragma once

#include <array>
#include <string_view>

namespace moltpipe {

extern const std::array<std::string_view, 2048> kBip39Words;

bool is_bip39_word(std::string_view lowercase_word);

}  // namespace moltpipe
