#pragma once

#include <string_view>

namespace shapeseq {

/// Symbols in alignment-alphabet order: six angle letters, then three sizes.
inline constexpr std::string_view kAlphabet = "ABCDEFSML";
inline constexpr std::string_view kAngleSymbols = "ABCDEF";
inline constexpr std::string_view kSizeSymbols = "SML";

} // namespace shapeseq
