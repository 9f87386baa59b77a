#pragma once

#include <cstdint>
#include <vector>

namespace betarank {

/// Dense index into a vocabulary of item tokens.
using ItemId = std::uint32_t;

/// Ordered sequence of items (a playlist / interaction sequence).
using Session = std::vector<ItemId>;

/// Fixed context size: 3-item prefix plus the predicted item.
inline constexpr int kWindowSize = 4;

}  // namespace betarank
