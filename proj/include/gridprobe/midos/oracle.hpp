#pragma once

#include "gridprobe/midos/selection.hpp"

namespace gridprobe::midos {

inline constexpr std::size_t kOracleMaxPool = 64;

/// Reference implementation for verification: every step ranks the full
/// remaining set by (objective, id) with its own distance arithmetic and takes
/// the head. Shares no code with select_midos beyond the data types.
/// Throws Error(kPoolTooLarge) above kOracleMaxPool candidates.
SelectionResult oracle_select(const SelectionContext& ctx);

}  // namespace gridprobe::midos
