#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gridprobe/semantics/distance.hpp"
#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::midos {

enum class Strategy { kMidos, kRandom };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

inline constexpr std::size_t kSlots = 5;

/// Corner pairs flanking each edge slot, as indices into SelectionContext::corners
/// (0=f_a at a11, 1=f_b at a13, 2=f_c at a31, 3=f_d at a33). Slot 0 is the centre.
inline constexpr std::array<std::array<std::size_t, 2>, kSlots> kFlankingCorners = {
    {{0, 0}, {0, 1}, {1, 3}, {2, 3}, {0, 2}}};

struct SlotScore {
  int slot = 0;  // 1-based: n1..n5
  std::string chosen_id;
  std::optional<double> objective_value;
  std::optional<std::string> runner_up_id;
  std::optional<double> runner_up_value;

  friend bool operator==(const SlotScore&, const SlotScore&) = default;
};

struct SelectionResult {
  /// ids[k] is n_{k+1}; its grid cell is imaging::kNeutralSlotCells[k].
  std::array<std::string, kSlots> ids;
  std::array<SlotScore, kSlots> scores;
  Strategy strategy = Strategy::kMidos;
  std::optional<std::uint64_t> seed;  // random strategy only

  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

struct SelectionContext {
  semantics::Embedding guidance;                 // whole guidance image
  std::array<semantics::Embedding, 4> corners;   // f_a, f_b, f_c, f_d after shuffling
  std::vector<semantics::Embedding> pool;        // neutral candidates
  semantics::DistanceMetric metric = semantics::DistanceMetric::kCosine;

  /// Throws on pool < 5 (kPoolTooSmall), duplicate ids, incompatible or
  /// non-unit embeddings.
  void validate() const;
};

/// Greedy selection: n1 maximizes distance to the guidance image; n2..n5 each
/// minimize the dissonance penalty against their flanking corner pair, drawing
/// without replacement. Ties go to the lexicographically smallest id.
SelectionResult select_midos(const SelectionContext& ctx);

/// Five distinct ids uniformly without replacement (partial Fisher-Yates over
/// the sorted ids, SplitMix64). Input order does not matter.
SelectionResult select_random(std::vector<std::string> pool_ids, std::uint64_t seed);

nlohmann::json to_json(const SelectionResult& result);
SelectionResult selection_from_json(const nlohmann::json& j);

/// Human-readable score table.
std::string format_selection_table(const SelectionResult& result);

}  // namespace gridprobe::midos
