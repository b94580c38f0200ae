#include "gridprobe/midos/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/imaging/grid.hpp"

namespace gridprobe::midos {

using semantics::Embedding;

namespace {

constexpr double kUnitTolerance = 1e-9;

void require_unit(const Embedding& e) {
  double sq = 0.0;
  for (double x : e.v) sq += x * x;
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "embedding '" + e.id + "' is not unit length");
  }
}

struct Candidate {
  const Embedding* embedding;
  double value;
};

// Best and runner-up of `candidates` (already in ascending id order) under
// `better`; equal values keep the earlier, i.e. smaller, id.
template <class Better>
SlotScore pick(int slot, const std::vector<Candidate>& candidates, Better better) {
  const Candidate* best = nullptr;
  const Candidate* second = nullptr;
  for (const auto& c : candidates) {
    if (!best || better(c.value, best->value)) {
      second = best;
      best = &c;
    } else if (!second || better(c.value, second->value)) {
      second = &c;
    }
  }
  SlotScore score{slot, best->embedding->id, best->value, std::nullopt, std::nullopt};
  if (second) {
    score.runner_up_id = second->embedding->id;
    score.runner_up_value = second->value;
  }
  return score;
}

}  // namespace

std::string_view to_string(Strategy s) { return s == Strategy::kMidos ? "midos" : "random"; }

std::optional<Strategy> parse_strategy(std::string_view text) {
  if (text == "midos") return Strategy::kMidos;
  if (text == "random") return Strategy::kRandom;
  return std::nullopt;
}

void SelectionContext::validate() const {
  if (pool.size() < kSlots) {
    throw Error(ErrorCode::kPoolTooSmall,
                "neutral pool has " + std::to_string(pool.size()) + " images, at least 5 are required");
  }
  require_unit(guidance);
  for (const auto& c : corners) {
    semantics::require_compatible(guidance, c);
    require_unit(c);
  }
  std::set<std::string_view> ids;
  for (const auto& n : pool) {
    semantics::require_compatible(guidance, n);
    require_unit(n);
    if (!ids.insert(n.id).second) throw Error(ErrorCode::kDuplicateId, "neutral pool lists '" + n.id + "' twice");
  }
}

SelectionResult select_midos(const SelectionContext& ctx) {
  ctx.validate();
  std::vector<const Embedding*> remaining;
  remaining.reserve(ctx.pool.size());
  for (const auto& n : ctx.pool) remaining.push_back(&n);
  std::sort(remaining.begin(), remaining.end(), [](auto* a, auto* b) { return a->id < b->id; });

  SelectionResult result;
  result.strategy = Strategy::kMidos;
  std::vector<Candidate> candidates;

  for (std::size_t slot = 0; slot < kSlots; ++slot) {
    candidates.clear();
    for (const auto* n : remaining) {
      double value;
      if (slot == 0) {
        value = semantics::semantic_distance(ctx.guidance.v, n->v, ctx.metric);
      } else {
        const auto& x = ctx.corners[kFlankingCorners[slot][0]];
        const auto& y = ctx.corners[kFlankingCorners[slot][1]];
        value = semantics::dissonance_from_distances(semantics::semantic_distance(x.v, n->v, ctx.metric),
                                                     semantics::semantic_distance(y.v, n->v, ctx.metric));
      }
      candidates.push_back({n, value});
    }
    const int slot_no = static_cast<int>(slot) + 1;
    SlotScore score = slot == 0 ? pick(slot_no, candidates, [](double a, double b) { return a > b; })
                                : pick(slot_no, candidates, [](double a, double b) { return a < b; });
    result.ids[slot] = score.chosen_id;
    std::erase_if(remaining, [&](const Embedding* e) { return e->id == score.chosen_id; });
    result.scores[slot] = std::move(score);
  }
  return result;
}

SelectionResult select_random(std::vector<std::string> pool_ids, std::uint64_t seed) {
  std::sort(pool_ids.begin(), pool_ids.end());
  if (auto dup = std::adjacent_find(pool_ids.begin(), pool_ids.end()); dup != pool_ids.end()) {
    throw Error(ErrorCode::kDuplicateId, "neutral pool lists '" + *dup + "' twice");
  }
  if (pool_ids.size() < kSlots) {
    throw Error(ErrorCode::kPoolTooSmall,
                "neutral pool has " + std::to_string(pool_ids.size()) + " images, at least 5 are required");
  }
  SplitMix64 rng(seed);
  SelectionResult result;
  result.strategy = Strategy::kRandom;
  result.seed = seed;
  for (std::size_t slot = 0; slot < kSlots; ++slot) {
    const auto j = slot + static_cast<std::size_t>(rng.below(pool_ids.size() - slot));
    std::swap(pool_ids[slot], pool_ids[j]);
    result.ids[slot] = pool_ids[slot];
    result.scores[slot] = SlotScore{static_cast<int>(slot) + 1, pool_ids[slot], std::nullopt, std::nullopt,
                                    std::nullopt};
  }
  return result;
}

nlohmann::json to_json(const SelectionResult& result) {
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t k = 0; k < kSlots; ++k) {
    const auto& s = result.scores[k];
    nlohmann::json row{{"slot", s.slot}, {"cell", imaging::kNeutralSlotCells[k].label()}, {"id", s.chosen_id}};
    row["objective"] = s.objective_value ? nlohmann::json(*s.objective_value) : nlohmann::json(nullptr);
    row["runner_up_id"] = s.runner_up_id ? nlohmann::json(*s.runner_up_id) : nlohmann::json(nullptr);
    row["runner_up_objective"] = s.runner_up_value ? nlohmann::json(*s.runner_up_value) : nlohmann::json(nullptr);
    slots.push_back(std::move(row));
  }
  nlohmann::json j{{"strategy", to_string(result.strategy)}, {"slots", std::move(slots)}};
  j["seed"] = result.seed ? nlohmann::json(*result.seed) : nlohmann::json(nullptr);
  return j;
}

SelectionResult selection_from_json(const nlohmann::json& j) {
  SelectionResult r;
  const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (!strategy) throw Error(ErrorCode::kParse, "unknown selection strategy");
  r.strategy = *strategy;
  if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  const auto& slots = j.at("slots");
  if (!slots.is_array() || slots.size() != kSlots) throw Error(ErrorCode::kParse, "selection needs five slots");
  for (std::size_t k = 0; k < kSlots; ++k) {
    const auto& row = slots[k];
    SlotScore s;
    s.slot = row.at("slot").get<int>();
    s.chosen_id = row.at("id").get<std::string>();
    if (!row.at("objective").is_null()) s.objective_value = row.at("objective").get<double>();
    if (!row.at("runner_up_id").is_null()) s.runner_up_id = row.at("runner_up_id").get<std::string>();
    if (!row.at("runner_up_objective").is_null()) s.runner_up_value = row.at("runner_up_objective").get<double>();
    r.ids[k] = s.chosen_id;
    r.scores[k] = std::move(s);
  }
  return r;
}

std::string format_selection_table(const SelectionResult& result) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "strategy: %s", std::string(to_string(result.strategy)).c_str());
  out += line;
  if (result.seed) out += " (seed " + std::to_string(*result.seed) + ")";
  out += "\nslot cell id                   objective        runner-up            margin\n";
  for (std::size_t k = 0; k < kSlots; ++k) {
    const auto& s = result.scores[k];
    const std::string cell = imaging::kNeutralSlotCells[k].label();
    std::string objective = s.objective_value ? std::to_string(*s.objective_value) : "-";
    std::string runner = s.runner_up_id.value_or("-");
    std::string margin = (s.objective_value && s.runner_up_value)
                             ? std::to_string(std::abs(*s.runner_up_value - *s.objective_value))
                             : "-";
    std::snprintf(line, sizeof line, "n%-3d %-4s %-20s %-16s %-20s %s\n", s.slot, cell.c_str(), s.chosen_id.c_str(),
                  objective.c_str(), runner.c_str(), margin.c_str());
    out += line;
  }
  return out;
}

}  // namespace gridprobe::midos
