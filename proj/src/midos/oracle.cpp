#include "gridprobe/midos/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "gridprobe/common/error.hpp"

namespace gridprobe::midos {

namespace {

// Written independently of semantics/distance.cpp; the arithmetic order is the
// natural one (index-ascending accumulation), which both sides follow.
double reference_distance(const std::vector<double>& a, const std::vector<double>& b,
                          semantics::DistanceMetric metric) {
  if (metric == semantics::DistanceMetric::kCosine) {
    double inner = 0.0;
    for (std::size_t i = 0; i != a.size(); ++i) inner += a[i] * b[i];
    double d = 1.0 - inner;
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i != a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  double d = std::sqrt(acc);
  return d > 2.0 ? 2.0 : d;
}

double reference_penalty(double d1, double d2) {
  if (d1 < semantics::kClampEpsilon) d1 = semantics::kClampEpsilon;
  if (d2 < semantics::kClampEpsilon) d2 = semantics::kClampEpsilon;
  return 1.0 / (d1 * d1) + 1.0 / (d2 * d2);
}

}  // namespace

SelectionResult oracle_select(const SelectionContext& ctx) {
  if (ctx.pool.size() > kOracleMaxPool) {
    throw Error(ErrorCode::kPoolTooLarge, "oracle accepts at most 64 candidates, got " +
                                              std::to_string(ctx.pool.size()));
  }
  ctx.validate();

  std::map<std::string, const semantics::Embedding*> remaining;
  for (const auto& n : ctx.pool) remaining.emplace(n.id, &n);

  SelectionResult result;
  result.strategy = Strategy::kMidos;
  for (std::size_t slot = 0; slot < kSlots; ++slot) {
    // (sort key, id, raw objective); argmax is expressed as ascending -value.
    std::vector<std::tuple<double, std::string, double>> ranked;
    for (const auto& [id, n] : remaining) {
      double objective;
      if (slot == 0) {
        objective = reference_distance(ctx.guidance.v, n->v, ctx.metric);
        ranked.emplace_back(-objective, id, objective);
      } else {
        const auto& x = ctx.corners[kFlankingCorners[slot][0]].v;
        const auto& y = ctx.corners[kFlankingCorners[slot][1]].v;
        objective = reference_penalty(reference_distance(x, n->v, ctx.metric), reference_distance(y, n->v, ctx.metric));
        ranked.emplace_back(objective, id, objective);
      }
    }
    std::sort(ranked.begin(), ranked.end());
    SlotScore score;
    score.slot = static_cast<int>(slot) + 1;
    score.chosen_id = std::get<1>(ranked[0]);
    score.objective_value = std::get<2>(ranked[0]);
    if (ranked.size() > 1) {
      score.runner_up_id = std::get<1>(ranked[1]);
      score.runner_up_value = std::get<2>(ranked[1]);
    }
    result.ids[slot] = score.chosen_id;
    remaining.erase(score.chosen_id);
    result.scores[slot] = std::move(score);
  }
  return result;
}

}  // namespace gridprobe::midos
