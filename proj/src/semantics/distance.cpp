#include "gridprobe/semantics/distance.hpp"

#include <algorithm>
#include <cmath>

namespace gridprobe::semantics {

std::string_view to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::kCosine: return "cosine";
    case DistanceMetric::kEuclidean: return "euclidean";
  }
  return "?";
}

std::optional<DistanceMetric> parse_distance_metric(std::string_view text) {
  if (text == "cosine") return DistanceMetric::kCosine;
  if (text == "euclidean") return DistanceMetric::kEuclidean;
  return std::nullopt;
}

double semantic_distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  if (metric == DistanceMetric::kCosine) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::clamp(1.0 - dot, 0.0, 2.0);
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::min(std::sqrt(sq), 2.0);
}

double semantic_distance(const Embedding& a, const Embedding& b, DistanceMetric metric) {
  require_compatible(a, b);
  return semantic_distance(std::span<const double>(a.v), std::span<const double>(b.v), metric);
}

double dissonance_from_distances(double d_xz, double d_yz) noexcept {
  const double a = std::max(d_xz, kClampEpsilon);
  const double b = std::max(d_yz, kClampEpsilon);
  return 1.0 / (a * a) + 1.0 / (b * b);
}

double dissonance_penalty(const Embedding& x, const Embedding& y, const Embedding& z, DistanceMetric metric) {
  require_compatible(x, y);
  return dissonance_from_distances(semantic_distance(x, z, metric), semantic_distance(y, z, metric));
}

}  // namespace gridprobe::semantics
