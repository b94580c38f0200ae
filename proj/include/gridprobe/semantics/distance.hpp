#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::semantics {

/// Both metrics assume unit vectors and take values in [0, 2].
enum class DistanceMetric { kCosine, kEuclidean };

std::string_view to_string(DistanceMetric metric);
std::optional<DistanceMetric> parse_distance_metric(std::string_view text);

/// Lower clamp applied to each distance in the dissonance penalty.
inline constexpr double kClampEpsilon = 1e-6;

/// Semantic distance between two unit embeddings. Cosine: 1 - <a,b>, clamped
/// to [0, 2] against rounding. Throws on model or dimension mismatch.
double semantic_distance(const Embedding& a, const Embedding& b, DistanceMetric metric = DistanceMetric::kCosine);

/// Same as semantic_distance on raw vectors of equal length, without checks.
double semantic_distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric);

/// 1/max(d_xz, eps)^2 + 1/max(d_yz, eps)^2.
double dissonance_from_distances(double d_xz, double d_yz) noexcept;

/// Local perceptual dissonance of candidate z between flanking patches x and y.
/// Small when z is far from both.
double dissonance_penalty(const Embedding& x, const Embedding& y, const Embedding& z,
                          DistanceMetric metric = DistanceMetric::kCosine);

}  // namespace gridprobe::semantics
