#include "gridprobe/semantics/embedding.hpp"

#include <cmath>

#include "gridprobe/common/error.hpp"

namespace gridprobe::semantics {

void validate_embedding(const Embedding& e) {
  if (e.v.empty()) throw Error(ErrorCode::kInvalidArgument, "embedding '" + e.id + "' is empty");
  for (double x : e.v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "embedding '" + e.id + "' has non-finite entries");
  }
}

Embedding normalized(Embedding e) {
  validate_embedding(e);
  double sq = 0.0;
  for (double x : e.v) sq += x * x;
  if (std::fabs(sq - 1.0) <= 1e-12) return e;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kInvalidArgument, "embedding '" + e.id + "' cannot be normalized");
  }
  for (double& x : e.v) x /= norm;
  return e;
}

void require_compatible(const Embedding& a, const Embedding& b) {
  if (a.model_tag != b.model_tag) {
    throw Error(ErrorCode::kModelMismatch,
                "embeddings '" + a.id + "' (" + a.model_tag + ") and '" + b.id + "' (" + b.model_tag +
                    ") come from different models");
  }
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "embeddings '" + a.id + "' and '" + b.id + "' differ in dimension (" +
                                                   std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

std::string_view to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kHistogram: return "histogram";
    case EmbeddingKind::kFile: return "file";
    case EmbeddingKind::kRemote: return "remote";
  }
  return "?";
}

std::optional<EmbeddingKind> parse_embedding_kind(std::string_view text) {
  for (auto k : {EmbeddingKind::kHistogram, EmbeddingKind::kFile, EmbeddingKind::kRemote}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void EmbeddingProviderSpec::validate() const {
  if (kind == EmbeddingKind::kFile && store_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "file embedding provider needs a store path");
  }
  if (kind == EmbeddingKind::kRemote && endpoint.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "remote embedding provider needs an endpoint");
  }
}

}  // namespace gridprobe::semantics
