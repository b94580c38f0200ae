#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridprobe/imaging/raster.hpp"

namespace gridprobe::semantics {

struct Embedding {
  std::string id;
  std::string model_tag;
  std::vector<double> v;

  std::size_t dim() const noexcept { return v.size(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// Throws Error(kInvalidArgument) when the vector is empty or holds NaN/Inf.
void validate_embedding(const Embedding& e);

/// Unit-length copy. Vectors already within 1e-12 of unit norm come back
/// unchanged, so normalizing twice is bit-stable. Throws on zero norm or
/// non-finite entries.
Embedding normalized(Embedding e);

/// Throws Error(kModelMismatch / kDimensionMismatch) when a and b cannot be compared.
void require_compatible(const Embedding& a, const Embedding& b);

/// Source of embeddings for images. Implementations must be safe to call
/// concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string model_tag() const = 0;
  /// `id` names the image for lookup-based providers and is copied into the result.
  virtual Embedding embed(const imaging::RasterImage& img, std::string_view id) const = 0;
};

enum class EmbeddingKind { kHistogram, kFile, kRemote };

std::string_view to_string(EmbeddingKind kind);
std::optional<EmbeddingKind> parse_embedding_kind(std::string_view text);

/// Which embedder a run uses. Exactly one kind is active.
struct EmbeddingProviderSpec {
  EmbeddingKind kind = EmbeddingKind::kHistogram;
  /// kFile: path of the precomputed store.
  std::string store_path;
  /// kRemote: name of the endpoint in the provider configuration.
  std::string endpoint;

  /// Throws Error(kInvalidArgument) when the kind-specific parameter is missing.
  void validate() const;
};

}  // namespace gridprobe::semantics
