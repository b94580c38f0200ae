#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::semantics {

/// Embeddings from a single model, keyed by image id.
class EmbeddingStore {
 public:
  using Entries = std::map<std::string, Embedding, std::less<>>;

  EmbeddingStore(std::string model_tag, std::size_t dim);

  const std::string& model_tag() const noexcept { return model_tag_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Entries& entries() const noexcept { return entries_; }

  /// Adds e, stamping the store's model tag when e has none. Throws on
  /// duplicate id, tag conflict, wrong dimension or non-finite values.
  void insert(Embedding e);
  const Embedding* find(std::string_view id) const;
  /// Throws Error(kIdNotFound).
  const Embedding& at(std::string_view id) const;
  /// Throws Error(kModelMismatch) when the tags differ.
  void merge(const EmbeddingStore& other);

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::string model_tag_;
  std::size_t dim_;
  Entries entries_;
};

// Line-delimited JSON: a {"model_tag", "dim"} header line, then one
// {"id", "v"} line per entry in id order. Doubles are written in shortest
// round-trip form, so read(write(s)) == s bit-for-bit.
std::string serialize_store(const EmbeddingStore& store);
EmbeddingStore parse_store(std::string_view text);
void store_write(const EmbeddingStore& store, const std::string& path);
EmbeddingStore store_read(const std::string& path);

/// Looks ids up in a store. Misses fall back to `fallback` when given, which
/// must produce the same model tag as the store.
class StoreEmbedder final : public Embedder {
 public:
  explicit StoreEmbedder(std::shared_ptr<const EmbeddingStore> store,
                         std::shared_ptr<const Embedder> fallback = nullptr);

  std::string model_tag() const override { return store_->model_tag(); }
  Embedding embed(const imaging::RasterImage& img, std::string_view id) const override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
  std::shared_ptr<const Embedder> fallback_;
};

}  // namespace gridprobe::semantics
