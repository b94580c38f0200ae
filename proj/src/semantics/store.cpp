#include "gridprobe/semantics/store.hpp"

#include <json.hpp>
#include <sstream>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"

namespace gridprobe::semantics {

using nlohmann::json;

EmbeddingStore::EmbeddingStore(std::string model_tag, std::size_t dim) : model_tag_(std::move(model_tag)), dim_(dim) {
  if (model_tag_.empty()) throw Error(ErrorCode::kInvalidArgument, "embedding store needs a model tag");
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding store dimension must be positive");
}

void EmbeddingStore::insert(Embedding e) {
  if (e.model_tag.empty()) e.model_tag = model_tag_;
  if (e.model_tag != model_tag_) {
    throw Error(ErrorCode::kModelMismatch,
                "entry '" + e.id + "' has model tag '" + e.model_tag + "', store holds '" + model_tag_ + "'");
  }
  if (e.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "entry '" + e.id + "' has dim " + std::to_string(e.dim()) +
                                                   ", store dim is " + std::to_string(dim_));
  }
  validate_embedding(e);
  auto id = e.id;
  if (!entries_.emplace(id, std::move(e)).second) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id '" + id + "'");
  }
}

const Embedding* EmbeddingStore::find(std::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const Embedding& EmbeddingStore::at(std::string_view id) const {
  if (const auto* e = find(id)) return *e;
  throw Error(ErrorCode::kIdNotFound, "no embedding for id '" + std::string(id) + "'");
}

void EmbeddingStore::merge(const EmbeddingStore& other) {
  if (other.model_tag_ != model_tag_) {
    throw Error(ErrorCode::kModelMismatch,
                "cannot merge store '" + other.model_tag_ + "' into store '" + model_tag_ + "'");
  }
  for (const auto& [id, e] : other.entries_) insert(e);
}

std::string serialize_store(const EmbeddingStore& store) {
  std::string out = json{{"model_tag", store.model_tag()}, {"dim", store.dim()}}.dump();
  out.push_back('\n');
  for (const auto& [id, e] : store.entries()) {
    out += json{{"id", id}, {"v", e.v}}.dump();
    out.push_back('\n');
  }
  return out;
}

EmbeddingStore parse_store(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kParse, "embedding store line " + std::to_string(line_no) + ": " + why);
  };

  std::optional<EmbeddingStore> store;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(e.what());
    }
    if (!store) {
      if (!record.contains("model_tag") || !record["model_tag"].is_string() || !record.contains("dim") ||
          !record["dim"].is_number_unsigned()) {
        throw fail("expected header {\"model_tag\": str, \"dim\": int}");
      }
      store.emplace(record["model_tag"].get<std::string>(), record["dim"].get<std::size_t>());
      continue;
    }
    if (!record.contains("id") || !record["id"].is_string() || !record.contains("v") || !record["v"].is_array()) {
      throw fail("expected entry {\"id\": str, \"v\": [float, ...]}");
    }
    Embedding e{record["id"].get<std::string>(), store->model_tag(), {}};
    for (const auto& x : record["v"]) {
      if (!x.is_number()) throw fail("entry '" + e.id + "' has a non-numeric component");
      e.v.push_back(x.get<double>());
    }
    try {
      store->insert(std::move(e));
    } catch (const Error& err) {
      throw Error(err.code(), "embedding store line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  if (!store) throw Error(ErrorCode::kParse, "embedding store is missing its header line");
  return std::move(*store);
}

void store_write(const EmbeddingStore& store, const std::string& path) {
  write_file_text(path, serialize_store(store));
}

EmbeddingStore store_read(const std::string& path) { return parse_store(read_file_text(path)); }

StoreEmbedder::StoreEmbedder(std::shared_ptr<const EmbeddingStore> store, std::shared_ptr<const Embedder> fallback)
    : store_(std::move(store)), fallback_(std::move(fallback)) {
  if (!store_) throw Error(ErrorCode::kProviderUnavailable, "file embedding provider has no store");
  if (fallback_ && fallback_->model_tag() != store_->model_tag()) {
    throw Error(ErrorCode::kModelMismatch, "fallback embedder '" + fallback_->model_tag() +
                                               "' does not match store model '" + store_->model_tag() + "'");
  }
}

Embedding StoreEmbedder::embed(const imaging::RasterImage& img, std::string_view id) const {
  if (const auto* e = store_->find(id)) return normalized(*e);
  if (fallback_) {
    Embedding e = fallback_->embed(img, id);
    if (e.dim() != store_->dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "computed embedding for '" + std::string(id) + "' has dim " +
                                                     std::to_string(e.dim()) + ", store dim is " +
                                                     std::to_string(store_->dim()));
    }
    return normalized(std::move(e));
  }
  throw Error(ErrorCode::kIdNotFound, "no embedding for id '" + std::string(id) + "' in store");
}

}  // namespace gridprobe::semantics
