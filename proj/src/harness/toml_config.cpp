#include <algorithm>
#include <charconv>
#include <filesystem>
#include <initializer_list>
#include <toml.hpp>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/harness/config.hpp"

namespace gridprobe::harness {

namespace fs = std::filesystem;

namespace {

Error config_error(const std::string& where, const std::string& why) {
  return Error(ErrorCode::kInvalidArgument, where + ": " + why);
}

bool looks_like_credential(std::string_view key) {
  for (std::string_view word : {"key", "token", "secret", "password", "credential"}) {
    if (key.find(word) != std::string_view::npos) return true;
  }
  return false;
}

void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (auto&& [k, v] : t) {
    const std::string_view key = k.str();
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    if (looks_like_credential(key)) {
      throw config_error(where, "'" + std::string(key) +
                                    "' looks like an inline credential; name an environment variable with auth_env");
    }
    throw config_error(where, "unknown key '" + std::string(key) + "'");
  }
}

std::optional<std::string> get_string(const toml::table& t, std::string_view key, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_string()) throw config_error(where, std::string(key) + " must be a string");
  return node->as_string()->get();
}

std::optional<std::int64_t> get_int(const toml::table& t, std::string_view key, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_integer()) throw config_error(where, std::string(key) + " must be an integer");
  return node->as_integer()->get();
}

std::optional<double> get_number(const toml::table& t, std::string_view key, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_integer()) return static_cast<double>(node->as_integer()->get());
  if (node->is_floating_point()) return node->as_floating_point()->get();
  throw config_error(where, std::string(key) + " must be a number");
}

const toml::table* get_table(const toml::table& t, std::string_view key, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw config_error(where, std::string(key) + " must be a table");
  return node->as_table();
}

int get_int_in(const toml::table& t, std::string_view key, const std::string& where, int fallback, int lo, int hi) {
  const auto v = get_int(t, key, where);
  if (!v) return fallback;
  if (*v < lo || *v > hi) {
    throw config_error(where, std::string(key) + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(*v);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::uint64_t parse_seed(const toml::table& t, const std::string& where) {
  const auto* node = t.get("seed");
  if (!node) return 0;
  if (node->is_integer()) {
    const auto v = node->as_integer()->get();
    if (v < 0) throw config_error(where, "seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (node->is_string()) {
    // TOML integers stop at 2^63-1; larger seeds are written as strings.
    const std::string& s = node->as_string()->get();
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && end == s.data() + s.size() && !s.empty()) return v;
  }
  throw config_error(where, "seed must be a non-negative integer or a decimal string");
}

providers::ProviderEndpoint parse_endpoint(const toml::table& t, const std::string& default_name,
                                           const std::string& base_dir, const std::string& where) {
  check_keys(t,
             {"name", "kind", "base_url", "auth_env", "auth_header", "timeout_s", "max_in_flight", "rate_per_minute",
              "retry", "adapter", "fixtures_dir", "scenario", "fixtures"},
             where);
  providers::ProviderEndpoint e;
  e.name = get_string(t, "name", where).value_or(default_name);
  e.kind = get_string(t, "kind", where).value_or("http");
  e.base_url = get_string(t, "base_url", where).value_or("");
  e.auth_env = get_string(t, "auth_env", where).value_or("");
  e.auth_header = get_string(t, "auth_header", where).value_or(e.auth_header);
  e.timeout_s = get_number(t, "timeout_s", where).value_or(e.timeout_s);
  e.max_in_flight = get_int_in(t, "max_in_flight", where, e.max_in_flight, 1, 4096);
  e.rate_per_minute = get_number(t, "rate_per_minute", where).value_or(e.rate_per_minute);

  if (const auto* retry = get_table(t, "retry", where)) {
    const std::string w = where + ".retry";
    check_keys(*retry, {"max_attempts", "backoff_base_ms"}, w);
    e.retry.max_attempts = get_int_in(*retry, "max_attempts", w, e.retry.max_attempts, 1, 100);
    e.retry.backoff_base_ms = get_int_in(*retry, "backoff_base_ms", w, e.retry.backoff_base_ms, 0, 600000);
  }
  if (const auto* adapter = get_table(t, "adapter", where)) {
    const std::string w = where + ".adapter";
    check_keys(*adapter,
               {"path", "request_body", "model", "image_pointer", "text_pointer", "vector_pointer",
                "model_tag_pointer", "id_pointer"},
               w);
    auto& a = e.adapter;
    a.path = get_string(*adapter, "path", w).value_or(a.path);
    a.request_body = get_string(*adapter, "request_body", w).value_or(a.request_body);
    a.model = get_string(*adapter, "model", w).value_or(a.model);
    a.image_pointer = get_string(*adapter, "image_pointer", w).value_or(a.image_pointer);
    a.text_pointer = get_string(*adapter, "text_pointer", w).value_or(a.text_pointer);
    a.vector_pointer = get_string(*adapter, "vector_pointer", w).value_or(a.vector_pointer);
    a.model_tag_pointer = get_string(*adapter, "model_tag_pointer", w).value_or(a.model_tag_pointer);
    a.id_pointer = get_string(*adapter, "id_pointer", w).value_or(a.id_pointer);
  }
  e.fixtures_dir = resolve(base_dir, get_string(t, "fixtures_dir", where).value_or(""));
  e.scenario_path = resolve(base_dir, get_string(t, "scenario", where).value_or(""));
  if (const auto* fixtures = get_table(t, "fixtures", where)) {
    for (auto&& [prompt, path] : *fixtures) {
      if (!path.is_string()) throw config_error(where + ".fixtures", "fixture paths must be strings");
      e.fixtures.emplace(std::string(prompt.str()), path.as_string()->get());
    }
    if (e.fixtures_dir.empty()) e.fixtures_dir = base_dir;
  }
  try {
    e.validate();
  } catch (const Error& err) {
    throw config_error(where, err.what());
  }
  return e;
}

}  // namespace

int CampaignConfig::effective_quorum() const noexcept {
  return judge_quorum > 0 ? judge_quorum : static_cast<int>(judges.size());
}

std::string CampaignConfig::run_dir() const { return (fs::path(output_dir) / run_id).string(); }

void CampaignConfig::validate() const {
  auto fail = [&](const std::string& why) { return config_error(config_path.empty() ? "config" : config_path, why); };
  if (dataset_path.empty()) throw fail("campaign.dataset is required");
  if (templates_path.empty()) throw fail("campaign.templates is required");
  if (pool_path.empty()) throw fail("campaign.pool is required");
  if (run_id.empty() || run_id.find('/') != std::string::npos || run_id.front() == '.') {
    throw fail("campaign.run_id must be a plain directory name");
  }
  if (judges.empty()) throw fail("at least one [[providers.judges]] entry is required");
  if (judge_quorum < 0 || judge_quorum > static_cast<int>(judges.size())) {
    throw fail("judge_quorum must be between 0 and the number of judges");
  }
  for (std::size_t i = 0; i < judges.size(); ++i) {
    for (std::size_t j = i + 1; j < judges.size(); ++j) {
      if (judges[i].name == judges[j].name) throw fail("duplicate judge name '" + judges[i].name + "'");
    }
  }
  embedding.validate();
  if (embedding.kind == semantics::EmbeddingKind::kRemote && !endpoints.count(embedding.endpoint)) {
    throw fail("embedding.endpoint '" + embedding.endpoint + "' is not a configured provider");
  }
  judging.validate();
}

CampaignConfig parse_campaign_config(std::string_view text, const std::string& base_dir, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::kParse, source + " line " + std::to_string(e.source().begin.line) + ": " +
                                       std::string(e.description()));
  }
  check_keys(root, {"campaign", "embedding", "judging", "providers"}, source);

  CampaignConfig c;
  c.config_path = source;
  c.config_hash = sha256_hex(text);

  const auto* campaign = get_table(root, "campaign", source);
  if (!campaign) throw config_error(source, "missing [campaign] table");
  {
    const std::string w = source + " [campaign]";
    check_keys(*campaign,
               {"dataset", "templates", "pool", "strategy", "seed", "workers", "judge_quorum", "distance", "gutter_px",
                "distinct_threshold", "output_dir", "run_id"},
               w);
    c.dataset_path = resolve(base_dir, get_string(*campaign, "dataset", w).value_or(""));
    c.templates_path = resolve(base_dir, get_string(*campaign, "templates", w).value_or(""));
    c.pool_path = resolve(base_dir, get_string(*campaign, "pool", w).value_or(""));
    if (auto s = get_string(*campaign, "strategy", w)) {
      auto parsed = midos::parse_strategy(*s);
      if (!parsed) throw config_error(w, "strategy must be midos or random");
      c.strategy = *parsed;
    }
    c.seed = parse_seed(*campaign, w);
    c.workers = get_int_in(*campaign, "workers", w, 1, 1, 256);
    c.judge_quorum = get_int_in(*campaign, "judge_quorum", w, 0, 0, 64);
    if (auto d = get_string(*campaign, "distance", w)) {
      auto parsed = semantics::parse_distance_metric(*d);
      if (!parsed) throw config_error(w, "distance must be cosine or euclidean");
      c.metric = *parsed;
    }
    c.gutter_px = get_int_in(*campaign, "gutter_px", w, 0, 0, 4096);
    c.distinct_threshold = get_int_in(*campaign, "distinct_threshold", w, 10, 1, 64);
    c.output_dir = resolve(base_dir, get_string(*campaign, "output_dir", w).value_or("runs"));
    c.run_id = get_string(*campaign, "run_id", w).value_or("run");
  }

  if (const auto* embedding = get_table(root, "embedding", source)) {
    const std::string w = source + " [embedding]";
    check_keys(*embedding, {"kind", "store", "endpoint", "dim"}, w);
    if (auto k = get_string(*embedding, "kind", w)) {
      auto parsed = semantics::parse_embedding_kind(*k);
      if (!parsed) throw config_error(w, "kind must be histogram, file or remote");
      c.embedding.kind = *parsed;
    }
    c.embedding.store_path = resolve(base_dir, get_string(*embedding, "store", w).value_or(""));
    c.embedding.endpoint = get_string(*embedding, "endpoint", w).value_or("");
    if (auto dim = get_int(*embedding, "dim", w)) {
      if (*dim < 1) throw config_error(w, "dim must be positive");
      c.embedding_dim = static_cast<std::size_t>(*dim);
    }
  }

  if (const auto* judging = get_table(root, "judging", source)) {
    const std::string w = source + " [judging]";
    check_keys(*judging, {"template"}, w);
    if (auto text_value = get_string(*judging, "template", w)) c.judging.text = *text_value;
  }

  const auto* providers_table = get_table(root, "providers", source);
  if (!providers_table) throw config_error(source, "missing [providers] table");
  for (auto&& [k, node] : *providers_table) {
    const std::string key(k.str());
    const std::string w = source + " [providers." + key + "]";
    if (key == "judges") {
      const auto* list = node.as_array();
      if (!list || !list->is_array_of_tables()) throw config_error(w, "use [[providers.judges]] tables");
      std::size_t index = 0;
      for (const auto& judge : *list) {
        ++index;
        c.judges.push_back(parse_endpoint(*judge.as_table(), "judge-" + std::to_string(index), base_dir,
                                          w + "[" + std::to_string(index) + "]"));
      }
      continue;
    }
    if (!node.is_table()) throw config_error(w, "must be a table");
    auto endpoint = parse_endpoint(*node.as_table(), key, base_dir, w);
    if (key == "guidance") {
      c.guidance = std::move(endpoint);
    } else if (key == "target") {
      c.target = std::move(endpoint);
    } else {
      c.endpoints.emplace(key, std::move(endpoint));
    }
  }
  if (c.target.name.empty()) throw config_error(source, "missing [providers.target]");

  c.validate();
  return c;
}

CampaignConfig load_campaign_config(const std::string& path) {
  const std::string text = read_file_text(path);
  return parse_campaign_config(text, fs::path(path).parent_path().string(), path);
}

}  // namespace gridprobe::harness
