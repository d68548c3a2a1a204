#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua::cli {
namespace {

const ConfigKey* find_key(std::string_view key) {
  const auto& schema = config_schema();
  auto it = std::find_if(schema.begin(), schema.end(),
                         [&](const ConfigKey& k) { return k.key == key; });
  return it == schema.end() ? nullptr : &*it;
}

const ConfigKey& known(std::string_view key) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return *k;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema{
      {"codec.hidden_channels", "256", "codec channel width"},
      {"codec.kernel_size", "7", "codec convolution kernel"},
      {"codec.downsample", "2", "frames per token (2 or 4)"},
      {"codec.group_norm_groups", "8", "GroupNorm groups"},
      {"train.optimizer", "adam", "adam or sgd"},
      {"train.learning_rate", "0.002", "peak learning rate"},
      {"train.cosine_decay", "true", "cosine learning-rate decay"},
      {"train.steps", "4000", "optimizer steps"},
      {"train.batch_size", "8", "windows per batch"},
      {"train.window", "32", "frames per window"},
      {"train.seed", "0", "initialisation and batch seed"},
      {"causal.hidden", "128", "causal decoder width"},
      {"causal.kernel", "4", "causal kernel (tokens)"},
      {"causal.layers", "3", "causal layers"},
      {"causal.chunk_size", "5", "tokens per streamed chunk"},
      {"causal.steps", "1500", "causal training steps"},
      {"causal.learning_rate", "0.002", "causal learning rate"},
      {"causal.seed", "0", "causal seed"},
      {"gen.order", "4", "n-gram order"},
      {"gen.discount", "0.5", "absolute discount"},
      {"gen.temperature", "1.0", "sampling temperature"},
      {"gen.max_length", "250", "motion tokens per instruction"},
      {"gen.history", "10", "motion tokens carried between instructions"},
      {"gen.seed", "0", "sampling seed"},
      {"stream.bind", "127.0.0.1:8765", "server address"},
      {"stream.queue_chunks", "64", "generation-to-transmission queue bound"},
      {"stream.console", "", "static console directory"},
      {"paths.corpus", "", "motion corpus directory"},
      {"paths.codec", "", "codec or causal decoder file"},
      {"paths.model", "", "n-gram model file"},
      {"paths.vocab", "", "text vocabulary file"},
      {"paths.music_codec", "", "music codec file"},
      {"paths.out", "", "output path"},
  };
  return schema;
}

RunConfig RunConfig::parse(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RunConfig out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError(fmt::format("config key '{}' outside a section", name));
    for (const auto& [key, value] : node) {
      const std::string full = name + "." + key;
      known(full);
      out.values_[full] = value.get_value<std::string>();
    }
  }
  return out;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  return parse(in);
}

bool RunConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string RunConfig::text(std::string_view key) const {
  const ConfigKey& k = known(key);
  auto it = values_.find(key);
  return it == values_.end() ? std::string(k.fallback) : it->second;
}

double RunConfig::number(std::string_view key) const {
  const std::string v = text(key);
  double out = 0.0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size())
    throw ConfigError(fmt::format("config key '{}' needs a number, got '{}'", key, v));
  return out;
}

int RunConfig::integer(std::string_view key) const {
  const std::string v = text(key);
  int out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size())
    throw ConfigError(fmt::format("config key '{}' needs an integer, got '{}'", key, v));
  return out;
}

std::uint64_t RunConfig::seed(std::string_view key) const {
  const std::string v = text(key);
  std::uint64_t out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size())
    throw ConfigError(fmt::format("config key '{}' needs a nonnegative integer, got '{}'", key, v));
  return out;
}

bool RunConfig::flag(std::string_view key) const {
  const std::string v = text(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(fmt::format("config key '{}' needs true or false, got '{}'", key, v));
}

std::string RunConfig::required(std::string_view key) const {
  known(key);
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty())
    throw ConfigError(fmt::format("missing required config key '{}'", key));
  return it->second;
}

void RunConfig::set(std::string_view key, std::string value) {
  known(key);
  values_[std::string(key)] = std::move(value);
}

}  // namespace ua::cli
