#include "ua/codec/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ua/common/checksum.hpp"
#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

static_assert(std::endian::native == std::endian::little, "parameter files assume little-endian");

namespace {

constexpr std::string_view kMagic = "UACODEC 1";

template <class T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <class T>
T take(std::string_view data, std::size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw ParseError("parameter file truncated");
  T value;
  std::memcpy(&value, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::string_view take_line(std::string_view data, std::size_t& pos) {
  const std::size_t end = data.find('\n', pos);
  if (end == std::string_view::npos) throw ParseError("parameter file truncated in header");
  std::string_view line = data.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

std::string levels_string(const Levels& levels) {
  return fmt::format("{}", fmt::join(levels, ","));
}

Levels parse_levels(const std::string& s) {
  Levels out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    out.push_back(static_cast<int>(text_io::parse_int(std::string_view(s).substr(start, comma - start))));
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_container(std::ostream& out, const ParamContainer& container) {
  std::string buf(kMagic);
  buf += "\nconfig";
  for (const auto& [key, value] : container.config) {
    if (key.find_first_of(" =\n") != std::string::npos ||
        value.find_first_of(" \n") != std::string::npos) {
      throw ConfigError(fmt::format("config entry '{}' cannot be serialized", key));
    }
    buf += fmt::format(" {}={}", key, value);
  }
  buf += fmt::format("\ntensors {}\n", container.tensors.size());
  for (const nn::Mat& t : container.tensors) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.rows()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index i = 0; i < t.size(); ++i) put<float>(buf, static_cast<float>(t.data()[i]));
  }
  Fnv1a64 hash;
  hash.update(buf);
  put<std::uint64_t>(buf, hash.digest());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("failed to write parameter file");
}

ParamContainer read_container(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (take_line(data, pos) != kMagic) throw ParseError("not a UACODEC 1 parameter file");

  ParamContainer c;
  auto fields = text_io::split_ws(take_line(data, pos));
  if (fields.empty() || fields[0] != "config") throw ParseError("missing config line");
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const std::size_t eq = fields[i].find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed config entry");
    c.config.emplace(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
  }
  auto count_line = text_io::split_ws(take_line(data, pos));
  if (count_line.size() != 2 || count_line[0] != "tensors") throw ParseError("missing tensor count");
  const long long count = text_io::parse_int(count_line[1]);
  if (count < 0) throw ParseError("negative tensor count");
  for (long long k = 0; k < count; ++k) {
    const auto rows = take<std::uint32_t>(data, pos);
    const auto cols = take<std::uint32_t>(data, pos);
    nn::Mat t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = take<float>(data, pos);
    c.tensors.push_back(std::move(t));
  }
  const std::size_t body = pos;
  const auto stored = take<std::uint64_t>(data, pos);
  if (pos != data.size()) throw ParseError("trailing bytes after parameter checksum");
  Fnv1a64 hash;
  hash.update(std::string_view(data).substr(0, body));
  if (hash.digest() != stored) throw ParseError("parameter file checksum mismatch");
  return c;
}

std::string config_get(const ParamContainer& c, const std::string& key) {
  auto it = c.config.find(key);
  if (it == c.config.end()) throw ParseError(fmt::format("parameter file lacks '{}'", key));
  return it->second;
}

int config_int(const ParamContainer& c, const std::string& key) {
  return static_cast<int>(text_io::parse_int(config_get(c, key)));
}

void save_codec(std::ostream& out, const CodecParams& params) {
  const CodecConfig& cfg = params.config;
  ParamContainer c;
  c.config = {
      {"causal", "0"},
      {"levels", levels_string(cfg.levels)},
      {"input_dim", std::to_string(cfg.input_dim)},
      {"hidden_channels", std::to_string(cfg.hidden_channels)},
      {"kernel_size", std::to_string(cfg.kernel_size)},
      {"downsample", std::to_string(cfg.downsample)},
      {"group_norm_groups", std::to_string(cfg.group_norm_groups)},
      {"expansion", std::to_string(cfg.expansion)},
      {"residual_kernel", std::to_string(cfg.residual_kernel)},
      {"use_norm", cfg.use_norm ? "1" : "0"},
      {"activation", cfg.activation == nn::Activation::kGelu ? "gelu" : "identity"},
      {"trained", params.trained ? "1" : "0"},
  };
  for (const nn::Mat* t : params.tensors()) c.tensors.push_back(*t);
  write_container(out, c);
}

void save_codec(const std::filesystem::path& path, const CodecParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  save_codec(out, params);
}

CodecParams load_codec(std::istream& in) {
  const ParamContainer c = read_container(in);
  if (config_get(c, "causal") != "0") throw ParseError("file holds a causal decoder, not a codec");
  CodecConfig cfg;
  cfg.levels = parse_levels(config_get(c, "levels"));
  cfg.input_dim = config_int(c, "input_dim");
  cfg.hidden_channels = config_int(c, "hidden_channels");
  cfg.kernel_size = config_int(c, "kernel_size");
  cfg.downsample = config_int(c, "downsample");
  cfg.group_norm_groups = config_int(c, "group_norm_groups");
  cfg.expansion = config_int(c, "expansion");
  cfg.residual_kernel = config_int(c, "residual_kernel");
  cfg.use_norm = config_get(c, "use_norm") == "1";
  const std::string act = config_get(c, "activation");
  if (act != "gelu" && act != "identity") throw ParseError("unknown activation " + act);
  cfg.activation = act == "gelu" ? nn::Activation::kGelu : nn::Activation::kIdentity;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("invalid codec config: ") + e.what());
  }
  CodecParams p = init_codec(cfg, 0);
  p.trained = config_get(c, "trained") == "1";
  std::vector<nn::Mat*> dst = p.tensors();
  if (dst.size() != c.tensors.size()) {
    throw ParseError(fmt::format("expected {} tensors, file has {}", dst.size(), c.tensors.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->rows() != c.tensors[i].rows() || dst[i]->cols() != c.tensors[i].cols()) {
      throw ParseError(fmt::format("tensor {} has the wrong shape", i));
    }
    *dst[i] = c.tensors[i];
  }
  return p;
}

CodecParams load_codec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return load_codec(in);
}

}  // namespace ua
