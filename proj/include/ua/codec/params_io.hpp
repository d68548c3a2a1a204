#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ua/codec/codec.hpp"

namespace ua {

// Parameter file container:
//   UACODEC 1\n
//   config key=value key=value ...\n
//   tensors <count>\n
//   per tensor: uint32 rows, uint32 cols, rows*cols float32 (column-major)
//   uint64 FNV-1a of every preceding byte
// All binary fields are little-endian.
struct ParamContainer {
  std::map<std::string, std::string> config;
  std::vector<nn::Mat> tensors;
};

void write_container(std::ostream& out, const ParamContainer& container);
// Throws ParseError on a bad magic, truncated data or checksum mismatch.
ParamContainer read_container(std::istream& in);

void save_codec(std::ostream& out, const CodecParams& params);
void save_codec(const std::filesystem::path& path, const CodecParams& params);
CodecParams load_codec(std::istream& in);
CodecParams load_codec(const std::filesystem::path& path);

// Config block helpers shared with other parameter files.
std::string config_get(const ParamContainer& c, const std::string& key);
int config_int(const ParamContainer& c, const std::string& key);

}  // namespace ua
