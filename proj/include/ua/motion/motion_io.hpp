#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ua/motion/motion.hpp"

namespace ua {

// Motion file:
//   UAMOTION 1 <fps> <num_frames>
//   px py pz qw qx qy qz j0 ... j28      (one line per frame)
// Decimals are written in shortest round-trip form, so write/read is lossless.
void write_motion(std::ostream& out, const MotionSequence& seq);
void write_motion(const std::filesystem::path& path, const MotionSequence& seq);
MotionSequence read_motion(std::istream& in);
MotionSequence read_motion(const std::filesystem::path& path);

// Loads every regular file with extension `ext` in `dir`, sorted by filename.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              std::string_view ext);

namespace text_io {

// Splits on ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view line);
double parse_double(std::string_view token);
long long parse_int(std::string_view token);
// Reads the next non-empty line; false at EOF.
bool next_line(std::istream& in, std::string& line);
// Validates a `<MAGIC> <version> ...` header and returns the remaining fields.
std::vector<std::string> expect_header(std::istream& in, std::string_view magic,
                                       std::string_view version, std::size_t extra_fields);

}  // namespace text_io

}  // namespace ua
