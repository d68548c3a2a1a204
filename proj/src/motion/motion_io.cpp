#include "ua/motion/motion_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

namespace text_io {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

long long parse_int(std::string_view token) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("not an integer: '" + std::string(token) + "'");
  }
  return v;
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!split_ws(line).empty()) return true;
  }
  return false;
}

std::vector<std::string> expect_header(std::istream& in, std::string_view magic,
                                       std::string_view version, std::size_t extra_fields) {
  std::string line;
  if (!next_line(in, line)) throw ParseError(fmt::format("missing {} header", magic));
  auto fields = split_ws(line);
  if (fields.size() != 2 + extra_fields || fields[0] != magic || fields[1] != version) {
    throw ParseError(fmt::format("bad header '{}', expected {} {} with {} fields", line, magic,
                                 version, extra_fields));
  }
  return {fields.begin() + 2, fields.end()};
}

}  // namespace text_io

void write_motion(std::ostream& out, const MotionSequence& seq) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "UAMOTION 1 {} {}\n", seq.fps(), seq.size());
  for (const auto& f : seq.frames()) {
    const auto& p = f.root.position;
    const auto& q = f.root.orientation;
    fmt::format_to(std::back_inserter(buf), "{} {} {} {} {} {} {}", p.x(), p.y(), p.z(), q.w(),
                   q.x(), q.y(), q.z());
    for (double v : f.dofs.q) fmt::format_to(std::back_inserter(buf), " {}", v);
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_motion(const std::filesystem::path& path, const MotionSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  write_motion(out, seq);
}

MotionSequence read_motion(std::istream& in) {
  auto header = text_io::expect_header(in, "UAMOTION", "1", 2);
  const double fps = text_io::parse_double(header[0]);
  const long long n = text_io::parse_int(header[1]);
  if (n < 1) throw ParseError("motion file declares no frames");
  std::vector<MotionFrame> frames;
  frames.reserve(static_cast<std::size_t>(n));
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!text_io::next_line(in, line)) throw ParseError("motion file truncated");
    auto tok = text_io::split_ws(line);
    if (tok.size() != 7 + kNumDofs) {
      throw ParseError(fmt::format("motion frame {} has {} values, expected 36", i, tok.size()));
    }
    MotionFrame f;
    f.root.position = Vec3(text_io::parse_double(tok[0]), text_io::parse_double(tok[1]),
                           text_io::parse_double(tok[2]));
    Quat q(text_io::parse_double(tok[3]), text_io::parse_double(tok[4]),
           text_io::parse_double(tok[5]), text_io::parse_double(tok[6]));
    if (!(q.norm() > 1e-6)) throw ParseError(fmt::format("zero quaternion in frame {}", i));
    if (std::abs(q.norm() - 1.0) > 1e-12) q.normalize();
    f.root.orientation = q;
    for (std::size_t d = 0; d < kNumDofs; ++d) f.dofs[d] = text_io::parse_double(tok[7 + d]);
    frames.push_back(f);
  }
  return MotionSequence(fps, std::move(frames));
}

MotionSequence read_motion(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open motion file: " + path.string());
  return read_motion(in);
}

std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              std::string_view ext) {
  if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ua
