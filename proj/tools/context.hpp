#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "ua/motion/motion.hpp"

namespace ua::cli {

// State shared by the subcommands of one invocation.
struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;
  // Flag values keyed by the config key they override.
  std::map<std::string, std::string> overrides;

  // The --config file (if any) with flag overrides applied.
  RunConfig config() const;
};

// Registers `--name` as an override of config key `key`.
CLI::Option* config_option(CLI::App& app, Context& ctx, const std::string& name,
                           const std::string& key, const std::string& help);
// Adds `--config` to a subcommand.
void add_config_flag(CLI::App& app, Context& ctx);

inline constexpr std::string_view kMotionExt = ".uamotion";

// Every motion file in `dir`, sorted by name. Throws InputError when the
// directory holds none.
std::vector<std::filesystem::path> motion_files(const std::filesystem::path& dir);
std::vector<MotionSequence> read_motion_dir(const std::filesystem::path& dir);
// Writes text to a file, creating parent directories. Throws InputError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
// Comma-separated numbers. Throws InputError.
std::vector<double> parse_number_list(const std::string& text);

void register_train_commands(CLI::App& app, Context& ctx);
void register_data_commands(CLI::App& app, Context& ctx);
void register_stream_commands(CLI::App& app, Context& ctx);
void register_eval_commands(CLI::App& app, Context& ctx);

}  // namespace ua::cli
