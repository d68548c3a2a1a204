#include "cli.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/logging.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua::cli {

RunConfig Context::config() const {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  return cfg;
}

CLI::Option* config_option(CLI::App& app, Context& ctx, const std::string& name,
                           const std::string& key, const std::string& help) {
  return app.add_option_function<std::string>(
      name, [&ctx, key](const std::string& v) { ctx.overrides[key] = v; },
      fmt::format("{} [{}]", help, key));
}

void add_config_flag(CLI::App& app, Context& ctx) {
  app.add_option("--config", ctx.config_path, "INI run config (flags take precedence)");
}

std::vector<std::filesystem::path> motion_files(const std::filesystem::path& dir) {
  auto files = list_files(dir, kMotionExt);
  if (files.empty())
    throw InputError(fmt::format("no {} files in {}", kMotionExt, dir.string()));
  return files;
}

std::vector<MotionSequence> read_motion_dir(const std::filesystem::path& dir) {
  std::vector<MotionSequence> out;
  for (const auto& f : motion_files(dir)) out.push_back(read_motion(f));
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(fmt::format("bad number '{}' in list '{}'", item, text));
    }
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  init_logging();
  Context ctx{out, err, {}, {}};
  CLI::App app{"Motion tokenization, generation, streaming and evaluation toolkit", "ua"};
  app.require_subcommand(1, 1);
  register_train_commands(app, ctx);
  register_data_commands(app, ctx);
  register_stream_commands(app, ctx);
  register_eval_commands(app, ctx);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUser;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace ua::cli
