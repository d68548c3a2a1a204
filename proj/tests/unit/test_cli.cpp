#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cli.hpp"
#include "context.hpp"
#include "run_config.hpp"
#include "ua/common/errors.hpp"

namespace ua::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ua");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            fmt::format("ua_cli_{}_{}", ::testing::UnitTest::GetInstance()->current_test_info()->name(),
                        reinterpret_cast<std::uintptr_t>(this));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string straight_trajectory(const TempDir& dir) {
  const std::string path = dir / "straight.uatraj";
  std::ofstream f(path);
  f << "UATRAJ 1 5 8\n";
  for (int i = 0; i < 8; ++i) f << 0.2 * i << " 0 0.75 1 0 0 0\n";
  return path;
}

// ---- entry point -----------------------------------------------------------

TEST(Cli, HelpExitsZero) {
  const Outcome o = invoke({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("Usage"), std::string::npos);
  for (const char* cmd : {"train-codec", "train-causal", "train-gen", "tokenize", "generate",
                          "augment", "corrupt", "sweep", "serve", "client", "eval", "selftest"})
    EXPECT_NE(o.out.find(cmd), std::string::npos) << cmd;
}

TEST(Cli, UnknownSubcommandIsUserError) {
  const Outcome o = invoke({"frobnicate"});
  EXPECT_EQ(o.code, kExitUser);
  EXPECT_NE(o.err.find("Usage"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsUserError) { EXPECT_EQ(invoke({}).code, kExitUser); }

TEST(Cli, SelftestPasses) {
  const Outcome o = invoke({"selftest"});
  EXPECT_EQ(o.code, kExitOk) << o.out << o.err;
  EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
  EXPECT_NE(o.out.find("PASS fsq_bijection"), std::string::npos);
  EXPECT_NE(o.out.find("PASS codec_gradients"), std::string::npos);
  EXPECT_NE(o.out.find("PASS causality"), std::string::npos);
}

TEST(Cli, TokenizeStraightTrajectory) {
  TempDir dir;
  const Outcome o = invoke({"tokenize", "--traj", straight_trajectory(dir)});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  std::istringstream in(o.out);
  int token = 0, count = 0;
  while (in >> token) {
    EXPECT_EQ(token, 30);
    ++count;
  }
  EXPECT_EQ(count, 7);
}

TEST(Cli, MissingInputFileIsUserError) {
  const Outcome o = invoke({"tokenize", "--traj", "/nonexistent/path.uatraj"});
  EXPECT_EQ(o.code, kExitUser);
  EXPECT_FALSE(o.err.empty());
}

TEST(Cli, TokenizeWithoutInputIsUserError) { EXPECT_EQ(invoke({"tokenize"}).code, kExitUser); }

TEST(Cli, ServeWithoutModelNamesKey) {
  const Outcome o = invoke({"serve", "--bind", "127.0.0.1:0", "--duration", "0.1"});
  EXPECT_EQ(o.code, kExitUser);
  EXPECT_NE(o.err.find("paths.model"), std::string::npos) << o.err;
}

TEST(Cli, UnknownMetricIsUserError) {
  TempDir dir;
  ASSERT_EQ(invoke({"synth", "--sinusoid", "2", "--frames", "40", "--out", dir / "pred"}).code,
            kExitOk);
  const Outcome o = invoke({"eval", "--pred", dir / "pred", "--metrics", "bleu"});
  EXPECT_EQ(o.code, kExitUser);
  EXPECT_NE(o.err.find("bleu"), std::string::npos);
}

// ---- run config ------------------------------------------------------------

TEST(RunConfig, DefaultsFromSchema) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.integer("codec.hidden_channels"), 256);
  EXPECT_EQ(cfg.integer("causal.chunk_size"), 5);
  EXPECT_EQ(cfg.integer("gen.history"), 10);
  EXPECT_EQ(cfg.text("stream.bind"), "127.0.0.1:8765");
  EXPECT_TRUE(cfg.flag("train.cosine_decay"));
  EXPECT_FALSE(cfg.has("paths.model"));
}

TEST(RunConfig, SchemaDefaultsParse) {
  const RunConfig cfg;
  for (const ConfigKey& k : config_schema()) EXPECT_NO_THROW(cfg.text(k.key)) << k.key;
}

TEST(RunConfig, ParsesSections) {
  std::istringstream in("[gen]\norder = 3\ntemperature = 0.5\n[paths]\nmodel = m.ngram\n");
  const RunConfig cfg = RunConfig::parse(in);
  EXPECT_EQ(cfg.integer("gen.order"), 3);
  EXPECT_DOUBLE_EQ(cfg.number("gen.temperature"), 0.5);
  EXPECT_EQ(cfg.required("paths.model"), "m.ngram");
}

TEST(RunConfig, RejectsUnknownKey) {
  std::istringstream in("[gen]\nordr = 3\n");
  try {
    RunConfig::parse(in);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gen.ordr"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, RejectsUnknownSection) {
  std::istringstream in("[decoder]\nhidden = 3\n");
  EXPECT_THROW(RunConfig::parse(in), ConfigError);
}

TEST(RunConfig, MissingRequiredKeyNamed) {
  const RunConfig cfg;
  try {
    (void)cfg.required("paths.codec");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("paths.codec"), std::string::npos);
  }
}

TEST(RunConfig, WrongTypeRejected) {
  RunConfig cfg;
  cfg.set("gen.order", "four");
  EXPECT_THROW((void)cfg.integer("gen.order"), ConfigError);
  cfg.set("train.cosine_decay", "maybe");
  EXPECT_THROW((void)cfg.flag("train.cosine_decay"), ConfigError);
}

TEST(RunConfig, UnknownKeyInConfigFileIsUserError) {
  TempDir dir;
  std::ofstream(dir / "bad.ini") << "[train]\nsteps = 10\nbogus = 1\n";
  const Outcome o = invoke({"train-gen", "--config", dir / "bad.ini", "--synthetic", "20",
                            "--out", dir / "m.ngram"});
  EXPECT_EQ(o.code, kExitUser);
  EXPECT_NE(o.err.find("train.bogus"), std::string::npos) << o.err;
}

TEST(RunConfig, FlagsOverrideConfigFile) {
  TempDir dir;
  std::ofstream(dir / "run.ini") << "[gen]\norder = 3\n";
  Outcome o = invoke({"train-gen", "--config", dir / "run.ini", "--synthetic", "20", "--out",
                      dir / "a.ngram"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("order 3"), std::string::npos);
  o = invoke({"train-gen", "--config", dir / "run.ini", "--order", "2", "--synthetic", "20",
              "--out", dir / "b.ngram"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("order 2"), std::string::npos);
}

// ---- determinism -----------------------------------------------------------

std::string slurp(const std::string& path) { return read_text_file(path); }

TEST(CliDeterminism, TrainGenByteIdentical) {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    const Outcome o = invoke({"train-gen", "--synthetic", "50", "--seed", "4", "--out",
                              dir / (std::string(name) + ".ngram"), "--vocab-out",
                              dir / (std::string(name) + ".vocab")});
    ASSERT_EQ(o.code, kExitOk) << o.err;
  }
  EXPECT_EQ(slurp(dir / "a.ngram"), slurp(dir / "b.ngram"));
  EXPECT_EQ(slurp(dir / "a.vocab"), slurp(dir / "b.vocab"));
}

TEST(CliDeterminism, CorruptByteIdenticalPerSeed) {
  TempDir dir;
  ASSERT_EQ(invoke({"synth", "--sinusoid", "1", "--frames", "60", "--out", dir / "c"}).code,
            kExitOk);
  const std::string in = dir / "c/seq_00000.uamotion";
  const std::vector<std::pair<std::string, std::string>> runs{{"5", "n5a"}, {"5", "n5b"}, {"6", "n6"}};
  for (const auto& [seed, name] : runs)
    ASSERT_EQ(invoke({"corrupt", "--in", in, "--scale", "2", "--seed", seed, "--out", dir / name})
                  .code,
              kExitOk);
  EXPECT_EQ(slurp(dir / "n5a"), slurp(dir / "n5b"));
  EXPECT_NE(slurp(dir / "n5a"), slurp(dir / "n6"));
  EXPECT_NE(slurp(dir / "n5a"), slurp(in));
}

TEST(CliDeterminism, TrainCodecAndGenerate) {
  TempDir dir;
  ASSERT_EQ(invoke({"synth", "--sinusoid", "6", "--frames", "48", "--out", dir / "corpus"}).code,
            kExitOk);
  for (const char* name : {"a", "b"}) {
    const Outcome o = invoke({"train-codec", "--corpus", dir / "corpus", "--hidden", "16",
                              "--steps", "5", "--seed", "2", "--out",
                              dir / (std::string(name) + ".uacodec")});
    ASSERT_EQ(o.code, kExitOk) << o.err;
  }
  EXPECT_EQ(slurp(dir / "a.uacodec"), slurp(dir / "b.uacodec"));

  ASSERT_EQ(invoke({"train-gen", "--synthetic", "40", "--out", dir / "m.ngram", "--vocab-out",
                    dir / "v.txt"})
                .code,
            kExitOk);
  std::string tokens[2];
  for (int i = 0; i < 2; ++i) {
    const std::string out = dir / fmt::format("g{}.uamotion", i);
    const Outcome o = invoke({"generate", "--model", dir / "m.ngram", "--vocab", dir / "v.txt",
                              "--text", "walk", "--codec", dir / "a.uacodec", "--seed", "9",
                              "--max-length", "30", "--out", out});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    tokens[i] = o.out;
  }
  EXPECT_FALSE(tokens[0].empty());
  EXPECT_EQ(tokens[0], tokens[1]);
  EXPECT_EQ(slurp(dir / "g0.uamotion"), slurp(dir / "g1.uamotion"));
}

}  // namespace
}  // namespace ua::cli
