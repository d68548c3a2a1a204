#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "context.hpp"
#include "ua/checks/properties.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"
#include "ua/eval/features.hpp"
#include "ua/eval/metrics.hpp"
#include "ua/eval/pd.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua::cli {
namespace {

const std::vector<std::string> kMetricNames{"fid", "div", "mmd", "rprec", "rmse", "genre", "success"};
constexpr std::size_t kDiversityPairs = 300;

std::vector<std::string> parse_metrics(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), item) == kMetricNames.end())
      throw InputError(fmt::format("unknown metric '{}'", item));
    out.push_back(item);
  }
  if (out.empty()) throw InputError("no metrics requested");
  return out;
}

// Genre label of a file: the stem up to its first underscore.
std::string genre_of(const std::filesystem::path& file) {
  const std::string stem = file.stem().string();
  return stem.substr(0, stem.find('_'));
}

struct EvalFlags {
  std::string pred;
  std::string ref;
  std::string metrics = "fid,div,mmd,rprec,rmse,genre,success";
  std::string report;
  std::uint64_t seed = 0;
};

void eval_command(Context& ctx, const EvalFlags& f) {
  const auto metrics = parse_metrics(f.metrics);
  const auto pred_files = motion_files(f.pred);
  std::vector<MotionSequence> pred;
  for (const auto& p : pred_files) pred.push_back(read_motion(p));
  const auto pred_feat = motion_features(pred);

  std::vector<MotionSequence> ref;
  std::vector<FeatureVector> ref_feat;
  auto need_ref = [&] {
    if (!ref.empty()) return;
    if (f.ref.empty()) throw InputError("this metric needs --ref");
    for (const auto& p : motion_files(f.ref)) ref.push_back(read_motion(p));
    if (ref.size() != pred.size())
      throw InputError(fmt::format("{} predictions but {} references", pred.size(), ref.size()));
    ref_feat = motion_features(ref);
  };

  std::string report;
  auto line = [&](const std::string& name, double value) {
    report += fmt::format("{} {:.6f}\n", name, value);
  };
  for (const std::string& m : metrics) {
    if (m == "fid") {
      need_ref();
      line("fid", fid(pred_feat, ref_feat));
    } else if (m == "div") {
      Rng rng = make_rng(f.seed);
      line("diversity", diversity(pred_feat, kDiversityPairs, rng));
    } else if (m == "mmd") {
      need_ref();
      line("mm_dist", mm_dist(pred_feat, ref_feat));
    } else if (m == "rprec") {
      need_ref();
      const std::size_t batch = std::min(kRetrievalBatch, pred_feat.size());
      for (std::size_t k = 1; k <= std::min<std::size_t>(3, batch); ++k)
        line(fmt::format("r_precision@{}", k), r_precision(pred_feat, ref_feat, k, batch));
    } else if (m == "rmse") {
      need_ref();
      double sum = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) sum += root_rmse(pred[i], ref[i]);
      line("root_rmse", sum / static_cast<double>(pred.size()));
    } else if (m == "genre") {
      std::map<std::string, std::vector<FeatureVector>> groups;
      for (std::size_t i = 0; i < pred.size(); ++i)
        groups[genre_of(pred_files[i])].push_back(pred_feat[i]);
      std::vector<std::vector<FeatureVector>> genres;
      for (auto& [name, g] : groups) genres.push_back(std::move(g));
      line("genre", genre_score(genres));
    } else if (m == "success") {
      std::vector<TrialOutcome> trials;
      for (const MotionSequence& s : pred) {
        const TrackResult r = simulate_track(s);
        trials.push_back({TaskKind::kText, r.trial.fell, r.trial.mpjpe_cm, r.trial.root_rmse_m});
      }
      line("success_rate", success_rate(trials));
    }
  }
  if (f.report.empty()) {
    ctx.out << report;
  } else {
    write_text_file(f.report, report);
  }
}

void selftest_command(Context& ctx) {
  const std::vector<CheckResult> results{check_fsq_bijection(), check_codec_gradients(),
                                         check_causality()};
  bool ok = true;
  for (const CheckResult& r : results) {
    ctx.out << fmt::format("{} {} {} ({:.2f} s)\n", r.passed ? "PASS" : "FAIL", r.name, r.detail,
                           r.seconds);
    ok = ok && r.passed;
  }
  if (!ok) throw std::runtime_error("selftest failed");
}

}  // namespace

void register_eval_commands(CLI::App& app, Context& ctx) {
  auto ev = std::make_shared<EvalFlags>();
  auto* eval = app.add_subcommand("eval", "score generated motion against references");
  eval->add_option("--pred", ev->pred, "directory of generated motion files")->required();
  eval->add_option("--ref", ev->ref, "directory of reference motion files, paired by name order");
  eval->add_option("--metrics", ev->metrics, "comma-separated metrics")->capture_default_str();
  eval->add_option("--report", ev->report, "report path (stdout when omitted)");
  eval->add_option("--seed", ev->seed, "diversity pair seed")->capture_default_str();
  eval->callback([&ctx, ev] { eval_command(ctx, *ev); });

  auto* selftest = app.add_subcommand("selftest", "run the bijection, gradient and causality checks");
  selftest->callback([&ctx] { selftest_command(ctx); });
}

}  // namespace ua::cli
