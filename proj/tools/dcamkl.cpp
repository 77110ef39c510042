// Command-line driver: extract -> fuse -> train -> predict -> evaluate, plus
// the comparative run and a synthetic-corpus generator.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcamkl/errors.hpp"
#include "dcamkl/pipeline.hpp"
#include "dcamkl/synthetic.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kNumerical = 3, kIo = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string model;
  std::string predictions;
  std::string subset = "test";
  std::size_t synth_count = 200;
};

dcamkl::PipelineConfig config_from(const Options& o) {
  if (o.config.empty()) throw dcamkl::ValidationError("--config is required");
  auto c = dcamkl::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  return c;
}

int run(const std::string& cmd, const Options& o) {
  namespace fs = std::filesystem;
  const fs::path out(o.out);
  if (cmd == "synth") {
    const auto corpus = dcamkl::synthetic_corpus(o.synth_count, o.seed.value_or(2016));
    dcamkl::write_synthetic_corpus(corpus, out);
    std::printf("wrote %zu images to %s\n", corpus.ids.size(), (out / "images").string().c_str());
    return kOk;
  }

  const auto config = config_from(o);
  if (cmd == "extract") {
    const auto s = dcamkl::cmd_extract(config, out);
    std::printf("extracted %zu images, %zu failed\n", s.images, s.failures.size());
    for (const auto& [file, why] : s.failures) std::fprintf(stderr, "  %s: %s\n", file.c_str(), why.c_str());
  } else if (cmd == "fuse") {
    dcamkl::cmd_fuse(config, out);
    std::printf("fusion plan written to %s\n", (out / "plan.json").string().c_str());
  } else if (cmd == "train") {
    const auto m = dcamkl::cmd_train(config, out, o.model);
    std::printf("trained on %zu kernels, %zu support vectors, stop: %s\n", m.groups.size(), m.support_ids.size(),
                m.stop_reason.c_str());
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
      std::printf("  %-20s d=%.4f  %s\n", m.groups[g].name.c_str(), m.d[g], m.groups[g].spec.describe().c_str());
    }
  } else if (cmd == "predict") {
    const auto p = dcamkl::cmd_predict(config, o.model, out, o.subset);
    std::printf("predicted %zu samples\n", p.sample_ids.size());
  } else if (cmd == "evaluate") {
    const auto r = dcamkl::cmd_evaluate(config, o.predictions, out);
    std::printf("ACC %.4f  AUC %.4f  (tp %zu tn %zu fp %zu fn %zu)\n", r.accuracy, r.auc, r.counts.tp, r.counts.tn,
                r.counts.fp, r.counts.fn);
  } else if (cmd == "compare") {
    const auto res = dcamkl::cmd_compare(config, out);
    std::printf("%-6s %8s %8s %8s\n", "method", "ACC", "AUC", "dims");
    for (const auto& row : res.rows) {
      std::printf("%-6s %8.4f %8.4f %8lld\n", row.method.c_str(), row.accuracy, row.auc,
                  static_cast<long long>(row.dims));
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DCA/MDCA feature fusion and SimpleMKL classification"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON pipeline config");
  app.add_option("--seed", o.seed, "override the split / generator seed");
  app.add_option("--out", o.out, "working directory for artifacts")->capture_default_str();
  app.add_option("--model", o.model, "model file (default <out>/model.json)");

  app.add_subcommand("extract", "run the image extractors into <out>/features");
  app.add_subcommand("fuse", "split, derive unusualness features and fit the fusion plan");
  app.add_subcommand("train", "train SimpleMKL on the fused training features");
  auto* predict = app.add_subcommand("predict", "predict through the saved plan and model");
  predict->add_option("--subset", o.subset, "test, train or all")->capture_default_str();
  auto* evaluate = app.add_subcommand("evaluate", "ACC/AUC/ROC of a predictions file");
  evaluate->add_option("--predictions", o.predictions, "default <out>/predictions.csv");
  app.add_subcommand("compare", "concatenation SVM vs fused SVM vs fused MKL");
  auto* synth = app.add_subcommand("synth", "write the synthetic labelled image corpus");
  synth->add_option("--count", o.synth_count, "number of images")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const dcamkl::ValidationError& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kValidation;
  } catch (const dcamkl::NonConvergenceError& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kNumerical;
  } catch (const dcamkl::DegenerateFusionError& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kNumerical;
  } catch (const dcamkl::IoError& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", cmd.c_str(), e.what());
    return kFailure;
  }
}
