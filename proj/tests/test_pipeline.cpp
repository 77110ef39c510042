#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dcamkl/errors.hpp"
#include "dcamkl/pipeline.hpp"
#include "dcamkl/serialize.hpp"
#include "dcamkl/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dcamkl;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dcamkl_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DCAMKL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Strongly separable CSV features over four catalog sets.
fs::path separable_corpus(const std::string& name, std::size_t n = 40) {
  fs::path dir = scratch(name);
  fs::create_directories(dir / "features");
  std::mt19937_64 rng(5);
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(i % 2 ? -1 : 1);
  const auto ids = oracle::make_ids(n, "img");
  for (const auto& [set, dims] : {std::pair<std::string, int>{"glcm", 3}, {"haar", 4}, {"lbp", 3}, {"hog", 5}}) {
    Eigen::MatrixXd m = oracle::random_matrix(dims, static_cast<Eigen::Index>(n), rng);
    for (std::size_t j = 0; j < n; ++j) m(0, static_cast<Eigen::Index>(j)) += 4.0 * y[j];
    write_feature_csv(FeatureSet(set, m, ids), dir / "features" / (set + ".csv"));
  }
  write_label_csv(LabelVector(y, ids), dir / "labels.csv");
  std::ofstream(dir / "config.json") << R"({"features": "features", "labels": "labels.csv", "C": 10})";
  return dir;
}

}  // namespace

// ---- config ---------------------------------------------------------------

TEST(Config, DefaultsAndOverrides) {
  auto c = parse_config(R"({"C": 2.5, "seed": 7, "train_fraction": 0.6})", "/base");
  EXPECT_EQ(c.mkl.C, 2.5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.fusion_mode, FusionMode::kConcat);
  EXPECT_EQ(c.kernels.size(), 3u);
  auto d = PipelineConfig::defaults();
  EXPECT_EQ(d.mkl.C, 1.0);
  EXPECT_EQ(d.train_fraction, 0.7);
  EXPECT_EQ(parse_config(R"({"labels": "l.csv"})", "/base").labels, fs::path("/base/l.csv"));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"C": -1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"fusion_mode": "product"})"), ValidationError);
  EXPECT_THROW(parse_config("{"), ParseError);
}

TEST(Config, DigestTracksEffectiveSettings) {
  auto a = parse_config(R"({"C": 1})"), b = parse_config("{}"), c = parse_config(R"({"C": 3})");
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_NE(config_digest(a), config_digest(c));
  EXPECT_EQ(config_digest(a).size(), 16u);
}

TEST(Config, CueWithoutKernelRejected) {
  auto c = parse_config(R"({"kernels": [{"cue": "aesthetics", "kind": "rbf", "sigma": 1.0}]})");
  std::vector<FeatureSet> cues = {FeatureSet("unusualness", Eigen::MatrixXd::Zero(1, 2), {"a", "b"})};
  EXPECT_THROW(kernels_for_cues(c, cues), ValidationError);
}

// ---- stage round trips ------------------------------------------------------

TEST(Pipeline, PlanReplayAndModelReloadOnCsvFeatures) {
  fs::path dir = separable_corpus("replay");
  const PipelineConfig config = load_config(dir / "config.json");
  cmd_fuse(config, dir);

  // Replaying the saved plan reproduces the written fused training features.
  const FusionPlan plan = load_plan(dir / "plan.json");
  EXPECT_EQ(plan_to_json(plan_from_json(plan_to_json(plan))), plan_to_json(plan));
  const auto raw = load_feature_source(config);
  for (const auto& fused : apply_fusion(plan, raw, plan.train_ids)) {
    FeatureSet written = load_feature_csv(dir / "fused" / "train" / (fused.name() + ".csv"));
    EXPECT_LE((written.values() - fused.values()).cwiseAbs().maxCoeff(), 1e-12) << fused.name();
  }
  // Texture type: three sets, two chained steps.
  bool saw_texture = false;
  for (const auto& t : plan.types) {
    if (t.type == "texture") {
      saw_texture = true;
      ASSERT_TRUE(t.mdca.has_value());
      EXPECT_EQ(t.mdca->steps.size(), 2u);
    }
    if (t.type == "hog") EXPECT_FALSE(t.mdca.has_value());
  }
  EXPECT_TRUE(saw_texture);

  const MklModel m = cmd_train(config, dir, {});
  const json report = json::parse(slurp(dir / "train_report.json"));
  EXPECT_EQ(report.at("train_accuracy").get<double>(), 1.0);
  const auto trace = report.at("objective_trace").get<std::vector<double>>();
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-9);

  const Prediction train_pred = cmd_predict(config, {}, dir, "train");
  const LabelVector truth = load_label_csv(dir / "labels.csv").aligned_to(train_pred.sample_ids);
  EXPECT_EQ(train_pred.labels, truth.labels());

  // Persistence bypass: in-process prediction with the unsaved model.
  const StoredModel in_memory{config_digest(config), plan, m};
  const Prediction direct = predict_raw(in_memory, raw, plan.test_ids);
  const Prediction a = cmd_predict(config, {}, dir, "test");
  const std::string bytes = slurp(dir / "predictions.csv");
  const Prediction b = cmd_predict(config, {}, dir, "test");
  EXPECT_EQ(bytes, slurp(dir / "predictions.csv"));
  EXPECT_EQ(a.decision, b.decision);
  EXPECT_LE((direct.decision - a.decision).cwiseAbs().maxCoeff(), 1e-12);

  const StoredModel reloaded = load_model(dir / "model.json");
  EXPECT_EQ(model_to_json(reloaded), model_to_json(model_from_json(model_to_json(reloaded))));
  EXPECT_EQ(reloaded.config_digest, config_digest(config));
}

TEST(Pipeline, PredictionsCsvRoundTrip) {
  Prediction p;
  p.sample_ids = {"a", "b"};
  p.labels = {1, -1};
  p.decision.resize(2);
  p.decision << 0.1 + 0.2, -1.0 / 3.0;
  fs::path dir = scratch("predcsv");
  write_predictions_csv(p, dir / "p.csv");
  Prediction q = load_predictions_csv(dir / "p.csv");
  EXPECT_EQ(q.sample_ids, p.sample_ids);
  EXPECT_EQ(q.labels, p.labels);
  EXPECT_EQ(q.decision, p.decision);
  EXPECT_EQ(slurp(dir / "p.csv").substr(0, 17), "id,label,decision");
}

TEST(Pipeline, CompareUsesOneSplitAndThreeRows) {
  fs::path dir = separable_corpus("compare", 60);
  const PipelineConfig config = load_config(dir / "config.json");
  const CompareResult r = cmd_compare(config, dir);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].method, "F4");
  EXPECT_EQ(r.rows[2].method, "F6");
  EXPECT_LT(r.rows[2].dims, r.rows[0].dims);
  const std::string csv = slurp(dir / "compare.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), ','), 8);
}

// ---- command line -----------------------------------------------------------

TEST(Cli, ExitCodes) {
  fs::path dir = scratch("exit");
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("fuse"), 2);
  EXPECT_EQ(cli("fuse --config " + (dir / "missing.json").string()), 4);
  std::ofstream(dir / "bad.json") << "{\"C\": ";
  EXPECT_EQ(cli("fuse --config " + (dir / "bad.json").string()), 2);

  fs::path sep = separable_corpus("exit_sep");
  const std::string base = "--config " + (sep / "config.json").string() + " --out " + sep.string();
  EXPECT_EQ(cli(base + " predict"), 4);  // no model yet
  EXPECT_EQ(cli(base + " fuse"), 0);
  std::ofstream(sep / "tight.json") << R"({"features": "features", "labels": "labels.csv", "C": 1000,
                                          "svm_tol": 1e-12, "svm_max_iterations": 2})";
  EXPECT_EQ(cli("--config " + (sep / "tight.json").string() + " --out " + sep.string() + " train"), 3);
  EXPECT_EQ(cli(base + " train"), 0);

  // The plan needs glcm; hiding it is a validation error.
  std::ofstream(sep / "no_glcm.json") << R"({"features": "features", "labels": "labels.csv", "exclude": ["glcm"]})";
  EXPECT_EQ(cli("--config " + (sep / "no_glcm.json").string() + " --out " + sep.string() + " predict"), 2);
  EXPECT_EQ(cli(base + " predict"), 0);
  EXPECT_EQ(cli(base + " evaluate"), 0);
}

TEST(Cli, ExtractListsCorruptFiles) {
  fs::path dir = scratch("extract");
  ASSERT_EQ(cli("--out " + dir.string() + " synth --count 4"), 0);
  std::ofstream(dir / "images" / "img999.png") << "not a png";
  EXPECT_EQ(cli("--config " + (dir / "config.json").string() + " --out " + dir.string() + " extract"), 0);
  FeatureSet glcm = load_feature_csv(dir / "features" / "glcm.csv");
  EXPECT_EQ(glcm.size(), 4);
  const json manifest = json::parse(slurp(dir / "features" / "manifest.json"));
  ASSERT_EQ(manifest.at("failures").size(), 1u);
  EXPECT_NE(manifest.at("failures")[0].dump().find("img999"), std::string::npos);

  const std::string first = slurp(dir / "features" / "hog.csv");
  EXPECT_EQ(cli("--config " + (dir / "config.json").string() + " --out " + dir.string() + " extract"), 0);
  EXPECT_EQ(first, slurp(dir / "features" / "hog.csv"));
}

TEST(Cli, StagedRunIsByteIdentical) {
  fs::path root = scratch("staged");
  ASSERT_EQ(cli("--out " + (root / "corpus").string() + " synth --count 48"), 0);
  const std::string config = (root / "corpus" / "config.json").string();
  std::vector<std::string> files = {"model.json", "plan.json", "predictions.csv", "roc.csv", "report.json"};
  std::vector<std::vector<std::string>> runs;
  for (const char* run : {"a", "b"}) {
    const std::string out = (root / run).string();
    for (const char* stage : {"extract", "fuse", "train", "predict", "evaluate"}) {
      ASSERT_EQ(cli("--config " + config + " --seed 3 --out " + out + " " + stage), 0) << stage;
    }
    std::vector<std::string> bytes;
    for (const auto& f : files) bytes.push_back(slurp(root / run / f));
    runs.push_back(bytes);
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_FALSE(runs[0][i].empty()) << files[i];
    EXPECT_EQ(runs[0][i], runs[1][i]) << files[i];
  }
}
