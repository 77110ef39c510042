#include "dcamkl/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "dcamkl/errors.hpp"
#include "dcamkl/image.hpp"
#include "dcamkl/serialize.hpp"
#include "json_io.hpp"
#include "text_util.hpp"

namespace dcamkl {

namespace fs = std::filesystem;
using detail::json;

// ---- config -----------------------------------------------------------------

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  KernelEntry u{"unusualness", KernelSpec::rbf(1.0), true, false};
  KernelEntry a{"aesthetics", KernelSpec::polynomial(2), false, false};
  KernelEntry g{"general_preferences", KernelSpec::polynomial(3), false, false};
  c.kernels = {u, a, g};
  c.baseline_kernel = {"", KernelSpec::rbf(1.0), true, false};
  return c;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end()) {
      throw ValidationError(where + ": unknown key '" + k + "'");
    }
  }
}

KernelEntry kernel_entry_from(const json& j, const std::string& where) {
  reject_unknown(j, {"cue", "kind", "sigma", "degree", "scale", "offset"}, where);
  KernelEntry e;
  e.cue = j.value("cue", "");
  e.spec.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  if (e.spec.kind == KernelKind::kRbf) {
    const json s = j.value("sigma", json("median"));
    if (s.is_string()) {
      if (s.get<std::string>() != "median") throw ValidationError(where + ": sigma must be a number or \"median\"");
      e.median_sigma = true;
    } else {
      e.spec.sigma = s.get<double>();
    }
  } else {
    e.spec.degree = j.value("degree", 2);
    const json s = j.value("scale", json(1.0));
    if (s.is_string()) {
      if (s.get<std::string>() != "inverse_dims") {
        throw ValidationError(where + ": scale must be a number or \"inverse_dims\"");
      }
      e.inverse_dims_scale = true;
    } else {
      e.spec.scale = s.get<double>();
    }
    e.spec.offset = j.value("offset", 1.0);
  }
  e.spec.validate();
  return e;
}

json kernel_entry_json(const KernelEntry& e) {
  json j = {{"kind", to_string(e.spec.kind)}};
  if (!e.cue.empty()) j["cue"] = e.cue;
  if (e.spec.kind == KernelKind::kRbf) {
    j["sigma"] = e.median_sigma ? json("median") : json(e.spec.sigma);
  } else {
    j["degree"] = e.spec.degree;
    j["scale"] = e.inverse_dims_scale ? json("inverse_dims") : json(e.spec.scale);
    j["offset"] = e.spec.offset;
  }
  return j;
}

json config_json(const PipelineConfig& c) {
  json imports = json::array();
  for (const auto& i : c.imports) imports.push_back({{"name", i.name}, {"file", i.file.generic_string()}});
  json assignments = json::object();
  for (const auto& [name, k] : c.assignments) assignments[name] = {{"cue", to_string(k.cue)}, {"type", k.type}};
  json kernels = json::array();
  for (const auto& k : c.kernels) kernels.push_back(kernel_entry_json(k));
  return {{"images", c.images.generic_string()},
          {"features", c.features.generic_string()},
          {"labels", c.labels.generic_string()},
          {"imports", imports},
          {"assignments", assignments},
          {"exclude", c.exclude},
          {"derived",
           {{"familiarity_source", c.derived.familiarity_source},
            {"familiarity_k", c.derived.familiarity_k},
            {"lof_sources", c.derived.lof_sources},
            {"lof_k", c.derived.lof_k}}},
          {"fusion_mode", to_string(c.fusion_mode)},
          {"kernels", kernels},
          {"baseline_kernel", kernel_entry_json(c.baseline_kernel)},
          {"C", c.mkl.C},
          {"svm_tol", c.mkl.svm_tol},
          {"svm_max_iterations", c.mkl.max_svm_iterations},
          {"mkl_outer_tol", c.mkl.outer_tol},
          {"mkl_gap_tol", c.mkl.gap_tol},
          {"mkl_max_outer", c.mkl.max_outer},
          {"train_fraction", c.train_fraction},
          {"seed", c.seed}};
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
  const json j = detail::parse_json(text, "config");
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown(j,
                 {"images", "features", "labels", "imports", "assignments", "exclude", "derived", "fusion_mode",
                  "kernels", "baseline_kernel", "C", "svm_tol", "svm_max_iterations", "mkl_outer_tol",
                  "mkl_gap_tol", "mkl_max_outer", "train_fraction", "seed"},
                 "config");
  PipelineConfig c = PipelineConfig::defaults();
  try {
    if (j.contains("images")) c.images = resolve(base_dir, j["images"].get<std::string>());
    if (j.contains("features")) c.features = resolve(base_dir, j["features"].get<std::string>());
    if (j.contains("labels")) c.labels = resolve(base_dir, j["labels"].get<std::string>());
    for (const auto& i : j.value("imports", json::array())) {
      reject_unknown(i, {"name", "file"}, "config.imports");
      c.imports.push_back({i.at("name").get<std::string>(), resolve(base_dir, i.at("file").get<std::string>())});
    }
    for (const auto& [name, a] : j.value("assignments", json::object()).items()) {
      reject_unknown(a, {"cue", "type"}, "config.assignments." + name);
      c.assignments[name] = {name, cue_from_string(a.at("cue").get<std::string>()), a.at("type").get<std::string>()};
    }
    c.exclude = j.value("exclude", std::vector<std::string>{});
    if (j.contains("derived")) {
      const auto& d = j["derived"];
      reject_unknown(d, {"familiarity_source", "familiarity_k", "lof_sources", "lof_k"}, "config.derived");
      c.derived.familiarity_source = d.value("familiarity_source", c.derived.familiarity_source);
      c.derived.familiarity_k = d.value("familiarity_k", c.derived.familiarity_k);
      c.derived.lof_sources = d.value("lof_sources", c.derived.lof_sources);
      c.derived.lof_k = d.value("lof_k", c.derived.lof_k);
    }
    if (j.contains("fusion_mode")) c.fusion_mode = fusion_mode_from_string(j["fusion_mode"].get<std::string>());
    if (j.contains("kernels")) {
      c.kernels.clear();
      for (const auto& k : j["kernels"]) {
        auto e = kernel_entry_from(k, "config.kernels");
        cue_from_string(e.cue);
        c.kernels.push_back(std::move(e));
      }
    }
    if (j.contains("baseline_kernel")) c.baseline_kernel = kernel_entry_from(j["baseline_kernel"], "config.baseline_kernel");
    c.mkl.C = j.value("C", c.mkl.C);
    c.mkl.svm_tol = j.value("svm_tol", c.mkl.svm_tol);
    c.mkl.max_svm_iterations = j.value("svm_max_iterations", c.mkl.max_svm_iterations);
    c.mkl.outer_tol = j.value("mkl_outer_tol", c.mkl.outer_tol);
    c.mkl.gap_tol = j.value("mkl_gap_tol", c.mkl.gap_tol);
    c.mkl.max_outer = j.value("mkl_max_outer", c.mkl.max_outer);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!(c.mkl.C > 0.0)) throw ValidationError("config: C must be > 0");
  if (!(c.mkl.svm_tol > 0.0)) throw ValidationError("config: svm_tol must be > 0");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ValidationError("config: train_fraction must lie in (0, 1)");
  }
  if (c.derived.familiarity_k < 1 || c.derived.lof_k < 1) throw ValidationError("config: k must be >= 1");
  std::set<std::string> seen;
  for (const auto& k : c.kernels) {
    if (!seen.insert(k.cue).second) throw ValidationError("config: kernel for cue '" + k.cue + "' listed twice");
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) { return parse_config(read_text(path), path.parent_path()); }

std::string config_to_json(const PipelineConfig& config) { return config_json(config).dump(); }

std::string config_digest(const PipelineConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- feature source -----------------------------------------------------------

namespace {

const FeatureSet* find_set(std::span<const FeatureSet> sets, const std::string& name) {
  for (const auto& s : sets) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

const FeatureSet& require_set(std::span<const FeatureSet> sets, const std::string& name, const std::string& who) {
  const FeatureSet* s = find_set(sets, name);
  if (s == nullptr) throw ValidationError(who + ": missing feature set '" + name + "'");
  return *s;
}

std::optional<FeatureKind> kind_of(const PipelineConfig& config, const std::string& name) {
  if (auto it = config.assignments.find(name); it != config.assignments.end()) return it->second;
  return lookup_feature_kind(name);
}

std::vector<FeatureSet> restrict(std::span<const FeatureSet> sets, std::span<const std::string> ids) {
  std::vector<FeatureSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(s.select(s.indices_of(ids)));
  return out;
}

fs::path features_dir(const PipelineConfig& config, const fs::path& out) {
  return config.features.empty() ? out / "features" : config.features;
}

}  // namespace

std::vector<FeatureSet> load_feature_source(const PipelineConfig& config) {
  if (config.features.empty()) throw ValidationError("config: no feature directory");
  std::vector<std::pair<std::string, fs::path>> files;
  const fs::path manifest = config.features / "manifest.json";
  if (fs::exists(manifest)) {
    const json m = detail::parse_json(read_text(manifest), manifest.string());
    try {
      for (const auto& s : m.at("sets")) {
        files.emplace_back(s.at("name").get<std::string>(), config.features / s.at("file").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw ParseError(manifest.string() + ": " + e.what());
    }
  } else if (fs::is_directory(config.features)) {
    for (const auto& entry : fs::directory_iterator(config.features)) {
      if (entry.path().extension() == ".csv") files.emplace_back(entry.path().stem().string(), entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    throw IoError("feature directory not found: " + config.features.string());
  }
  for (const auto& imp : config.imports) files.emplace_back(imp.name, imp.file);

  std::vector<FeatureSet> sets;
  for (const auto& [name, path] : files) {
    if (std::find(config.exclude.begin(), config.exclude.end(), name) != config.exclude.end()) continue;
    if (find_set(sets, name) != nullptr) throw ValidationError("feature set '" + name + "' listed twice");
    FeatureSet s = load_feature_csv(path, name);
    if (!sets.empty()) s = s.select(s.indices_of(sets.front().sample_ids()));
    sets.push_back(std::move(s));
  }
  if (sets.empty()) throw ValidationError("no feature sets found in " + config.features.string());
  return sets;
}

// ---- fusion plan ------------------------------------------------------------------

std::vector<FeatureSet> derive_unusualness(const DerivedPlan& plan, std::span<const FeatureSet> raw) {
  std::vector<FeatureSet> out;
  if (plan.familiarity_reference) {
    const auto& src = require_set(raw, plan.familiarity_reference->name(), "familiarity");
    Eigen::MatrixXd v = familiarity(src, *plan.familiarity_reference, plan.familiarity_k).transpose();
    out.emplace_back("familiarity", std::move(v), src.sample_ids(), std::vector<std::string>{"familiarity"});
  }
  if (plan.lof_reference) {
    std::vector<FeatureSet> parts;
    for (const auto& name : plan.lof_sources) parts.push_back(require_set(raw, name, "lof"));
    const FeatureSet q = apply_normalizer(plan.lof_normalizer, concatenate(parts, "lof_input"));
    Eigen::MatrixXd v = lof_scores_against(*plan.lof_reference, q, plan.lof_k).transpose();
    out.emplace_back("lof", std::move(v), q.sample_ids(), std::vector<std::string>{"lof"});
  }
  return out;
}

namespace {

/// Sets the plan consumes, in canonical order: by cue, then by source order.
struct UsedSet {
  std::string name;
  FeatureKind kind;
};

std::vector<UsedSet> used_sets(std::span<const FeatureSet> all, const PipelineConfig& config) {
  std::set<std::string> support(config.derived.lof_sources.begin(), config.derived.lof_sources.end());
  support.insert(config.derived.familiarity_source);
  std::vector<UsedSet> used;
  for (Cue cue : kAllCues) {
    for (const auto& s : all) {
      auto k = kind_of(config, s.name());
      if (!k) {
        if (support.count(s.name()) == 0) {
          throw ValidationError("feature set '" + s.name() + "' has no cue assignment");
        }
        continue;
      }
      if (k->cue == cue) used.push_back({s.name(), *k});
    }
  }
  return used;
}

}  // namespace

FusionPlan fit_fusion(std::span<const FeatureSet> raw, const LabelVector& labels, std::vector<std::string> train_ids,
                      std::vector<std::string> test_ids, const PipelineConfig& config) {
  FusionPlan plan;
  plan.mode = config.fusion_mode;
  plan.train_ids = std::move(train_ids);
  plan.test_ids = std::move(test_ids);
  const std::vector<FeatureSet> train_raw = restrict(raw, plan.train_ids);
  const LabelVector train_labels = labels.aligned_to(plan.train_ids);
  train_labels.require_both_classes("fusion");

  const auto& ds = config.derived;
  if (find_set(train_raw, "familiarity") == nullptr) {
    if (const FeatureSet* src = find_set(train_raw, ds.familiarity_source)) {
      plan.derived.familiarity_reference = *src;
      plan.derived.familiarity_k = ds.familiarity_k;
    }
  }
  if (find_set(train_raw, "lof") == nullptr) {
    std::vector<FeatureSet> parts;
    for (const auto& name : ds.lof_sources) {
      if (const FeatureSet* s = find_set(train_raw, name)) {
        parts.push_back(*s);
        plan.derived.lof_sources.push_back(name);
      }
    }
    if (!parts.empty()) {
      const FeatureSet stacked = concatenate(parts, "lof_input");
      plan.derived.lof_normalizer = fit_normalizer(stacked);
      plan.derived.lof_reference = apply_normalizer(plan.derived.lof_normalizer, stacked);
      plan.derived.lof_k = ds.lof_k;
    }
  }

  std::vector<FeatureSet> all = train_raw;
  for (auto& d : derive_unusualness(plan.derived, train_raw)) all.push_back(std::move(d));

  const std::vector<UsedSet> used = used_sets(all, config);
  if (used.empty()) throw ValidationError("fusion: no feature set has a cue assignment");
  for (const auto& u : used) plan.normalizers[u.name] = fit_normalizer(require_set(all, u.name, "fusion"));

  for (Cue cue : kAllCues) {
    std::vector<std::string> types;
    for (const auto& u : used) {
      if (u.kind.cue == cue && std::find(types.begin(), types.end(), u.kind.type) == types.end()) {
        types.push_back(u.kind.type);
      }
    }
    if (types.empty()) continue;
    plan.cues.push_back(cue);
    for (const auto& type : types) {
      TypePlan tp{cue, type, {}, std::nullopt};
      std::vector<FeatureSet> inputs;
      for (const auto& u : used) {
        if (u.kind.cue != cue || u.kind.type != type) continue;
        tp.inputs.push_back(u.name);
        inputs.push_back(apply_normalizer(plan.normalizers[u.name], require_set(all, u.name, "fusion")));
      }
      if (inputs.size() >= 2) {
        try {
          tp.mdca = fit_mdca(inputs, train_labels, plan.mode, type).first;
        } catch (const DegenerateFusionError& e) {
          throw DegenerateFusionError("fusion of type '" + type + "' (cue " + std::string(to_string(cue)) +
                                      "): " + e.what());
        }
      }
      plan.types.push_back(std::move(tp));
    }
  }
  return plan;
}

namespace {

/// Raw sets restricted to `ids`, with derived sets appended.
std::vector<FeatureSet> prepared(const FusionPlan& plan, std::span<const FeatureSet> raw,
                                 std::span<const std::string> ids) {
  std::vector<FeatureSet> needed;
  auto want = [&](const std::string& name) {
    if (find_set(needed, name) != nullptr) return;
    if (const FeatureSet* s = find_set(raw, name)) needed.push_back(s->select(s->indices_of(ids)));
  };
  if (plan.derived.familiarity_reference) want(plan.derived.familiarity_reference->name());
  for (const auto& n : plan.derived.lof_sources) want(n);
  for (const auto& t : plan.types) {
    for (const auto& n : t.inputs) want(n);
  }
  for (auto& d : derive_unusualness(plan.derived, needed)) {
    if (find_set(needed, d.name()) == nullptr) needed.push_back(std::move(d));
  }
  return needed;
}

FeatureSet normalized_input(const FusionPlan& plan, std::span<const FeatureSet> sets, const std::string& name) {
  const auto it = plan.normalizers.find(name);
  if (it == plan.normalizers.end()) throw ValidationError("fusion plan has no normalizer for '" + name + "'");
  return apply_normalizer(it->second, require_set(sets, name, "fusion plan"));
}

}  // namespace

std::vector<FeatureSet> apply_fusion(const FusionPlan& plan, std::span<const FeatureSet> raw,
                                     std::span<const std::string> ids) {
  const std::vector<FeatureSet> sets = prepared(plan, raw, ids);
  std::vector<FeatureSet> cues;
  for (Cue cue : plan.cues) {
    std::vector<FeatureSet> parts;
    for (const auto& t : plan.types) {
      if (t.cue != cue) continue;
      std::vector<FeatureSet> inputs;
      for (const auto& n : t.inputs) inputs.push_back(normalized_input(plan, sets, n));
      if (t.mdca) {
        parts.push_back(apply_mdca(*t.mdca, inputs));
      } else if (inputs.size() == 1) {
        parts.push_back(std::move(inputs.front()));
      } else {
        throw ValidationError("fusion plan: type '" + t.type + "' has several inputs but no fusion steps");
      }
    }
    cues.push_back(concatenate(parts, std::string(to_string(cue))));
  }
  return cues;
}

FeatureSet concatenated_input(const FusionPlan& plan, std::span<const FeatureSet> raw,
                              std::span<const std::string> ids) {
  const std::vector<FeatureSet> sets = prepared(plan, raw, ids);
  std::vector<FeatureSet> parts;
  for (const auto& t : plan.types) {
    for (const auto& n : t.inputs) parts.push_back(normalized_input(plan, sets, n));
  }
  return concatenate(parts, "concat");
}

namespace {

KernelChoice choice_for(const KernelEntry& e, const FeatureSet& set) {
  KernelChoice c{e.spec, e.median_sigma};
  if (e.inverse_dims_scale) c.spec.scale = 1.0 / static_cast<double>(set.dims());
  return c;
}

}  // namespace

std::vector<KernelChoice> kernels_for_cues(const PipelineConfig& config, std::span<const FeatureSet> cue_sets) {
  std::vector<KernelChoice> out;
  for (const auto& s : cue_sets) {
    const auto it = std::find_if(config.kernels.begin(), config.kernels.end(),
                                 [&](const KernelEntry& e) { return e.cue == s.name(); });
    if (it == config.kernels.end()) throw ValidationError("kernel manifest has no entry for cue '" + s.name() + "'");
    out.push_back(choice_for(*it, s));
  }
  return out;
}

KernelChoice baseline_kernel_for(const PipelineConfig& config, const FeatureSet& set) {
  return choice_for(config.baseline_kernel, set);
}

Prediction predict_raw(const StoredModel& model, std::span<const FeatureSet> raw, std::span<const std::string> ids) {
  const std::vector<FeatureSet> cues = apply_fusion(model.plan, raw, ids);
  return predict(model.mkl, cues);
}

// ---- compare --------------------------------------------------------------------

namespace {

std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(const std::vector<std::string>& ids,
                                                                        const LabelVector& labels,
                                                                        const PipelineConfig& config) {
  const LabelVector aligned = labels.aligned_to(ids);
  const auto train_pos = stratified_train_positions(aligned, config.train_fraction, config.seed);
  std::vector<char> is_train(ids.size(), 0);
  for (auto p : train_pos) is_train[p] = 1;
  std::vector<std::string> train, test;
  for (std::size_t i = 0; i < ids.size(); ++i) (is_train[i] ? train : test).push_back(ids[i]);
  return {train, test};
}

CompareRow score(const std::string& method, const MklModel& model, std::span<const FeatureSet> test,
                 const LabelVector& labels, Eigen::Index dims) {
  const Prediction p = predict(model, test);
  const LabelVector truth = labels.aligned_to(p.sample_ids);
  const std::vector<double> dec(p.decision.data(), p.decision.data() + p.decision.size());
  const EvaluationReport r = evaluate(p.labels, dec, truth.labels());
  return {method, r.accuracy, r.auc, dims};
}

Eigen::Index total_dims(std::span<const FeatureSet> sets) {
  Eigen::Index d = 0;
  for (const auto& s : sets) d += s.dims();
  return d;
}

}  // namespace

CompareResult run_compare(std::span<const FeatureSet> raw, const LabelVector& labels, const PipelineConfig& config) {
  if (raw.empty()) throw ValidationError("compare: no feature sets");
  auto [train_ids, test_ids] = split_ids(raw.front().sample_ids(), labels, config);
  const FusionPlan plan = fit_fusion(raw, labels, train_ids, test_ids, config);
  const LabelVector train_labels = labels.aligned_to(train_ids);

  CompareResult res;
  res.test_ids = test_ids;

  const FeatureSet concat_train = concatenated_input(plan, raw, train_ids);
  const FeatureSet concat_test = concatenated_input(plan, raw, test_ids);
  const KernelChoice k4 = baseline_kernel_for(config, concat_train);
  const MklModel f4 = fit_model(std::span(&concat_train, 1), train_labels, std::span(&k4, 1), config.mkl);
  res.rows.push_back(score("F4", f4, std::span(&concat_test, 1), labels, concat_train.dims()));

  const std::vector<FeatureSet> cue_train = apply_fusion(plan, raw, train_ids);
  const std::vector<FeatureSet> cue_test = apply_fusion(plan, raw, test_ids);
  const FeatureSet fused_train = concatenate(cue_train, "fused");
  const FeatureSet fused_test = concatenate(cue_test, "fused");
  const KernelChoice k5 = baseline_kernel_for(config, fused_train);
  const MklModel f5 = fit_model(std::span(&fused_train, 1), train_labels, std::span(&k5, 1), config.mkl);
  res.rows.push_back(score("F5", f5, std::span(&fused_test, 1), labels, fused_train.dims()));

  const auto k6 = kernels_for_cues(config, cue_train);
  const MklModel f6 = fit_model(cue_train, train_labels, k6, config.mkl);
  res.rows.push_back(score("F6", f6, cue_test, labels, total_dims(cue_train)));
  res.mkl_weights = f6.d;
  return res;
}

// ---- subcommands ----------------------------------------------------------------

namespace {

json report_header(const PipelineConfig& config) {
  return {{"config_digest", config_digest(config)}, {"config", config_json(config)}};
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

RasterImage as_rgb(const RasterImage& img) {
  if (img.is_rgb()) return img;
  std::vector<double> px;
  px.reserve(img.pixels().size() * 3);
  for (double v : img.pixels()) px.insert(px.end(), {v, v, v});
  return RasterImage(img.width(), img.height(), 3, std::move(px));
}

/// All extractor outputs of one image, stacked in registry order.
std::vector<double> extract_column(const RasterImage& raw) {
  const RasterImage img = as_rgb(raw);
  if (img.width() < 8 || img.height() < 8) throw ValidationError("image smaller than 8x8");
  std::vector<double> col;
  for (const auto& ex : image_extractors()) {
    auto v = ex.run(img);
    if (v.size() != ex.dims) throw Error(ex.name + ": unexpected output length");
    col.insert(col.end(), v.begin(), v.end());
  }
  return col;
}

std::vector<FeatureSet> assemble_sets(const std::vector<std::string>& ids,
                                      const std::vector<std::vector<double>>& columns) {
  std::vector<FeatureSet> sets;
  std::size_t offset = 0;
  for (const auto& ex : image_extractors()) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ex.dims), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
      for (std::size_t i = 0; i < ex.dims; ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][offset + i];
      }
    }
    offset += ex.dims;
    sets.emplace_back(ex.name, std::move(m), ids);
  }
  return sets;
}

LabelVector labels_for(const PipelineConfig& config) {
  if (config.labels.empty()) throw ValidationError("config: no label file");
  return load_label_csv(config.labels);
}

PipelineConfig with_features(PipelineConfig config, const fs::path& out) {
  config.features = features_dir(config, out);
  return config;
}

}  // namespace

std::vector<FeatureSet> extract_features(std::span<const std::string> ids, std::span<const RasterImage> images) {
  if (ids.size() != images.size()) throw ValidationError("extract_features: ids and images differ in count");
  std::vector<std::vector<double>> columns;
  for (const auto& img : images) columns.push_back(extract_column(img));
  return assemble_sets(std::vector<std::string>(ids.begin(), ids.end()), columns);
}

ExtractSummary cmd_extract(const PipelineConfig& config, const fs::path& out) {
  if (config.images.empty()) throw ValidationError("config: no image directory");
  if (!fs::is_directory(config.images)) throw IoError("image directory not found: " + config.images.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.images)) {
    const std::string ext = to_lower(entry.path().extension().string());
    if (entry.is_regular_file() && (ext == ".png" || ext == ".bmp")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::vector<double>> columns;  // per sample, all extractors stacked
  std::vector<std::string> ids;
  ExtractSummary summary;
  for (const auto& path : files) {
    const std::string id = path.stem().string();
    try {
      if (std::find(ids.begin(), ids.end(), id) != ids.end()) throw ValidationError("duplicate sample id '" + id + "'");
      columns.push_back(extract_column(load_image(path)));
      ids.push_back(id);
    } catch (const std::exception& e) {
      summary.failures.emplace_back(path.filename().string(), e.what());
    }
  }
  summary.images = ids.size();
  if (ids.empty()) {
    std::string why = summary.failures.empty() ? "no .png/.bmp files"
                                               : summary.failures.front().first + ": " + summary.failures.front().second;
    throw ValidationError("no image could be processed in " + config.images.string() + " (" + why + ")");
  }

  const fs::path dir = out / "features";
  fs::create_directories(dir);
  json sets = json::array();
  for (const auto& set : assemble_sets(ids, columns)) {
    write_feature_csv(set, dir / (set.name() + ".csv"));
    json entry = {{"name", set.name()}, {"file", set.name() + ".csv"}, {"dims", set.dims()}};
    if (auto k = lookup_feature_kind(set.name())) {
      entry["cue"] = to_string(k->cue);
      entry["type"] = k->type;
    } else {
      entry["role"] = "derivation input";
    }
    sets.push_back(std::move(entry));
  }
  json failures = json::array();
  for (const auto& [file, why] : summary.failures) failures.push_back({{"file", file}, {"error", why}});
  json imports = json::array();
  for (const auto& imp : config.imports) imports.push_back(imp.name);
  json manifest = {{"images", ids.size()},
                   {"sets", sets},
                   {"failures", failures},
                   {"imports", imports},
                   {"jpeg_codec", jpeg_codec_description()}};
  write_text(dir / "manifest.json", manifest.dump(1) + "\n");
  return summary;
}

void cmd_fuse(const PipelineConfig& cfg, const fs::path& out) {
  const PipelineConfig config = with_features(cfg, out);
  const std::vector<FeatureSet> raw = load_feature_source(config);
  const LabelVector labels = labels_for(config);
  auto [train_ids, test_ids] = split_ids(raw.front().sample_ids(), labels, config);
  const FusionPlan plan = fit_fusion(raw, labels, train_ids, test_ids, config);
  save_plan(plan, out / "plan.json");

  std::string split_csv = "id,partition\n";
  for (const auto& id : raw.front().sample_ids()) {
    const bool train = std::find(train_ids.begin(), train_ids.end(), id) != train_ids.end();
    split_csv += id + (train ? ",train\n" : ",test\n");
  }
  write_text(out / "split.csv", split_csv);

  for (const auto& [part, ids] : {std::pair{"train", &train_ids}, std::pair{"test", &test_ids}}) {
    fs::create_directories(out / "fused" / part);
    for (const auto& s : apply_fusion(plan, raw, *ids)) write_feature_csv(s, out / "fused" / part / (s.name() + ".csv"));
  }
}

MklModel cmd_train(const PipelineConfig& config, const fs::path& out, const fs::path& model_path) {
  const FusionPlan plan = load_plan(out / "plan.json");
  std::vector<FeatureSet> cues;
  for (Cue c : plan.cues) {
    const std::string name(to_string(c));
    cues.push_back(load_feature_csv(out / "fused" / "train" / (name + ".csv"), name));
  }
  const LabelVector labels = labels_for(config);
  const MklModel model = fit_model(cues, labels, kernels_for_cues(config, cues), config.mkl);
  const StoredModel stored{config_digest(config), plan, model};
  save_model(stored, model_path.empty() ? out / "model.json" : model_path);

  const Prediction p = predict(model, cues);
  const auto truth = labels.aligned_to(p.sample_ids);
  json groups = json::array();
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    groups.push_back({{"cue", model.groups[g].name},
                      {"dims", model.groups[g].feature_names.size()},
                      {"kernel", model.groups[g].spec.describe()},
                      {"weight", model.d[g]}});
  }
  json report = report_header(config);
  report["train_accuracy"] = accuracy(confusion(p.labels, truth.labels()));
  report["train_samples"] = p.sample_ids.size();
  report["support_vectors"] = model.support_ids.size();
  report["groups"] = groups;
  report["objective_trace"] = model.objective_trace;
  report["outer_iterations"] = model.outer_iterations;
  report["stop_reason"] = model.stop_reason;
  report["duality_gap"] = model.gap;
  write_text(out / "train_report.json", report.dump(1) + "\n");
  return model;
}

Prediction cmd_predict(const PipelineConfig& cfg, const fs::path& model_path, const fs::path& out,
                       const std::string& subset) {
  const PipelineConfig config = with_features(cfg, out);
  const StoredModel model = load_model(model_path.empty() ? out / "model.json" : model_path);
  const std::vector<FeatureSet> raw = load_feature_source(config);
  std::vector<std::string> ids;
  if (subset == "test") {
    ids = model.plan.test_ids;
  } else if (subset == "train") {
    ids = model.plan.train_ids;
  } else if (subset == "all") {
    ids = raw.front().sample_ids();
  } else {
    throw ValidationError("predict: subset must be test, train or all");
  }
  const Prediction p = predict_raw(model, raw, ids);
  write_predictions_csv(p, out / "predictions.csv");
  return p;
}

EvaluationReport cmd_evaluate(const PipelineConfig& config, const fs::path& predictions, const fs::path& out) {
  const Prediction p = load_predictions_csv(predictions.empty() ? out / "predictions.csv" : predictions);
  const LabelVector truth = labels_for(config).aligned_to(p.sample_ids);
  const std::vector<double> dec(p.decision.data(), p.decision.data() + p.decision.size());
  const EvaluationReport r = evaluate(p.labels, dec, truth.labels());
  json report = report_header(config);
  report["accuracy"] = r.accuracy;
  report["auc"] = r.auc;
  report["samples"] = r.counts.total();
  report["counts"] = {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}};
  write_text(out / "report.json", report.dump(1) + "\n");
  write_roc_csv(r.roc, out / "roc.csv");
  return r;
}

CompareResult cmd_compare(const PipelineConfig& cfg, const fs::path& out) {
  const PipelineConfig config = with_features(cfg, out);
  const std::vector<FeatureSet> raw = load_feature_source(config);
  const CompareResult res = run_compare(raw, labels_for(config), config);
  std::string csv = "method,acc,auc\n";
  json rows = json::array();
  for (const auto& r : res.rows) {
    csv += r.method + ',' + detail::format_double(r.accuracy) + ',' + detail::format_double(r.auc) + '\n';
    rows.push_back({{"method", r.method}, {"acc", r.accuracy}, {"auc", r.auc}, {"dims", r.dims}});
  }
  write_text(out / "compare.csv", csv);
  json report = report_header(config);
  report["rows"] = rows;
  report["test_samples"] = res.test_ids.size();
  report["mkl_weights"] = res.mkl_weights;
  write_text(out / "compare.json", report.dump(1) + "\n");
  return res;
}

}  // namespace dcamkl
