#include "dcamkl/serialize.hpp"

#include <fstream>
#include <sstream>

#include "dcamkl/errors.hpp"
#include "json_io.hpp"
#include "text_util.hpp"

namespace dcamkl {

namespace detail {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError("matrix: data length does not match shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const FeatureSet& set) {
  return {{"name", set.name()},
          {"sample_ids", set.sample_ids()},
          {"feature_names", set.feature_names()},
          {"values", matrix_to_json(set.values())}};
}

FeatureSet feature_set_from_json(const json& j) {
  return FeatureSet(j.at("name").get<std::string>(), matrix_from_json(j.at("values")),
                    j.at("sample_ids").get<std::vector<std::string>>(),
                    j.at("feature_names").get<std::vector<std::string>>());
}

json to_json(const Normalizer& n) { return {{"means", vector_to_json(n.means)}, {"stds", vector_to_json(n.stds)}}; }

Normalizer normalizer_from_json(const json& j) {
  Normalizer n{vector_from_json(j.at("means")), vector_from_json(j.at("stds"))};
  if (n.means.size() != n.stds.size()) throw ParseError("normalizer: means/stds length mismatch");
  return n;
}

json to_json(const KernelSpec& k) {
  json j = {{"kind", to_string(k.kind)}};
  if (k.kind == KernelKind::kRbf) {
    j["sigma"] = k.sigma;
  } else {
    j["degree"] = k.degree;
    j["scale"] = k.scale;
    j["offset"] = k.offset;
  }
  return j;
}

KernelSpec kernel_spec_from_json(const json& j) {
  KernelSpec k;
  k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  if (k.kind == KernelKind::kRbf) {
    k.sigma = j.at("sigma").get<double>();
  } else {
    k.degree = j.at("degree").get<int>();
    k.scale = j.at("scale").get<double>();
    k.offset = j.at("offset").get<double>();
  }
  k.validate();
  return k;
}

json to_json(const MdcaPlan& plan) {
  json steps = json::array();
  for (const auto& s : plan.steps) {
    steps.push_back({{"left", s.left},
                     {"right", s.right},
                     {"output", s.output},
                     {"r", s.transform.r},
                     {"sigma", vector_to_json(s.transform.sigma)},
                     {"w_x", matrix_to_json(s.transform.w_x)},
                     {"w_y", matrix_to_json(s.transform.w_y)}});
  }
  return {{"output", plan.output}, {"mode", to_string(plan.mode)}, {"order", plan.order}, {"steps", steps}};
}

MdcaPlan mdca_plan_from_json(const json& j) {
  MdcaPlan p;
  p.output = j.at("output").get<std::string>();
  p.mode = fusion_mode_from_string(j.at("mode").get<std::string>());
  p.order = j.at("order").get<std::vector<std::string>>();
  for (const auto& s : j.at("steps")) {
    MdcaStep step;
    step.left = s.at("left").get<std::string>();
    step.right = s.at("right").get<std::string>();
    step.output = s.at("output").get<std::string>();
    step.transform.r = s.at("r").get<Eigen::Index>();
    step.transform.sigma = vector_from_json(s.at("sigma"));
    step.transform.w_x = matrix_from_json(s.at("w_x"));
    step.transform.w_y = matrix_from_json(s.at("w_y"));
    if (step.transform.w_x.rows() != step.transform.r || step.transform.w_y.rows() != step.transform.r) {
      throw ParseError("fusion step '" + step.output + "': projection rows do not match r");
    }
    p.steps.push_back(std::move(step));
  }
  return p;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

}  // namespace detail

using detail::json;

namespace {

json plan_json(const FusionPlan& plan) {
  json derived = json::object();
  if (plan.derived.familiarity_reference) {
    derived["familiarity"] = {{"k", plan.derived.familiarity_k},
                              {"reference", detail::to_json(*plan.derived.familiarity_reference)}};
  }
  if (plan.derived.lof_reference) {
    derived["lof"] = {{"k", plan.derived.lof_k},
                      {"sources", plan.derived.lof_sources},
                      {"normalizer", detail::to_json(plan.derived.lof_normalizer)},
                      {"reference", detail::to_json(*plan.derived.lof_reference)}};
  }
  json norms = json::object();
  for (const auto& [name, n] : plan.normalizers) norms[name] = detail::to_json(n);
  json types = json::array();
  for (const auto& t : plan.types) {
    json jt = {{"cue", to_string(t.cue)}, {"type", t.type}, {"inputs", t.inputs}};
    if (t.mdca) jt["mdca"] = detail::to_json(*t.mdca);
    types.push_back(std::move(jt));
  }
  json cues = json::array();
  for (Cue c : plan.cues) cues.push_back(to_string(c));
  return {{"mode", to_string(plan.mode)},
          {"train_ids", plan.train_ids},
          {"test_ids", plan.test_ids},
          {"derived", derived},
          {"normalizers", norms},
          {"types", types},
          {"cues", cues}};
}

FusionPlan plan_from(const json& j) {
  FusionPlan p;
  p.mode = fusion_mode_from_string(j.at("mode").get<std::string>());
  p.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  p.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  const auto& d = j.at("derived");
  if (d.contains("familiarity")) {
    p.derived.familiarity_k = d["familiarity"].at("k").get<int>();
    p.derived.familiarity_reference = detail::feature_set_from_json(d["familiarity"].at("reference"));
  }
  if (d.contains("lof")) {
    p.derived.lof_k = d["lof"].at("k").get<int>();
    p.derived.lof_sources = d["lof"].at("sources").get<std::vector<std::string>>();
    p.derived.lof_normalizer = detail::normalizer_from_json(d["lof"].at("normalizer"));
    p.derived.lof_reference = detail::feature_set_from_json(d["lof"].at("reference"));
  }
  for (const auto& [name, n] : j.at("normalizers").items()) p.normalizers[name] = detail::normalizer_from_json(n);
  for (const auto& t : j.at("types")) {
    TypePlan tp{cue_from_string(t.at("cue").get<std::string>()), t.at("type").get<std::string>(),
                t.at("inputs").get<std::vector<std::string>>(), std::nullopt};
    if (t.contains("mdca")) tp.mdca = detail::mdca_plan_from_json(t["mdca"]);
    p.types.push_back(std::move(tp));
  }
  for (const auto& c : j.at("cues")) p.cues.push_back(cue_from_string(c.get<std::string>()));
  return p;
}

json mkl_json(const MklModel& m) {
  json groups = json::array();
  for (const auto& g : m.groups) {
    groups.push_back({{"name", g.name},
                      {"kernel", detail::to_json(g.spec)},
                      {"normalizer", detail::to_json(g.normalizer)},
                      {"feature_names", g.feature_names},
                      {"support", detail::matrix_to_json(g.support)}});
  }
  return {{"groups", groups},
          {"d", m.d},
          {"C", m.C},
          {"bias", m.bias},
          {"support_ids", m.support_ids},
          {"alpha", detail::vector_to_json(m.alpha)},
          {"labels", detail::vector_to_json(m.labels)},
          {"objective_trace", m.objective_trace},
          {"weight_trace", m.weight_trace},
          {"outer_iterations", m.outer_iterations},
          {"duality_gap", m.gap},
          {"stop_reason", m.stop_reason}};
}

MklModel mkl_from(const json& j) {
  MklModel m;
  for (const auto& g : j.at("groups")) {
    MklGroup grp;
    grp.name = g.at("name").get<std::string>();
    grp.spec = detail::kernel_spec_from_json(g.at("kernel"));
    grp.normalizer = detail::normalizer_from_json(g.at("normalizer"));
    grp.feature_names = g.at("feature_names").get<std::vector<std::string>>();
    grp.support = detail::matrix_from_json(g.at("support"));
    m.groups.push_back(std::move(grp));
  }
  m.d = j.at("d").get<std::vector<double>>();
  m.C = j.at("C").get<double>();
  m.bias = j.at("bias").get<double>();
  m.support_ids = j.at("support_ids").get<std::vector<std::string>>();
  m.alpha = detail::vector_from_json(j.at("alpha"));
  m.labels = detail::vector_from_json(j.at("labels"));
  m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  m.weight_trace = j.at("weight_trace").get<std::vector<std::vector<double>>>();
  m.outer_iterations = j.at("outer_iterations").get<std::size_t>();
  m.gap = j.at("duality_gap").get<double>();
  m.stop_reason = j.at("stop_reason").get<std::string>();

  if (m.d.size() != m.groups.size()) throw ParseError("model: weight count does not match groups");
  require_simplex(m.d);
  const auto nsv = static_cast<Eigen::Index>(m.support_ids.size());
  if (m.alpha.size() != nsv || m.labels.size() != nsv) throw ParseError("model: support arrays disagree");
  for (const auto& g : m.groups) {
    if (g.support.cols() != nsv || g.support.rows() != static_cast<Eigen::Index>(g.feature_names.size()) ||
        g.normalizer.means.size() != g.support.rows()) {
      throw ParseError("model: group '" + g.name + "' has inconsistent shapes");
    }
  }
  return m;
}

template <class F>
auto reading(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

}  // namespace

std::string plan_to_json(const FusionPlan& plan) { return plan_json(plan).dump() + "\n"; }

FusionPlan plan_from_json(const std::string& text) {
  const json j = detail::parse_json(text, "fusion plan");
  return reading("fusion plan", [&] { return plan_from(j); });
}

std::string model_to_json(const StoredModel& model) {
  const json j = {{"format", "dcamkl-model"},
                  {"version", kModelFormatVersion},
                  {"config_digest", model.config_digest},
                  {"plan", plan_json(model.plan)},
                  {"mkl", mkl_json(model.mkl)}};
  return j.dump() + "\n";
}

StoredModel model_from_json(const std::string& text) {
  const json j = detail::parse_json(text, "model");
  return reading("model", [&] {
    if (j.at("format").get<std::string>() != "dcamkl-model") throw ParseError("model: unrecognized format");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("model: unsupported version " + std::to_string(version));
    }
    return StoredModel{j.at("config_digest").get<std::string>(), plan_from(j.at("plan")), mkl_from(j.at("mkl"))};
  });
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void save_plan(const FusionPlan& plan, const std::filesystem::path& path) { write_text(path, plan_to_json(plan)); }
FusionPlan load_plan(const std::filesystem::path& path) { return plan_from_json(read_text(path)); }
void save_model(const StoredModel& model, const std::filesystem::path& path) {
  write_text(path, model_to_json(model));
}
StoredModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

void write_predictions_csv(const Prediction& p, const std::filesystem::path& path) {
  std::string text = "id,label,decision\n";
  for (std::size_t i = 0; i < p.sample_ids.size(); ++i) {
    text += p.sample_ids[i] + ',' + (p.labels[i] > 0 ? "+1" : "-1") + ',' +
            detail::format_double(p.decision(static_cast<Eigen::Index>(i))) + '\n';
  }
  write_text(path, text);
}

Prediction load_predictions_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || detail::strip_cr(line) != "id,label,decision") {
    throw ParseError(path.string() + ":1: expected header 'id,label,decision'");
  }
  Prediction p;
  std::vector<double> dec;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 3) throw ParseError(where + ": expected 3 cells");
    int label;
    if (cells[1] == "+1" || cells[1] == "1") {
      label = 1;
    } else if (cells[1] == "-1") {
      label = -1;
    } else {
      throw ParseError(where + ": label must be +1 or -1");
    }
    const auto v = detail::parse_finite(cells[2]);
    if (!v) throw ParseError(where + ": bad decision value '" + cells[2] + "'");
    p.sample_ids.push_back(cells[0]);
    p.labels.push_back(label);
    dec.push_back(*v);
  }
  p.decision = Eigen::Map<const Eigen::VectorXd>(dec.data(), static_cast<Eigen::Index>(dec.size()));
  return p;
}

}  // namespace dcamkl
