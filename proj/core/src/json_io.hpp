#pragma once

// JSON conversions shared by the config, plan and model readers/writers.

#include <string>
#include <vector>

#include <json.hpp>

#include "dcamkl/dataset.hpp"
#include "dcamkl/fusion.hpp"
#include "dcamkl/kernels.hpp"

namespace dcamkl::detail {

using json = nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

json to_json(const FeatureSet& set);
FeatureSet feature_set_from_json(const json& j);
json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const json& j);
json to_json(const KernelSpec& k);
KernelSpec kernel_spec_from_json(const json& j);
json to_json(const MdcaPlan& plan);
MdcaPlan mdca_plan_from_json(const json& j);

/// Parses text, mapping library errors to ParseError naming `what`.
json parse_json(const std::string& text, const std::string& what);

}  // namespace dcamkl::detail
