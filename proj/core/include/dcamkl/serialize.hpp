#pragma once

#include <filesystem>
#include <string>

#include "dcamkl/pipeline.hpp"

namespace dcamkl {

inline constexpr int kModelFormatVersion = 1;

std::string plan_to_json(const FusionPlan& plan);
FusionPlan plan_from_json(const std::string& text);

std::string model_to_json(const StoredModel& model);
StoredModel model_from_json(const std::string& text);

void save_plan(const FusionPlan& plan, const std::filesystem::path& path);
FusionPlan load_plan(const std::filesystem::path& path);
void save_model(const StoredModel& model, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

void write_predictions_csv(const Prediction& p, const std::filesystem::path& path);
Prediction load_predictions_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dcamkl
