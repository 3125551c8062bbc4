#pragma once

#include "flatm/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace flatm {

inline constexpr int kModelFormatVersion = 1;

// Flat key-value form of a training configuration; keys match the CLI flags.
nlohmann::json to_json(const TrainConfig& config);
// Keys absent from `j` keep the values already in `base`.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

// Model file contents. Every number is written with 17 significant digits,
// so parsing reproduces each matrix bit-exactly.
std::string serialize_model(const TopicModel& model);
TopicModel deserialize_model(std::string_view text);

void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);

}  // namespace flatm
