#pragma once

#include <filesystem>

#include <json.hpp>

#include "acdgcl/advtrain.hpp"

namespace acdgcl {

nlohmann::json train_config_to_json(const TrainConfig& config);

/// Parses a config document; unknown keys are errors.
TrainConfig train_config_from_json(const nlohmann::json& doc);

TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace acdgcl
