// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/directivity.hpp"
#include "hoe/harness.hpp"
#include "hoe/simulate.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace hoe {

// JSON configuration readers. Every function throws ConfigError with the
// offending key on malformed input. Relative paths resolve against base_dir.

ModelParams parse_model_params(const nlohmann::json& j);
MicGeometry parse_geometry(const nlohmann::json& j);
SourceSpec parse_source(const nlohmann::json& j, const std::string& base_dir = {});
SceneConfig parse_scene(const nlohmann::json& j, const std::string& base_dir = {});
ExperimentConfig parse_experiment(const nlohmann::json& j, const std::string& base_dir = {});

nlohmann::json read_json_file(const std::string& path);
std::string directory_of(const std::string& path);

ExperimentConfig load_experiment(const std::string& path);
SceneConfig load_scene(const std::string& path);

}  // namespace hoe
