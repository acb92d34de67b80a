#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cvkan/model.hpp"

namespace cvkan {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

/// Architecture, flat parameters, layout descriptor and running statistics.
nlohmann::json model_to_json(const Model& model);
/// ConfigError on a version mismatch or malformed document.
Model model_from_json(const nlohmann::json& j);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cvkan
