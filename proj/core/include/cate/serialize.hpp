#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cate/models.hpp"
#include "cate/nn.hpp"

namespace cate {

// Versioned JSON weight dump. See docs/model_format.md for the layout.
inline constexpr int kModelFormatVersion = 1;

std::string network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(std::string_view text);

std::string model_to_json(const CateModel& model);
CateModel model_from_json(std::string_view text);

void save_model(const CateModel& model, const std::filesystem::path& path);
CateModel load_model(const std::filesystem::path& path);

}  // namespace cate
