#pragma once

// Versioned YAML configuration. A file is merged over the built-in defaults
// tree; keys absent from the defaults are rejected and every value must have
// the type of the default it replaces. The resolved tree is plain JSON.

#include "prospero/campaign.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace prospero {

inline constexpr int kConfigVersion = 1;

/// Every key with its default value.
nlohmann::json default_config();

/// Parses YAML text and merges it over the defaults. Throws InvalidConfig.
nlohmann::json resolve_config_text(const std::string& yaml_text);

/// Throws InvalidConfig naming the path when the file cannot be read.
nlohmann::json load_config_file(const std::string& path);

/// Applies `dotted.key=value`; the value is read as a YAML scalar or flow
/// sequence. Throws InvalidConfig for unknown keys or type mismatches.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Campaign settings from a resolved tree, with masking bounds of 0 replaced
/// by the length-dependent defaults. Throws InvalidConfig.
CampaignConfig campaign_config(const nlohmann::json& config, std::size_t length);
TrainingConfig training_config(const nlohmann::json& config);

}  // namespace prospero
