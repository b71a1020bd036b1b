#pragma once

// JSON (de)serialization for configuration types.

#include "mesochain/chain.hpp"

#include <json.hpp>

namespace mesochain {

void to_json(nlohmann::json& j, const PowerLawPotential& pot);
void from_json(const nlohmann::json& j, PowerLawPotential& pot);

void to_json(nlohmann::json& j, const ChainConfig& cfg);
void from_json(const nlohmann::json& j, ChainConfig& cfg);

void to_json(nlohmann::ordered_json& j, const PowerLawPotential& pot);
void to_json(nlohmann::ordered_json& j, const ChainConfig& cfg);

} // namespace mesochain
