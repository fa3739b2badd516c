#pragma once

// Internal helpers shared by the subcommands.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sacc/cli.h"

namespace sacc::cli {

using nlohmann::ordered_json;

ordered_json idm_to_json(const IdmParams& params);
IdmParams idm_from_json(const ordered_json& j);
ordered_json spec_to_json(const ScenarioSpec& spec);

// JSON number for phi: exact radians plus the display label.
ordered_json phi_to_json(SvoAngle phi);

// Prepares the output directory and writes manifest.json there.
void write_manifest(const std::filesystem::path& out, const std::string& subcommand,
                    ordered_json config,
                    const std::vector<std::filesystem::path>& inputs,
                    std::uint64_t seed, const std::vector<std::string>& outputs);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Text safe for a file name: "pi/4" becomes "pi_4".
std::string phi_slug(SvoAngle phi);

}  // namespace sacc::cli
