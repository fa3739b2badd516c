#include "cli/files.h"

#include <array>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "sacc/errors.h"
#include "sacc/ingest.h"

namespace sacc::cli {
namespace fs = std::filesystem;

ordered_json idm_to_json(const IdmParams& p) {
  return ordered_json{{"v0", p.v0},     {"a_max", p.a_max}, {"b", p.b},
                      {"s0", p.s0},     {"tau", p.tau},     {"delta", p.delta}};
}

IdmParams idm_from_json(const ordered_json& j) {
  IdmParams p;
  p.v0 = j.at("v0").get<double>();
  p.a_max = j.at("a_max").get<double>();
  p.b = j.at("b").get<double>();
  p.s0 = j.at("s0").get<double>();
  p.tau = j.at("tau").get<double>();
  p.delta = j.at("delta").get<double>();
  return p;
}

ordered_json spec_to_json(const ScenarioSpec& spec) {
  ordered_json leader = std::visit(
      [](const auto& profile) -> ordered_json {
        using T = std::decay_t<decltype(profile)>;
        if constexpr (std::is_same_v<T, SinusoidProfile>) {
          return {{"kind", "sinusoid"},
                  {"mean", profile.mean},
                  {"amplitude", profile.amplitude},
                  {"period", profile.period},
                  {"phase", profile.phase}};
        } else if constexpr (std::is_same_v<T, PiecewiseProfile>) {
          ordered_json segments = ordered_json::array();
          for (const auto& s : profile.segments) {
            segments.push_back({{"duration", s.duration}, {"speed", s.speed}});
          }
          return {{"kind", "piecewise"}, {"segments", segments}};
        } else {
          return {{"kind", "csv"},
                  {"path", profile.path.string()},
                  {"vehicle_id", profile.vehicle_id}};
        }
      },
      spec.leader);
  ordered_json followers = ordered_json::array();
  for (const auto& p : spec.follower_params) followers.push_back(idm_to_json(p));
  return {{"n_vehicles", spec.n_vehicles},
          {"leader", leader},
          {"initial_spacings", spec.initial_spacings},
          {"av_reference", idm_to_json(spec.av_reference)},
          {"follower_params", followers},
          {"duration", spec.duration},
          {"dt", spec.dt},
          {"vehicle_length", spec.vehicle_length},
          {"min_spacing_floor", spec.min_spacing_floor},
          {"leader_noise_std", spec.leader_noise_std},
          {"seed", spec.seed}};
}

ordered_json phi_to_json(SvoAngle phi) {
  return {{"radians", phi.radians()}, {"label", format_svo_angle(phi)}};
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 failed for " + path.string());
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_manifest(const fs::path& out, const std::string& subcommand,
                    ordered_json config, const std::vector<fs::path>& inputs,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", out.string(), ec.message()));

  ordered_json digests = ordered_json::object();
  for (const auto& p : inputs) digests[p.string()] = sha256_file(p);
  ordered_json manifest = {{"tool", "sacc"},
                           {"version", kToolVersion},
                           {"subcommand", subcommand},
                           {"seed", seed},
                           {"config", std::move(config)},
                           {"inputs", digests},
                           {"outputs", outputs}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string phi_slug(SvoAngle phi) {
  std::string s = format_svo_angle(phi);
  for (char& c : s) {
    if (c == '/' || c == '.') c = '_';
    if (c == '*') c = 'x';
  }
  return s;
}

Scenario load_scenario(const fs::path& json_path, std::optional<double> dt) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text(json_path));
    const fs::path csv = json_path.parent_path() / j.at("trajectories").get<std::string>();
    const auto series = load_csv(csv, CsvOptions{dt});
    std::vector<IdmParams> followers;
    for (const auto& f : j.at("follower_params")) followers.push_back(idm_from_json(f));
    return scenario_from_trajectories(series, followers,
                                      j.at("vehicle_length").get<double>(),
                                      j.at("min_spacing_floor").get<double>());
  } catch (const ordered_json::exception& e) {
    throw FormatError(fmt::format("{}: {}", json_path.string(), e.what()));
  }
}

}  // namespace sacc::cli
