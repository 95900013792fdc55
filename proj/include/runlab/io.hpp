#pragma once

#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/simulate.hpp"
#include "runlab/tipping.hpp"

namespace runlab {

// Configuration problems carry the offending key path in the message and map
// to exit code 64 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits: doubles round-trip exactly
std::string fmt17(double v);

// Reject any key of the object j that is not in `allowed`, naming it with its
// full path. Call at every object level so typos fail loudly instead of
// silently running defaults.
void check_keys(const nlohmann::json& j, const std::string& path,
                std::initializer_list<const char*> allowed);

double get_num(const nlohmann::json& j, const std::string& path, const char* key, double def);
double require_num(const nlohmann::json& j, const std::string& path, const char* key);

NoiseSpec noise_from_json(const nlohmann::json& j, const std::string& path);
GridSpec grid_from_json(const nlohmann::json& j, const std::string& path);

// "# runlab <version>" plus the full effective config on one comment line;
// re-running the CLI with that config reproduces the file byte-for-byte
std::string csv_header(const nlohmann::json& config);

void write_text_file(const std::filesystem::path& p, const std::string& content);

std::string profile_to_csv_string(const AttackProfile& p, const nlohmann::json& config);
std::string sim_to_csv_string(const SimReport& r, const nlohmann::json& config);
std::string sweep_to_csv_string(const std::vector<SweepRow>& rows, const nlohmann::json& config);

}  // namespace runlab
