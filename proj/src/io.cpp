#include "runlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "runlab/version.hpp"

namespace runlab {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const nlohmann::json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config error: " + path + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("config error: unknown key " + path + "." + item.key());
  }
}

double get_num(const nlohmann::json& j, const std::string& path, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number())
    throw ConfigError("config error: " + path + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double require_num(const nlohmann::json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError("config error: missing key " + path + "." + key);
  return get_num(j, path, key, 0.0);
}

NoiseSpec noise_from_json(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path, {"kind", "sigma", "alpha", "grid", "density"});
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("config error: missing key " + path + ".kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform" || kind == "uniform_bounded")
    return NoiseSpec::uniform_bounded(require_num(j, path, "sigma"));
  if (kind == "gaussian") {
    if (j.contains("alpha")) return NoiseSpec::gaussian_alpha(require_num(j, path, "alpha"));
    return NoiseSpec::gaussian_sigma(require_num(j, path, "sigma"));
  }
  if (kind == "custom" || kind == "custom_table") {
    if (!j.contains("grid") || !j.contains("density"))
      throw ConfigError("config error: " + path + " custom noise needs grid and density");
    return NoiseSpec::custom_table(j.at("grid").get<std::vector<double>>(),
                                   j.at("density").get<std::vector<double>>());
  }
  throw ConfigError("config error: " + path + ".kind must be uniform, gaussian, or custom");
}

GridSpec grid_from_json(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path, {"n", "pad_lo", "pad_hi", "cover_lo", "cover_hi"});
  GridSpec g;
  g.n = static_cast<int>(get_num(j, path, "n", g.n));
  g.pad_lo = get_num(j, path, "pad_lo", g.pad_lo);
  g.pad_hi = get_num(j, path, "pad_hi", g.pad_hi);
  g.cover_lo = get_num(j, path, "cover_lo", g.cover_lo);
  g.cover_hi = get_num(j, path, "cover_hi", g.cover_hi);
  return g;
}

std::string csv_header(const nlohmann::json& config) {
  std::string s = "# ";
  s += kVersion;
  s += "\n# config: ";
  s += config.dump();
  s += "\n";
  return s;
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  os << content;
}

std::string profile_to_csv_string(const AttackProfile& p, const nlohmann::json& config) {
  std::ostringstream os;
  os << csv_header(config);
  p.to_csv(os);
  return os.str();
}

std::string sim_to_csv_string(const SimReport& r, const nlohmann::json& config) {
  std::ostringstream os;
  os << csv_header(config);
  os << "theta,rep,A_theory,A_realized,stderr,z,success,resampled\n";
  for (const auto& row : r.rows) {
    os << fmt17(row.theta) << ',' << row.rep << ',' << fmt17(row.a_theory) << ','
       << fmt17(row.a_realized) << ',' << fmt17(row.stderr_val) << ',' << fmt17(row.z_score)
       << ',' << (row.success ? 1 : 0) << ',' << row.resampled << "\n";
  }
  return os.str();
}

std::string sweep_to_csv_string(const std::vector<SweepRow>& rows, const nlohmann::json& config) {
  std::ostringstream os;
  os << csv_header(config);
  os << "alpha,theta_lo,theta_hi,max_roots\n";
  for (const auto& row : rows) {
    os << fmt17(row.alpha) << ',' << fmt17(row.theta_lo) << ',' << fmt17(row.theta_hi) << ','
       << row.max_roots << "\n";
  }
  return os.str();
}

}  // namespace runlab
