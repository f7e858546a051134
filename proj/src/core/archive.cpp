#include "mia/nn/archive.hpp"

#include <fstream>

#include "mia/core/errors.hpp"

namespace mia::nn {

nlohmann::json make_archive(const std::string& kind, const nlohmann::json& env_spec, const nlohmann::json& config,
                            const nlohmann::json& meta, const nlohmann::json& tensors) {
  return {{"format", "mia-param-archive"}, {"version", kArchiveVersion}, {"kind", kind},
          {"env_spec", env_spec},          {"config", config},           {"meta", meta},
          {"tensors", tensors}};
}

void save_archive(const std::filesystem::path& path, const nlohmann::json& archive) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write archive " + path.string());
  out << archive.dump() << '\n';
}

nlohmann::json load_archive(const std::filesystem::path& path, const std::string& expected_kind) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open archive " + path.string());
  nlohmann::json a;
  try {
    a = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("archive " + path.string() + ": " + e.what());
  }
  if (a.value("format", "") != "mia-param-archive" || a.value("version", 0) != kArchiveVersion)
    throw FormatError("archive " + path.string() + ": not a supported parameter archive");
  if (a.value("kind", "") != expected_kind)
    throw FormatError("archive " + path.string() + ": holds '" + a.value("kind", "") + "', expected '" +
                      expected_kind + "'");
  return a;
}

}  // namespace mia::nn
