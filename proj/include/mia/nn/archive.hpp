#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mia/nn/tensor.hpp"

namespace mia::nn {

// Parameter archive shared by behaviour-policy, target-policy and classifier
// checkpoints:
//
//   {"format":"mia-param-archive","version":1,"kind":<string>,
//    "env_spec":{...}|null,"config":{...},"meta":{...},
//    "tensors":[{"name":..,"rows":r,"cols":c,"data":[column-major values]}, ...]}
//
// Values are written with round-trip precision; tensors are matched by name and shape on load.
inline constexpr int kArchiveVersion = 1;

template <typename ParamPtrs>
nlohmann::json tensors_to_json(const ParamPtrs& params) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto* p : params) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    out.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"data", data}});
  }
  return out;
}

// Throws std::runtime_error on any name / shape mismatch.
template <typename S>
void tensors_from_json(const ParamList<S>& params, const nlohmann::json& tensors) {
  if (tensors.size() != params.size())
    throw std::runtime_error("archive holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                             std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    auto* p = params[i];
    if (t.at("name").get<std::string>() != p->name || t.at("rows").get<Eigen::Index>() != p->value.rows() ||
        t.at("cols").get<Eigen::Index>() != p->value.cols())
      throw std::runtime_error("archive tensor '" + t.at("name").get<std::string>() + "' does not match '" +
                               p->name + "'");
    const auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != static_cast<std::size_t>(p->value.size()))
      throw std::runtime_error("archive tensor '" + p->name + "' has the wrong element count");
    for (Eigen::Index k = 0; k < p->value.size(); ++k) p->value.data()[k] = static_cast<S>(data[k]);
  }
}

nlohmann::json make_archive(const std::string& kind, const nlohmann::json& env_spec, const nlohmann::json& config,
                            const nlohmann::json& meta, const nlohmann::json& tensors);
void save_archive(const std::filesystem::path& path, const nlohmann::json& archive);
// Checks the format tag, version and kind.
nlohmann::json load_archive(const std::filesystem::path& path, const std::string& expected_kind);

}  // namespace mia::nn
