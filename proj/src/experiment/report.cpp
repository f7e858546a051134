#include "mia/experiment/report.hpp"

#include <fstream>

#include "mia/core/errors.hpp"

namespace mia {

using json = nlohmann::json;

namespace {

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json setting_to_json(const Setting& s) {
  return {{"t_max", s.t_max},
          {"clip_length", s.clip_length},
          {"mode", std::string(to_string(s.mode))},
          {"correlation", std::string(to_string(s.correlation))}};
}

Setting setting_from_json(const json& j) {
  return Setting{j.at("t_max").get<std::size_t>(), j.at("clip_length").get<std::size_t>(),
                 parse_attack_mode(j.at("mode").get<std::string>()),
                 parse_correlation(j.at("correlation").get<std::string>())};
}

json row_to_json(const MetricRow& r) {
  return {{"env", r.env},     {"mode", r.mode}, {"t_max", r.t_max}, {"L", r.clip_length},
          {"m", r.m},         {"theta", r.theta}, {"seed", r.seed}, {"ACC", r.acc},
          {"PR", opt(r.pr)},  {"RE", opt(r.re)}, {"F1", opt(r.f1)}, {"MCC", r.mcc}};
}

MetricRow row_from_json(const json& j) {
  MetricRow r;
  r.env = j.at("env").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.t_max = j.at("t_max").get<std::size_t>();
  r.clip_length = j.at("L").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
  r.theta = j.at("theta").get<double>();
  r.seed = j.at("seed").get<std::int64_t>();
  r.acc = j.at("ACC").get<double>();
  r.pr = opt_from(j.at("PR"));
  r.re = opt_from(j.at("RE"));
  r.f1 = opt_from(j.at("F1"));
  r.mcc = j.at("MCC").get<double>();
  return r;
}

json cell_to_json(const CellResult& c) {
  json rows = json::array(), roc = json::array();
  for (const auto& r : c.rows) rows.push_back(row_to_json(r));
  for (const auto& p : c.roc) roc.push_back({{"theta", p.theta}, {"FPR", p.fpr}, {"RE", p.recall}});
  return {{"setting", setting_to_json(c.setting)},
          {"seed", c.seed},
          {"ok", c.ok},
          {"error", c.error},
          {"rows", rows},
          {"roc", roc},
          {"shadow_test_accuracy", c.shadow_test_accuracy},
          {"evaluation_samples", c.evaluation_samples}};
}

CellResult cell_from_json(const json& j) {
  CellResult c;
  c.setting = setting_from_json(j.at("setting"));
  c.seed = j.at("seed").get<std::int64_t>();
  c.ok = j.at("ok").get<bool>();
  c.error = j.at("error").get<std::string>();
  for (const auto& r : j.at("rows")) c.rows.push_back(row_from_json(r));
  for (const auto& p : j.at("roc"))
    c.roc.push_back(RocPoint{p.at("theta").get<double>(), p.at("FPR").get<double>(), p.at("RE").get<double>()});
  c.shadow_test_accuracy = j.at("shadow_test_accuracy").get<double>();
  c.evaluation_samples = j.at("evaluation_samples").get<std::size_t>();
  return c;
}

json aggregate_to_json(const Aggregate& a) {
  return {{"setting", setting_to_json(a.setting)},
          {"theta", a.theta},
          {"n", a.n},
          {"partial", a.partial},
          {"acc_mean", a.acc_mean},
          {"acc_stderr", a.acc_stderr},
          {"mcc_mean", a.mcc_mean},
          {"mcc_stderr", a.mcc_stderr}};
}

Aggregate aggregate_from_json(const json& j) {
  Aggregate a;
  a.setting = setting_from_json(j.at("setting"));
  a.theta = j.at("theta").get<double>();
  a.n = j.at("n").get<std::size_t>();
  a.partial = j.at("partial").get<bool>();
  a.acc_mean = j.at("acc_mean").get<double>();
  a.acc_stderr = j.at("acc_stderr").get<double>();
  a.mcc_mean = j.at("mcc_mean").get<double>();
  a.mcc_stderr = j.at("mcc_stderr").get<double>();
  return a;
}

json curve_to_json(const LearningCurve& c) {
  json out = json::array();
  for (const auto& p : c.points()) out.push_back({p.step, p.mean_return, p.stderr_return});
  return out;
}

LearningCurve curve_from_json(const json& j) {
  LearningCurve c;
  for (const auto& p : j)
    c.add(p.at(0).get<std::size_t>(), EvaluationResult{p.at(1).get<double>(), p.at(2).get<double>()});
  return c;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

json to_json(const RunReport& r) {
  json cells = json::array(), aggregates = json::array(), curves = json::object(), returns = json::object();
  for (const auto& c : r.cells) cells.push_back(cell_to_json(c));
  for (const auto& a : r.aggregates) aggregates.push_back(aggregate_to_json(a));
  for (const auto& [k, c] : r.curves) curves[k] = curve_to_json(c);
  for (const auto& [k, v] : r.behavior_returns) returns[k] = v;
  return {{"format", "mia-run-report"},
          {"version", 1},
          {"config", r.config},
          {"config_hash", r.config_hash},
          {"code_version", r.code_version},
          {"cells", cells},
          {"aggregates", aggregates},
          {"curves", curves},
          {"behavior_returns", returns}};
}

RunReport run_report_from_json(const json& j) {
  try {
    if (j.at("format") != "mia-run-report" || j.at("version") != 1)
      throw FormatError("not a version-1 run report");
    RunReport r;
    r.config = j.at("config");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.code_version = j.at("code_version").get<std::string>();
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    for (const auto& a : j.at("aggregates")) r.aggregates.push_back(aggregate_from_json(a));
    for (const auto& [k, c] : j.at("curves").items()) r.curves[k] = curve_from_json(c);
    for (const auto& [k, v] : j.at("behavior_returns").items()) r.behavior_returns[k] = v.get<double>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("run report: ") + e.what());
  }
}

RunReport load_run_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return run_report_from_json(j);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "roc");
  fs::create_directories(dir / "curves");

  const auto rows = report.rows();
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, rows);
  }
  const std::string env = report.config.value("env", std::string{});
  const std::size_t m = report.config.value("m", std::size_t{1});
  {
    auto out = open_out(dir / "aggregate.csv");
    out << "env,mode,T_max,L,m,theta,n,partial,ACC_mean,ACC_stderr,MCC_mean,MCC_stderr\n";
    for (const auto& a : report.aggregates)
      out << env << ',' << a.setting.mode_label() << ',' << a.setting.t_max << ',' << a.setting.clip_length << ','
          << (a.setting.mode == AttackMode::collective ? m : 1) << ',' << format_number(a.theta) << ',' << a.n << ','
          << (a.partial ? 1 : 0) << ',' << format_number(a.acc_mean) << ',' << format_number(a.acc_stderr) << ','
          << format_number(a.mcc_mean) << ',' << format_number(a.mcc_stderr) << '\n';
  }
  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    auto out = open_out(dir / "roc" / (c.setting.key() + "_seed" + std::to_string(c.seed) + ".csv"));
    write_roc_csv(out, c.roc);
  }
  for (const auto& [key, curve] : report.curves) {
    auto out = open_out(dir / "curves" / (key + ".csv"));
    write_learning_curve_csv(out, curve);
  }

  json best = json::object(), failures = json::array(), shadow = json::object();
  std::map<std::string, std::vector<std::pair<double, double>>> sweeps;
  std::map<std::string, Setting> by_key;
  for (const auto& a : report.aggregates)
    if (a.n > 0) {
      sweeps[a.setting.key()].emplace_back(a.theta, a.acc_mean);
      by_key[a.setting.key()] = a.setting;
    }
  for (const auto& [key, sweep] : sweeps) best[key] = best_threshold(sweep);
  for (const auto& c : report.cells) {
    if (!c.ok) failures.push_back({{"setting", c.setting.key()}, {"seed", c.seed}, {"error", c.error}});
    else shadow[c.setting.key() + "_seed" + std::to_string(c.seed)] = c.shadow_test_accuracy;
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates) aggregates.push_back(aggregate_to_json(a));
  const json summary = {{"provenance", {{"config_hash", report.config_hash}, {"code_version", report.code_version}}},
                        {"cells", report.cells.size()},
                        {"completed", report.cells.size() - failures.size()},
                        {"aggregates", aggregates},
                        {"best_threshold", best},
                        {"shadow_test_accuracy", shadow},
                        {"behavior_returns", report.behavior_returns},
                        {"failures", failures}};
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "run.json");
    out << to_json(report).dump() << '\n';
  }
}

}  // namespace mia
