#include "laneracer/report.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "laneracer/error.hpp"

namespace lr::harness {

using ojson = nlohmann::ordered_json;

namespace {

ojson metrics_json(const EpisodeMetrics& m) {
  ojson j;
  j["completed"] = m.completed;
  j["lap_seconds"] = m.lap_seconds ? ojson(*m.lap_seconds) : ojson(nullptr);
  j["position_deviation_mae"] = m.position_deviation_mae;
  j["average_speed"] = m.average_speed;
  j["failure_reason"] = failure_str(m.failure);
  j["elapsed"] = m.elapsed;
  j["path_length"] = m.path_length;
  j["ticks"] = m.ticks;
  return j;
}

EpisodeMetrics metrics_from(const nlohmann::json& j) {
  EpisodeMetrics m;
  m.completed = j.at("completed").get<bool>();
  if (!j.at("lap_seconds").is_null()) m.lap_seconds = j.at("lap_seconds").get<double>();
  m.position_deviation_mae = j.at("position_deviation_mae").get<double>();
  m.average_speed = j.at("average_speed").get<double>();
  const auto f = parse_failure(j.at("failure_reason").get<std::string>());
  if (!f) fail(ErrorCode::format, "report: unknown failure reason");
  m.failure = *f;
  m.elapsed = j.at("elapsed").get<double>();
  m.path_length = j.at("path_length").get<double>();
  m.ticks = j.at("ticks").get<std::size_t>();
  return m;
}

ojson internal_json(const InternalMetrics& m) { return ojson{{"mae", m.mae}, {"mse", m.mse}}; }

ojson epoch_json(const EpochRecord& e) {
  ojson j;
  j["epoch"] = e.epoch;
  j["train"] = internal_json(e.train);
  j["val"] = internal_json(e.val);
  j["seconds"] = e.seconds;
  return j;
}

std::optional<sim::LineColor> parse_line(const std::string& s) {
  for (auto c : {sim::LineColor::red, sim::LineColor::white, sim::LineColor::none})
    if (sim::line_color_str(c) == s) return c;
  return std::nullopt;
}

std::optional<sim::RoadColor> parse_road(const std::string& s) {
  for (auto c : {sim::RoadColor::grey, sim::RoadColor::white})
    if (sim::road_color_str(c) == s) return c;
  return std::nullopt;
}

template <class F>
auto parse_guard(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, what + ": " + e.what());
  }
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string episode_to_json(const EpisodeMetrics& m) { return metrics_json(m).dump(2) + "\n"; }

EpisodeMetrics episode_from_json(const std::string& text) {
  return parse_guard("episode metrics", [&] { return metrics_from(nlohmann::json::parse(text)); });
}

std::string history_to_json(const TrainHistory& h, const std::string& model_id) {
  ojson j;
  j["model"] = model_id;
  j["initial"] = epoch_json(h.initial);
  auto eps = ojson::array();
  for (const auto& e : h.epochs) eps.push_back(epoch_json(e));
  j["epochs"] = eps;
  j["train_episodes"] = h.split.train;
  j["val_episodes"] = h.split.val;
  return j.dump(2) + "\n";
}

std::string suite_to_json(const SuiteReport& r) {
  ojson j;
  j["suite"] = r.suite;
  j["circuit"] = r.circuit;
  j["repeats"] = r.repeats;
  j["seeds"] = r.seeds;
  j["brains"] = r.brains;
  auto conds = ojson::array();
  for (const auto& c : r.conditions) {
    ojson jc;
    jc["name"] = c.name;
    jc["line"] = sim::line_color_str(c.variation.line);
    jc["road"] = sim::road_color_str(c.variation.road);
    jc["walls"] = c.variation.walls;
    jc["camera_offset"] = camera_offset_str(c.offset);
    jc["offset_m"] = c.offset_magnitude;
    jc["pitch_down"] = c.pitch_down;
    jc["noise_p"] = c.noise_p;
    conds.push_back(jc);
  }
  j["conditions"] = conds;
  auto cells = ojson::array();
  for (const auto& c : r.cells) {
    ojson jc;
    jc["brain"] = c.brain;
    jc["condition"] = c.condition;
    jc["mean"] = metrics_json(c.mean);
    auto runs = ojson::array();
    for (const auto& m : c.runs) runs.push_back(metrics_json(m));
    jc["runs"] = runs;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

SuiteReport suite_from_json(const std::string& text) {
  return parse_guard("suite report", [&] {
    const auto j = nlohmann::json::parse(text);
    SuiteReport r;
    r.suite = j.at("suite").get<std::string>();
    r.circuit = j.at("circuit").get<std::string>();
    r.repeats = j.at("repeats").get<int>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.brains = j.at("brains").get<std::vector<std::string>>();
    for (const auto& jc : j.at("conditions")) {
      Condition c;
      c.name = jc.at("name").get<std::string>();
      const auto line = parse_line(jc.at("line").get<std::string>());
      const auto road = parse_road(jc.at("road").get<std::string>());
      const auto off = parse_camera_offset(jc.at("camera_offset").get<std::string>());
      if (!line || !road || !off) fail(ErrorCode::format, "suite report: bad condition '" + c.name + "'");
      c.variation = {*line, *road, jc.at("walls").get<bool>()};
      c.offset = *off;
      c.offset_magnitude = jc.at("offset_m").get<double>();
      c.pitch_down = jc.at("pitch_down").get<double>();
      c.noise_p = jc.at("noise_p").get<double>();
      r.conditions.push_back(c);
    }
    for (const auto& jc : j.at("cells")) {
      SuiteCell c;
      c.brain = jc.at("brain").get<std::string>();
      c.condition = jc.at("condition").get<std::string>();
      c.mean = metrics_from(jc.at("mean"));
      for (const auto& m : jc.at("runs")) c.runs.push_back(metrics_from(m));
      r.cells.push_back(std::move(c));
    }
    if (r.cells.size() != r.brains.size() * r.conditions.size()) fail(ErrorCode::format, "suite report: grid is incomplete");
    return r;
  });
}

std::string suite_to_csv(const SuiteReport& r) {
  std::ostringstream out;
  out << "brain";
  for (const auto& c : r.conditions) out << ',' << c.name << " lap_s," << c.name << " mae_m";
  out << '\n';
  for (const auto& b : r.brains) {
    out << b;
    for (const auto& c : r.conditions) {
      const EpisodeMetrics& m = r.cell(b, c.name).mean;
      if (m.completed) {
        out << ',' << fixed2(*m.lap_seconds) << ',' << fixed2(m.position_deviation_mae);
      } else {
        out << ",-,-";
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) fail(ErrorCode::io, "write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit_report(const SuiteReport& r, const std::string& path, ReportFormat format) {
  write_text(path, format == ReportFormat::csv ? suite_to_csv(r) : suite_to_json(r));
}

void emit_report(const SuiteReport& r, const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  emit_report(r, path, csv ? ReportFormat::csv : ReportFormat::json);
}

SuiteReport read_report(const std::string& path) { return suite_from_json(read_text(path)); }

}  // namespace lr::harness
