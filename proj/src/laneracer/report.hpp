#pragma once

#include <string>

#include "laneracer/suite.hpp"
#include "laneracer/train.hpp"

namespace lr::harness {

enum class ReportFormat { json, csv };

std::string episode_to_json(const EpisodeMetrics& m);
EpisodeMetrics episode_from_json(const std::string& text);

std::string history_to_json(const TrainHistory& h, const std::string& model_id);

std::string suite_to_json(const SuiteReport& r);
SuiteReport suite_from_json(const std::string& text);
// Brains as rows; per condition a lap-seconds and a deviation column; "-" marks failures.
std::string suite_to_csv(const SuiteReport& r);

// Format from the argument; throws io errors for unwritable paths.
void emit_report(const SuiteReport& r, const std::string& path, ReportFormat format);
// Format from the extension (.csv, otherwise JSON).
void emit_report(const SuiteReport& r, const std::string& path);
SuiteReport read_report(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace lr::harness
