#pragma once

#include <string>

#include <json.hpp>

#include "qkd/engine.hpp"

namespace qkd {

/// Fixed-format number rendering shared by every CSV writer.
std::string format_number(double v);

/// Aggregates and per-class metrics; the time series is left to the CSV.
nlohmann::json metrics_to_json(const MetricsRecord& m);

/// One row per recorded slot.
std::string series_to_csv(const MetricsRecord& m);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace qkd
