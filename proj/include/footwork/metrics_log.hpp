#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

namespace footwork::log {

/// Line-delimited records, one JSON object per line with a `type` field.
/// Wall-clock timings go to a separate sidecar so the main log is a pure
/// function of the seed.
class MetricsLog {
 public:
  MetricsLog() = default;
  explicit MetricsLog(const std::string& path, const std::string& timing_path = "");

  void record(const nlohmann::json& j);
  void timing(const nlohmann::json& j);
  bool open() const { return out_.is_open(); }
  void flush();

 private:
  std::ofstream out_;
  std::ofstream timing_out_;
};

}  // namespace footwork::log
