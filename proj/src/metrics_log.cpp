#include "footwork/metrics_log.hpp"

#include "footwork/errors.hpp"

namespace footwork::log {

MetricsLog::MetricsLog(const std::string& path, const std::string& timing_path) {
  out_.open(path, std::ios::app);
  if (!out_) throw Error("cannot open metrics log: " + path);
  if (!timing_path.empty()) {
    timing_out_.open(timing_path, std::ios::app);
    if (!timing_out_) throw Error("cannot open timing log: " + timing_path);
  }
}

void MetricsLog::record(const nlohmann::json& j) {
  if (out_.is_open()) out_ << j.dump() << "\n";
}

void MetricsLog::timing(const nlohmann::json& j) {
  if (timing_out_.is_open()) timing_out_ << j.dump() << "\n";
}

void MetricsLog::flush() {
  if (out_.is_open()) out_.flush();
  if (timing_out_.is_open()) timing_out_.flush();
}

}  // namespace footwork::log
