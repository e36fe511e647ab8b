#pragma once

// Run traces. CSV rows use the fixed header below with empty cells for
// absent fields; JSONL carries the same records one object per line,
// omitting absent fields. Numbers are rendered with 17 significant digits
// so parsing them back reproduces the exact doubles.

#include <optional>
#include <string>
#include <vector>

namespace vralab::harness {

inline constexpr const char* kTraceHeader =
    "step,epoch,split,loss,accuracy,effective_lr,grad_norm,velocity_norm,lambda_max,aeos_threshold";

struct TraceRecord {
  long step = 0;
  int epoch = 0;
  std::string split = "train";  // train | val | test
  double loss = 0.0;
  std::optional<double> accuracy;
  std::optional<double> effective_lr;
  std::optional<double> grad_norm;
  std::optional<double> velocity_norm;
  std::optional<double> lambda_max;
  std::optional<double> aeos_threshold;
};

enum class TraceFormat { Csv, Jsonl };

// 17-significant-digit decimal rendering (round-trip exact).
std::string format_number(double value);

std::string format_trace_csv(const std::vector<TraceRecord>& records);
std::string format_trace_jsonl(const std::vector<TraceRecord>& records);

std::vector<TraceRecord> parse_trace_csv(const std::string& text);
std::vector<TraceRecord> parse_trace_jsonl(const std::string& text);

// Writes the trace in the given format; throws IoError on failure.
void emit_trace(const std::vector<TraceRecord>& records, const std::string& path,
                TraceFormat format);

std::vector<TraceRecord> load_trace(const std::string& path, TraceFormat format);

}  // namespace vralab::harness
