#include "vralab/harness/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vralab/errors.hpp"

namespace vralab::harness {

namespace {

using nlohmann::json;

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::invalid_argument("trace: bad numeric cell '" + s + "'");
  return v;
}

std::optional<double> get_optional(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (j.at(key).is_null()) return std::nan("");
  return j.at(key).get<double>();
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_trace_csv(const std::vector<TraceRecord>& records) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.epoch);
    out += ',';
    out += r.split;
    out += ',';
    out += format_number(r.loss);
    out += ',';
    out += cell(r.accuracy);
    out += ',';
    out += cell(r.effective_lr);
    out += ',';
    out += cell(r.grad_norm);
    out += ',';
    out += cell(r.velocity_norm);
    out += ',';
    out += cell(r.lambda_max);
    out += ',';
    out += cell(r.aeos_threshold);
    out += '\n';
  }
  return out;
}

std::string format_trace_jsonl(const std::vector<TraceRecord>& records) {
  // Lines are assembled by hand so doubles keep the 17-digit rendering.
  // Negative zero needs a decimal point: JSON parsers may read a bare "-0"
  // as the integer 0 and drop the sign.
  std::string out;
  auto number = [](double v) {
    return (v == 0.0 && std::signbit(v)) ? std::string("-0.0") : format_number(v);
  };
  auto field = [&](std::string& line, const char* key, const std::optional<double>& v) {
    if (!v) return;
    line += ",\"";
    line += key;
    line += "\":";
    line += std::isfinite(*v) ? number(*v) : "null";
  };
  for (const auto& r : records) {
    std::string line = "{\"step\":" + std::to_string(r.step);
    line += ",\"epoch\":" + std::to_string(r.epoch);
    line += ",\"split\":\"" + r.split + "\"";
    line += ",\"loss\":";
    line += std::isfinite(r.loss) ? number(r.loss) : "null";
    field(line, "accuracy", r.accuracy);
    field(line, "effective_lr", r.effective_lr);
    field(line, "grad_norm", r.grad_norm);
    field(line, "velocity_norm", r.velocity_norm);
    field(line, "lambda_max", r.lambda_max);
    field(line, "aeos_threshold", r.aeos_threshold);
    line += "}\n";
    out += line;
  }
  return out;
}

std::vector<TraceRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw std::invalid_argument("trace: missing or unexpected CSV header");
  std::vector<TraceRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() != 10) throw std::invalid_argument("trace: expected 10 CSV cells");
    TraceRecord r;
    r.step = std::stol(cells[0]);
    r.epoch = std::stoi(cells[1]);
    r.split = cells[2];
    r.loss = parse_cell(cells[3]).value();  // from_chars handles nan and inf
    r.accuracy = parse_cell(cells[4]);
    r.effective_lr = parse_cell(cells[5]);
    r.grad_norm = parse_cell(cells[6]);
    r.velocity_norm = parse_cell(cells[7]);
    r.lambda_max = parse_cell(cells[8]);
    r.aeos_threshold = parse_cell(cells[9]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<TraceRecord> parse_trace_jsonl(const std::string& text) {
  std::vector<TraceRecord> records;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TraceRecord r;
    r.step = j.at("step").get<long>();
    r.epoch = j.at("epoch").get<int>();
    r.split = j.at("split").get<std::string>();
    r.loss = j.at("loss").is_null() ? std::nan("") : j.at("loss").get<double>();
    r.accuracy = get_optional(j, "accuracy");
    r.effective_lr = get_optional(j, "effective_lr");
    r.grad_norm = get_optional(j, "grad_norm");
    r.velocity_norm = get_optional(j, "velocity_norm");
    r.lambda_max = get_optional(j, "lambda_max");
    r.aeos_threshold = get_optional(j, "aeos_threshold");
    records.push_back(std::move(r));
  }
  return records;
}

void emit_trace(const std::vector<TraceRecord>& records, const std::string& path,
                TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << (format == TraceFormat::Csv ? format_trace_csv(records) : format_trace_jsonl(records));
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<TraceRecord> load_trace(const std::string& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return format == TraceFormat::Csv ? parse_trace_csv(buf.str()) : parse_trace_jsonl(buf.str());
}

}  // namespace vralab::harness
