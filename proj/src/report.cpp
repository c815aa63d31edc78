#include "spinref/report.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace spinref {

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

std::string records_csv(const std::vector<RoundRecord>& records) {
  std::string out = kRecordHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.phase) + ',' + std::to_string(r.round) + ',' + std::to_string(r.n_in) + ',' +
           std::to_string(r.n_out) + ',' + std::to_string(r.ones_in) + ',' + std::to_string(r.ones_out) + ',' +
           format_double(r.bias_emp) + ',' + format_double(r.bias_pred) + ',' + std::to_string(r.steps) + '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json to_json(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["phase"] = r.phase;
  j["round"] = r.round;
  j["n_in"] = r.n_in;
  j["n_out"] = r.n_out;
  j["ones_in"] = r.ones_in;
  j["ones_out"] = r.ones_out;
  // NaN (empty output) has no JSON spelling.
  j["bias_emp"] = r.bias_emp == r.bias_emp ? nlohmann::ordered_json(r.bias_emp) : nlohmann::ordered_json();
  j["bias_pred"] = r.bias_pred;
  j["steps"] = r.steps;
  j["k"] = r.k;
  j["u"] = r.aux_u;
  j["blocks"] = r.blocks;
  return j;
}

}  // namespace

std::string records_json(const std::vector<RoundRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(2);
}

std::string write_report(const std::vector<RoundRecord>& records, const YieldLedger* ledger, ReportFormat format) {
  if (format == ReportFormat::Csv) return records_csv(records);
  nlohmann::ordered_json j;
  j["records"] = nlohmann::ordered_json::parse(records_json(records));
  if (ledger) j["ledger"] = nlohmann::ordered_json::parse(ledger->to_json());
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  if (!f.flush()) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace spinref
