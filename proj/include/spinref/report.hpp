#pragma once

// CSV and JSON writers. Output bytes depend only on the inputs.

#include <string>
#include <vector>

#include "spinref/cooling.hpp"

namespace spinref {

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(const std::string& name);

inline constexpr const char* kRecordHeader = "phase,round,n_in,n_out,ones_in,ones_out,bias_emp,bias_pred,steps";

std::string records_csv(const std::vector<RoundRecord>& records);
std::string records_json(const std::vector<RoundRecord>& records);

/// Round records in the requested format; the ledger is appended to JSON
/// output and ignored for CSV.
std::string write_report(const std::vector<RoundRecord>& records, const YieldLedger* ledger, ReportFormat format);

/// Writes `content` to `path`, throwing std::runtime_error if it cannot.
void write_file(const std::string& path, const std::string& content);

}  // namespace spinref
