#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "otafl/orchestrator.hpp"

namespace otafl {

/// 17 significant digits, so a value survives a text round trip.
std::string format_double(double v);

/// One JSON object, no trailing newline. Absent optionals are written as null.
std::string record_to_json(const RoundRecord& record);

std::string diagnostics_to_json(const ConvergenceDiagnostics& diag);

/// Columns: t,N_t,alpha,error_sq,loss,accuracy,cumulative_energy. Absent cells are empty.
std::string summary_csv_header();
std::string summary_csv_row(const RoundRecord& record);

void write_summary_csv(std::ostream& out, const std::vector<RoundRecord>& records);

/// Parses one JSONL line back into a record. Throws IngestionError.
RoundRecord record_from_json(const std::string& line);

/// Reads a records.jsonl file. Throws IngestionError naming the file and line.
std::vector<RoundRecord> read_records_jsonl(const std::filesystem::path& path);

}  // namespace otafl
