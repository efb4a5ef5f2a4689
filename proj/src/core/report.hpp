#pragma once

#include <string>

#include "core/pipeline.hpp"

namespace dkgp {

// The machine-readable report document (JSON). Deterministic for a given
// bundle; excludes wall-clock time so reruns are byte-identical.
std::string report_json(const ReportBundle& bundle);

// Writes report.json plus per-table CSVs and per-(model, k) cumulative-return
// CSVs into dir, creating it if needed. Throws IoError with the offending
// path on failure. Re-emitting an unchanged bundle is byte-identical.
void emit_report(const ReportBundle& bundle, const std::string& dir);

}  // namespace dkgp
