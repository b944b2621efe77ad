#pragma once

#include <string>

#include "voxbal/balance.hpp"
#include "voxbal/corpus.hpp"
#include "voxbal/metrics.hpp"
#include "voxbal/pitch.hpp"

#include "json.hpp"

namespace voxbal {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

nlohmann::json stats_to_json(const CorpusStats& stats);
nlohmann::json classifier_report_to_json(const ClassifierReport& report);
nlohmann::json group_metrics_to_json(const GroupMetrics& metrics);

// Self-describing report envelope: schema_version, tool, tool_version, and a
// report kind. Reports carry no timestamps or host data so reruns are
// byte-identical.
nlohmann::json report_envelope(const std::string& kind);

// Full audit report: config echo plus before/after stats and optional
// classifier / group-metrics blocks.
nlohmann::json make_audit_report(const nlohmann::json& config_echo,
                                 const CorpusStats& before, const CorpusStats& after,
                                 const nlohmann::json* classifier = nullptr,
                                 const nlohmann::json* group = nullptr);

// Structural validation against the published schema
// (schemas/audit_report.schema.json). Throws InputError on violations; every
// emission goes through this.
void validate_audit_report(const nlohmann::json& report);

// Canonical serialization used for all emitted JSON: 2-space indent, sorted
// keys (nlohmann's object ordering), trailing newline.
std::string dump_report(const nlohmann::json& j);

}  // namespace voxbal
