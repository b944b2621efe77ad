#include "voxbal/report.hpp"

#include <cmath>

namespace voxbal {

using nlohmann::json;

json stats_to_json(const CorpusStats& stats) {
  json j = report_envelope("corpus_stats");
  j["total"] = stats.total;
  j["counts"] = stats.counts;
  j["proportions"] = stats.proportions;
  return j;
}

json classifier_report_to_json(const ClassifierReport& report) {
  json j = report_envelope("classifier_accuracy");
  j["total"] = report.total;
  j["correct"] = report.correct;
  j["accuracy"] = report.accuracy;
  json confusion = json::object();
  const BandLabel labels[] = {BandLabel::Male, BandLabel::Female, BandLabel::Unclassified};
  for (BandLabel truth : labels) {
    json row = json::object();
    for (BandLabel predicted : labels)
      row[band_label_name(predicted)] =
          report.confusion[static_cast<int>(truth)][static_cast<int>(predicted)];
    confusion[band_label_name(truth)] = row;
  }
  j["confusion"] = confusion;
  return j;
}

json group_metrics_to_json(const GroupMetrics& metrics) {
  json j = report_envelope("group_metrics");
  json strata = json::object();
  for (const auto& [name, sm] : metrics.per_stratum) {
    strata[name] = {{"wer", sm.wer},
                    {"cer", sm.cer},
                    {"pairs", sm.pairs},
                    {"word_substitutions", sm.words.substitutions},
                    {"word_deletions", sm.words.deletions},
                    {"word_insertions", sm.words.insertions},
                    {"word_reference_length", sm.words.reference_length}};
  }
  j["per_stratum"] = strata;
  j["bias_gap"] = metrics.bias_gap;
  return j;
}

json report_envelope(const std::string& kind) {
  return json{{"schema_version", kReportSchemaVersion},
              {"tool", "voxbal"},
              {"tool_version", kToolVersion},
              {"report", kind}};
}

json make_audit_report(const json& config_echo, const CorpusStats& before,
                       const CorpusStats& after, const json* classifier,
                       const json* group) {
  json j = report_envelope("audit");
  j["config"] = config_echo;
  j["stats_before"] = stats_to_json(before);
  j["stats_after"] = stats_to_json(after);
  if (classifier) j["classifier"] = *classifier;
  if (group) j["group_metrics"] = *group;
  validate_audit_report(j);
  return j;
}

namespace {

void require_key(const json& j, const char* key, json::value_t type, const char* where) {
  const auto it = j.find(key);
  if (it == j.end())
    throw InputError("invalid-report", std::string(where) + " missing key: " + key);
  const bool numeric_ok =
      (type == json::value_t::number_integer || type == json::value_t::number_unsigned ||
       type == json::value_t::number_float) &&
      it->is_number();
  if (!numeric_ok && it->type() != type)
    throw InputError("invalid-report", std::string(where) + " key has wrong type: " + key);
}

void validate_stats_block(const json& j, const char* where) {
  require_key(j, "total", json::value_t::number_integer, where);
  require_key(j, "counts", json::value_t::object, where);
  require_key(j, "proportions", json::value_t::object, where);
  double sum = 0.0;
  for (const auto& [key, value] : j.at("proportions").items()) {
    if (!value.is_number())
      throw InputError("invalid-report", std::string(where) + " non-numeric proportion");
    sum += value.get<double>();
  }
  if (j.at("total").get<long>() > 0 && std::abs(sum - 1.0) > 1e-9)
    throw InputError("invalid-report", std::string(where) + " proportions do not sum to 1");
}

}  // namespace

void validate_audit_report(const json& report) {
  require_key(report, "schema_version", json::value_t::number_integer, "audit report");
  require_key(report, "tool", json::value_t::string, "audit report");
  require_key(report, "tool_version", json::value_t::string, "audit report");
  require_key(report, "report", json::value_t::string, "audit report");
  require_key(report, "config", json::value_t::object, "audit report");
  require_key(report, "stats_before", json::value_t::object, "audit report");
  require_key(report, "stats_after", json::value_t::object, "audit report");
  validate_stats_block(report.at("stats_before"), "stats_before");
  validate_stats_block(report.at("stats_after"), "stats_after");
  if (report.contains("classifier")) {
    const json& c = report.at("classifier");
    require_key(c, "total", json::value_t::number_integer, "classifier");
    require_key(c, "correct", json::value_t::number_integer, "classifier");
    require_key(c, "accuracy", json::value_t::number_float, "classifier");
    require_key(c, "confusion", json::value_t::object, "classifier");
  }
  if (report.contains("group_metrics")) {
    const json& g = report.at("group_metrics");
    require_key(g, "per_stratum", json::value_t::object, "group_metrics");
    require_key(g, "bias_gap", json::value_t::number_float, "group_metrics");
  }
}

std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace voxbal
