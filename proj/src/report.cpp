#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "tnt/analysis.hpp"
#include "tnt/error.hpp"

namespace tnt {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string emit_csv(const RunReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : report.rows) {
    out += csv_field(r.dataset) + ',' + std::to_string(r.records) + ',' + fixed(r.accuracy, 12) +
           ',' + fixed(r.accuracy_coverage, 12) + ',' + fixed(r.mean_tokens, 12) + ',' +
           fixed(r.te, 12) + ',' + fixed(r.nonthinking_ratio, 12) + ',' +
           fixed(r.thinking_mean_tokens, 12) + ',' + fixed(r.nonthinking_mean_tokens, 12) + ',' +
           fixed(r.verb_probability, 12) + ',' + fixed(r.over_budget_rate, 12) + '\n';
  }
  return out;
}

nlohmann::json row_to_json(const ReportRow& r) {
  return {{"dataset", r.dataset},
          {"records", r.records},
          {"accuracy", r.accuracy},
          {"accuracy_coverage", r.accuracy_coverage},
          {"mean_tokens", r.mean_tokens},
          {"te", r.te},
          {"nonthinking_ratio", r.nonthinking_ratio},
          {"thinking_mean_tokens", r.thinking_mean_tokens},
          {"nonthinking_mean_tokens", r.nonthinking_mean_tokens},
          {"verb_probability", r.verb_probability},
          {"verb_denominator_empty", r.verb_denominator_empty},
          {"over_budget_rate", r.over_budget_rate}};
}

std::string emit_json(const RunReport& report) {
  nlohmann::json doc;
  doc["schema_version"] = report.schema_version;
  doc["tokenizer"] = report.tokenizer;
  doc["lexicon"] = report.lexicon;
  doc["omega"] = report.omega;
  doc["fallback_budget"] = report.fallback_budget;
  doc["skipped_empty"] = report.skipped_empty;
  doc["diagnostics"] = report.diagnostics;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) doc["rows"].push_back(row_to_json(r));
  return doc.dump(2) + "\n";
}

// Two bar panels side by side: verb probability (0-100 %) and TE.
std::string emit_svg(const RunReport& report) {
  const int bar = 36, gap = 24, panel_h = 200, top = 40, left = 50;
  const int n = static_cast<int>(report.rows.size());
  const int panel_w = std::max(1, n) * (bar + gap) + gap;
  const int width = left + 2 * panel_w + 2 * left;
  const int height = top + panel_h + 80;
  double te_max = 0.0;
  for (const auto& r : report.rows) te_max = std::max(te_max, r.te);
  if (te_max <= 0.0) te_max = 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto panel = [&](int x0, const std::string& title, double scale_max, bool verbs) {
    os << "<text x=\"" << x0 << "\" y=\"20\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << top + panel_h << "\" x2=\"" << x0 + panel_w
       << "\" y2=\"" << top + panel_h << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << top << "\" x2=\"" << x0 << "\" y2=\""
       << top + panel_h << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x0 - 4 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">"
       << fixed(scale_max, 2) << "</text>\n";
    for (int i = 0; i < n; ++i) {
      const auto& r = report.rows[i];
      const double v = verbs ? r.verb_probability : r.te;
      const double h = panel_h * std::clamp(v / scale_max, 0.0, 1.0);
      const int x = x0 + gap + i * (bar + gap);
      os << "<rect x=\"" << x << "\" y=\"" << fixed(top + panel_h - h, 2) << "\" width=\"" << bar
         << "\" height=\"" << fixed(h, 2) << "\" fill=\"" << (verbs ? "#d95f02" : "#1b9e77")
         << "\"/>\n";
      os << "<text x=\"" << x + bar / 2 << "\" y=\"" << fixed(top + panel_h - h - 4, 2)
         << "\" text-anchor=\"middle\">" << fixed(v, 2) << "</text>\n";
      os << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + panel_h + 16
         << "\" text-anchor=\"middle\">" << xml_escape(r.dataset) << "</text>\n";
    }
  };
  panel(left, "Verb probability in non-thinking responses (%)", 100.0, true);
  panel(left + panel_w + left, "Token efficiency (A/sqrt(L))", te_max, false);
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return emit_csv(report);
    case ReportFormat::kJson: return emit_json(report);
    case ReportFormat::kSvg: return emit_svg(report);
  }
  throw Error(ErrorKind::kUnsupportedFormat, "unsupported report format");
}

RunReport parse_report_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    RunReport report;
    report.schema_version = doc.at("schema_version").get<int>();
    if (report.schema_version != 1) {
      throw Error(ErrorKind::kParse,
                  "report: unsupported schema_version " + std::to_string(report.schema_version));
    }
    report.tokenizer = doc.at("tokenizer").get<std::string>();
    report.lexicon = doc.at("lexicon").get<std::vector<std::string>>();
    report.omega = doc.at("omega").get<double>();
    report.fallback_budget = doc.at("fallback_budget").get<double>();
    report.skipped_empty = doc.at("skipped_empty").get<std::size_t>();
    report.diagnostics = doc.at("diagnostics").get<std::vector<std::string>>();
    for (const auto& j : doc.at("rows")) {
      ReportRow r;
      r.dataset = j.at("dataset").get<std::string>();
      r.records = j.at("records").get<std::size_t>();
      r.accuracy = j.at("accuracy").get<double>();
      r.accuracy_coverage = j.at("accuracy_coverage").get<double>();
      r.mean_tokens = j.at("mean_tokens").get<double>();
      r.te = j.at("te").get<double>();
      r.nonthinking_ratio = j.at("nonthinking_ratio").get<double>();
      r.thinking_mean_tokens = j.at("thinking_mean_tokens").get<double>();
      r.nonthinking_mean_tokens = j.at("nonthinking_mean_tokens").get<double>();
      r.verb_probability = j.at("verb_probability").get<double>();
      r.verb_denominator_empty = j.at("verb_denominator_empty").get<bool>();
      r.over_budget_rate = j.at("over_budget_rate").get<double>();
      report.rows.push_back(std::move(r));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("report: ") + e.what());
  }
}

}  // namespace tnt
