#ifndef LWEAK_REPORT_HPP_
#define LWEAK_REPORT_HPP_

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "lweak/verify.hpp"

namespace lweak {

enum class ReportFormat { Csv, Json };

inline ReportFormat report_format_from_string(const std::string &s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown report format '" + s + "' (expected csv or json)");
}

inline constexpr const char *kReportCsvHeader =
    "check,param,estimate,se,bound,valid,verdict,seed,replicates";

/// 17 significant digits, which round-trips every finite double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_number(const std::string &s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  char *end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::string reports_to_csv(const std::vector<VerificationReport> &reports) {
  std::ostringstream os;
  os << kReportCsvHeader << '\n';
  for (const auto &r : reports) {
    if (r.check.find(',') != std::string::npos || r.param.find(',') != std::string::npos)
      throw std::invalid_argument("report fields may not contain commas");
    os << r.check << ',' << r.param << ',' << format_number(r.estimate) << ','
       << format_number(r.se) << ',' << format_number(r.bound) << ','
       << (r.valid ? "true" : "false") << ',' << to_string(r.verdict) << ',' << r.seed << ','
       << r.replicates << '\n';
  }
  return os.str();
}

inline std::string reports_to_json(const std::vector<VerificationReport> &reports) {
  // Numbers are written by hand so they carry exactly 17 significant digits;
  // non-finite values become the strings "inf", "-inf" and "nan".
  auto num = [](double v) {
    const auto s = format_number(v);
    return std::isfinite(v) ? s : "\"" + s + "\"";
  };
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto &r = reports[i];
    os << (i == 0 ? "\n" : ",\n") << "  {\"check\": " << nlohmann::json(r.check).dump()
       << ", \"param\": " << nlohmann::json(r.param).dump() << ", \"estimate\": " << num(r.estimate)
       << ", \"se\": " << num(r.se) << ", \"bound\": " << num(r.bound)
       << ", \"valid\": " << (r.valid ? "true" : "false") << ", \"verdict\": \""
       << to_string(r.verdict) << "\", \"seed\": " << r.seed << ", \"replicates\": " << r.replicates
       << "}";
  }
  os << (reports.empty() ? "]\n" : "\n]\n");
  return os.str();
}

inline std::vector<VerificationReport> reports_from_csv(const std::string &text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kReportCsvHeader)
    throw std::invalid_argument("report CSV: missing or wrong header");
  std::vector<VerificationReport> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw std::invalid_argument("report CSV: expected 9 columns");
    VerificationReport r;
    r.check = f[0];
    r.param = f[1];
    r.estimate = parse_number(f[2]);
    r.se = parse_number(f[3]);
    r.bound = parse_number(f[4]);
    r.valid = f[5] == "true";
    r.verdict = verdict_from_string(f[6]);
    r.seed = std::stoull(f[7]);
    r.replicates = std::stoull(f[8]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<VerificationReport> reports_from_json(const std::string &text) {
  const auto doc = nlohmann::json::parse(text);
  auto num = [](const nlohmann::json &j) {
    return j.is_string() ? parse_number(j.get<std::string>()) : j.get<double>();
  };
  std::vector<VerificationReport> out;
  for (const auto &j : doc) {
    VerificationReport r;
    r.check = j.at("check").get<std::string>();
    r.param = j.at("param").get<std::string>();
    r.estimate = num(j.at("estimate"));
    r.se = num(j.at("se"));
    r.bound = num(j.at("bound"));
    r.valid = j.at("valid").get<bool>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.replicates = j.at("replicates").get<std::size_t>();
    out.push_back(std::move(r));
  }
  return out;
}

/// Writes `content` to a temporary file next to `path`, then renames it into
/// place so readers never observe a partial report.
inline void write_atomic(const std::filesystem::path &path, const std::string &content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report to " + path.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("cannot write report to " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move report into place at " + path.string());
  }
}

/// Renders the reports and writes them to `path` ("-" or empty: stdout).
inline void emit_report(const std::vector<VerificationReport> &reports, ReportFormat format,
                        const std::string &path, std::ostream &stdout_stream = std::cout) {
  const auto text = format == ReportFormat::Csv ? reports_to_csv(reports) : reports_to_json(reports);
  if (path.empty() || path == "-")
    stdout_stream << text;
  else
    write_atomic(path, text);
}

}  // namespace lweak

#endif  // LWEAK_REPORT_HPP_
