#include "core/diagnostics.hpp"

#include "core/textio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace semibandit {

namespace {
constexpr double kIneqSlack = 1e-9;
}  // namespace

double confidence_width_scale(double noise_scale, int dim, long long t,
                              double delta) {
  require(t >= 1 && dim >= 1 && delta > 0.0 && delta < 1.0,
          ErrorCode::invalid_argument, "confidence_width_scale: bad arguments");
  const double tt = static_cast<double>(t);
  return (2.0 * noise_scale + 6.0) *
             std::sqrt(dim * std::log(6.0 * tt * tt * tt / delta)) +
         1.0;
}

CheckResult check_potential_bound(const RunAudit& audit) {
  require(!audit.records.empty(), ErrorCode::invalid_argument,
          "check_potential_bound: empty audit");
  const double horizon = static_cast<double>(audit.records.size());
  const int d = audit.dim;
  double sum_sq = 0.0;
  double sum = 0.0;
  for (const AuditRecord& rec : audit.records) {
    sum_sq += rec.width_chosen * rec.width_chosen;
    sum += rec.width_chosen;
  }
  CheckResult out;
  out.lhs = sum_sq;
  out.bound = 8.0 * d * std::log(1.0 + 2.0 * horizon / d);
  out.pass = sum_sq <= out.bound + kIneqSlack;
  const double literal_bound =
      std::sqrt(2.0 * d * horizon * std::log(1.0 + horizon / d));
  std::ostringstream detail;
  detail << "sum s_c^2 = " << sum_sq << " vs 8 d log(1+2T/d) = " << out.bound
         << "; unrescaled sum s_c = " << sum << " vs sqrt(2dT log(1+T/d)) = "
         << literal_bound << " ("
         << (sum <= literal_bound ? "held" : "exceeded") << ", not asserted)";
  out.detail = detail.str();
  return out;
}

CheckResult check_coverage(const RunAudit& audit, double delta) {
  require(!audit.records.empty(), ErrorCode::invalid_argument,
          "check_coverage: empty audit");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument,
          "check_coverage: delta must lie in (0,1)");
  long long violated_rounds = 0;
  for (const AuditRecord& rec : audit.records)
    if (rec.coverage_violations > 0) ++violated_rounds;
  CheckResult out;
  out.lhs = static_cast<double>(violated_rounds) /
            static_cast<double>(audit.records.size());
  out.bound = delta;
  out.pass = out.lhs <= delta;
  out.detail = std::to_string(violated_rounds) + " of " +
               std::to_string(audit.records.size()) + " rounds violated";
  return out;
}

CheckResult check_det_trace(const RunAudit& audit) {
  require(!audit.records.empty(), ErrorCode::invalid_argument,
          "check_det_trace: empty audit");
  const int d = audit.dim;
  CheckResult out;
  out.pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const AuditRecord& rec : audit.records) {
    const double det_bound = d * std::log(rec.trace_precision / d);
    const double trace_bound = d + 8.0 * static_cast<double>(rec.t - 1);
    const bool ok = rec.log_det_precision <= det_bound + kIneqSlack &&
                    rec.trace_precision <= trace_bound + kIneqSlack;
    const double margin = std::min(det_bound - rec.log_det_precision,
                                   trace_bound - rec.trace_precision);
    if (margin < worst_margin) {
      worst_margin = margin;
      out.lhs = rec.log_det_precision;
      out.bound = det_bound;
    }
    if (!ok) {
      out.pass = false;
      out.detail = "violated at t = " + std::to_string(rec.t);
      return out;
    }
  }
  out.detail = "worst margin " + std::to_string(worst_margin);
  return out;
}

void write_audit_csv(std::span<const RunAudit> audits, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io_error, "cannot open for writing: " + path);
  out << "# semibandit audit v1\n";
  out << "policy,replication,n_arms,dim,R,delta,final_min_eig,"
         "t,s_c,log_det_B,trace_B,est_err,violations\n";
  for (const RunAudit& audit : audits) {
    for (const AuditRecord& rec : audit.records) {
      out << audit.policy << ',' << audit.replication << ',' << audit.n_arms
          << ',' << audit.dim << ',' << format_g17(audit.noise_scale) << ','
          << format_g17(audit.delta) << ','
          << format_g17(audit.final_min_eigenvalue) << ',' << rec.t << ','
          << format_g17(rec.width_chosen) << ','
          << format_g17(rec.log_det_precision) << ','
          << format_g17(rec.trace_precision) << ','
          << format_g17(rec.estimate_error) << ',' << rec.coverage_violations
          << '\n';
    }
  }
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_num(const std::string& field, long long line_no) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  require(ec == std::errc() && ptr == field.data() + field.size(),
          ErrorCode::parse_error,
          "audit csv line " + std::to_string(line_no) + ": bad number '" +
              field + "'");
  return value;
}

}  // namespace

std::vector<RunAudit> read_audit_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io_error, "cannot open audit file: " + path);
  std::string line;
  long long line_no = 0;
  // key: (policy, replication) in first-seen order
  std::vector<RunAudit> audits;
  std::map<std::pair<std::string, int>, size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("policy,", 0) == 0)
      continue;
    const auto f = split_commas(line);
    require(f.size() == 13, ErrorCode::parse_error,
            "audit csv line " + std::to_string(line_no) +
                ": expected 13 fields");
    const std::string& policy = f[0];
    const int replication = parse_num<int>(f[1], line_no);
    const auto key = std::make_pair(policy, replication);
    auto it = index.find(key);
    if (it == index.end()) {
      RunAudit audit;
      audit.policy = policy;
      audit.replication = replication;
      audit.n_arms = parse_num<int>(f[2], line_no);
      audit.dim = parse_num<int>(f[3], line_no);
      audit.noise_scale = parse_num<double>(f[4], line_no);
      audit.delta = parse_num<double>(f[5], line_no);
      audit.final_min_eigenvalue = parse_num<double>(f[6], line_no);
      it = index.emplace(key, audits.size()).first;
      audits.push_back(std::move(audit));
    }
    AuditRecord rec;
    rec.t = parse_num<long long>(f[7], line_no);
    rec.width_chosen = parse_num<double>(f[8], line_no);
    rec.log_det_precision = parse_num<double>(f[9], line_no);
    rec.trace_precision = parse_num<double>(f[10], line_no);
    rec.estimate_error = parse_num<double>(f[11], line_no);
    rec.coverage_violations = parse_num<int>(f[12], line_no);
    audits[it->second].records.push_back(rec);
  }
  require(!audits.empty(), ErrorCode::parse_error,
          "audit file contains no records: " + path);
  return audits;
}

}  // namespace semibandit
