#include "gevmq/report_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "gevmq/errors.hpp"

namespace gevmq {

std::string fmt17(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_reports_csv(std::ostream& os, const std::vector<McReport>& reports, bool with_time) {
  os << "estimator,xi,n,reps,bias,stderr,failure_rate,wall_ms\n";
  for (const auto& r : reports) {
    os << to_string(r.estimator) << ',' << fmt17(r.xi_true) << ',' << r.n << ',' << r.reps << ',' << fmt17(r.bias)
       << ',' << fmt17(r.std_error) << ',' << fmt17(r.failure_rate) << ','
       << (with_time ? static_cast<long long>(std::llround(r.wall_time_ms)) : 0LL) << '\n';
  }
}

void write_reports_json(std::ostream& os, const std::vector<McReport>& reports, bool with_time) {
  nlohmann::json arr = nlohmann::json::array();
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const auto& r : reports) {
    arr.push_back({{"estimator", to_string(r.estimator)},
                   {"xi", r.xi_true},
                   {"n", r.n},
                   {"reps", r.reps},
                   {"bias", num(r.bias)},
                   {"stderr", num(r.std_error)},
                   {"failure_rate", r.failure_rate},
                   {"wall_ms", with_time ? std::llround(r.wall_time_ms) : 0LL},
                   {"reps_used", r.reps_used},
                   {"stderr_defined", r.std_error_defined}});
  }
  os << arr.dump(2) << '\n';
}

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::vector<double> read_sample_column(std::istream& is) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && t == "value") continue;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      throw InputError("line " + std::to_string(lineno) + ": not a finite number: '" + t + "'", lineno);
    out.push_back(v);
  }
  return out;
}

void write_sample_column(std::ostream& os, std::span<const double> values) {
  os << "value\n";
  for (double v : values) os << fmt17(v) << '\n';
}

}  // namespace gevmq
