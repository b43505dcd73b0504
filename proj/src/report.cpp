#include "mlab/report.hpp"

#include <cmath>
#include <fstream>
#include <system_error>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

nlohmann::json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string_view status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not-applicable";
  }
  return "fail";
}

VerificationReport::VerificationReport(nlohmann::json config) : config_(std::move(config)) {}

const CheckResult& VerificationReport::add_check(CheckResult check) {
  if (find(check.name)) throw PreconditionError("duplicate check '" + check.name + "'");
  checks_.push_back(std::move(check));
  return checks_.back();
}

const CheckResult& VerificationReport::add_bound(std::string name, double measured, double threshold,
                                                 bool asserted, std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.asserted = asserted;
  c.detail = std::move(detail);
  c.status = std::fabs(measured) <= threshold ? CheckStatus::pass : CheckStatus::fail;
  return add_check(std::move(c));
}

void VerificationReport::add_series(const RemainderSeries& s) {
  nlohmann::json j;
  j["kind"] = kind_name(s.kind);
  j["normalization"] = s.normalization;
  j["sup_normalized"] = num(s.sup_normalized);
  j["argmax_x"] = num(s.argmax_x);
  j["n_samples"] = s.samples.size();
  j["caps"] = {{"x_max", num(s.cap)}};
  series_.push_back(std::move(j));
}

void VerificationReport::set_constants(std::string_view profile, const ConstantEstimates& c, const HProfile& p) {
  constants_[std::string(profile)] = constants_json(c, p);
}

void VerificationReport::set_section(std::string_view key, nlohmann::json value) {
  sections_[std::string(key)] = std::move(value);
}

void VerificationReport::add_timing(std::string_view step, double seconds) {
  timings_[std::string(step)] = seconds;
}

const CheckResult* VerificationReport::find(std::string_view name) const {
  for (const CheckResult& c : checks_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool VerificationReport::all_asserted_pass() const { return failures().empty(); }

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const CheckResult& c : checks_) {
    if (c.asserted && c.status == CheckStatus::fail) out.push_back(c.name);
  }
  return out;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["tool"] = {{"name", "mlab"}, {"version", MLAB_VERSION}};
  j["config"] = config_;
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& c : checks_) {
    nlohmann::json e;
    e["name"] = c.name;
    e["status"] = status_name(c.status);
    e["measured"] = num(c.measured);
    e["threshold"] = num(c.threshold);
    e["asserted"] = c.asserted;
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  j["series"] = series_;
  j["constants"] = constants_;
  for (auto it = sections_.begin(); it != sections_.end(); ++it) j[it.key()] = it.value();
  if (!timings_.empty()) j["timings_seconds"] = timings_;
  j["status"] = all_asserted_pass() ? "pass" : "fail";
  return j;
}

std::string VerificationReport::dump() const { return to_json().dump(2) + "\n"; }

nlohmann::json series_summary(const RemainderSeries& s, const PrefixSums& sums) {
  nlohmann::json j;
  j["kind"] = kind_name(s.kind);
  j["normalization"] = s.normalization;
  j["sup_normalized"] = num(s.sup_normalized);
  j["argmax_x"] = num(s.argmax_x);
  j["n_samples"] = s.samples.size();
  j["caps"] = {{"x_max", num(s.cap)}, {"n_max", sums.n_max()}, {"conv_cap", sums.conv_cap()}};
  return j;
}

nlohmann::json constants_json(const ConstantEstimates& c, const HProfile& p) {
  nlohmann::json j;
  j["alpha_hat"] = num(c.alpha_hat);
  j["alpha_trivial"] = num(c.alpha_trivial);
  j["ell_hat_estimate"] = num(c.ell_hat);
  j["L_hat_estimate"] = num(c.L_hat);
  j["m_hat"] = num(c.m_hat);
  j["m_hat_tail"] = num(c.m_hat_tail);
  j["M_hat"] = num(c.M_hat);
  j["iota_hat"] = num(c.iota_hat);
  j["kappa"] = num(c.kappa);
  j["kappa_applicable"] = c.kappa_applicable;
  j["epsilon"] = num(c.epsilon);
  j["h_param"] = num(c.h_param);
  j["lambda_hat"] = num(c.lambda_hat);
  j["finite_zeros_branch"] = p.finite_zeros_branch();
  j["zero_count"] = p.zeros.size();
  j["interval_count"] = p.intervals.size();
  j["provenance"] = {
      {"kind", p.kind == ProfileKind::smoothed ? "smoothed" : "mertens"},
      {"y_max", p.y_max},
      {"samples_per_decade", p.samples_per_decade},
      {"n_samples", p.x_samples.size()},
      {"tail_fraction", num(c.tail_fraction)},
      {"window_x_lo", num(c.window_x_lo)},
      {"window_x_hi", num(c.window_x_hi)},
      {"ell_window_x_lo", num(c.ell_window_x_lo)},
      {"window_samples", c.window_samples},
      {"min_interval_width", num(c.min_interval_width)},
  };
  return j;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path.string());
  }
}

}  // namespace mlab
