#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlab/h_analysis.hpp"
#include "mlab/identities.hpp"

namespace mlab {

enum class CheckStatus { pass, fail, not_applicable };

std::string_view status_name(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double measured = 0;
  double threshold = 0;
  /// Non-asserted checks are data: a fail does not change the exit status.
  bool asserted = true;
  std::string detail;
};

/// Checks, series summaries and constants of one run.  Serialization is
/// deterministic: keys sorted, floats in shortest round-trip form, NaN as null.
class VerificationReport {
 public:
  explicit VerificationReport(nlohmann::json config = nlohmann::json::object());

  /// Appends a check; a repeated name throws PreconditionError.
  const CheckResult& add_check(CheckResult check);
  /// pass when |measured| <= threshold (NaN measured fails).
  const CheckResult& add_bound(std::string name, double measured, double threshold, bool asserted = true,
                               std::string detail = {});

  void add_series(const RemainderSeries& series);
  void set_constants(std::string_view profile, const ConstantEstimates& c, const HProfile& p);
  void set_section(std::string_view key, nlohmann::json value);
  void add_timing(std::string_view step, double seconds);

  const std::vector<CheckResult>& checks() const { return checks_; }
  const CheckResult* find(std::string_view name) const;
  bool all_asserted_pass() const;
  /// Names of asserted checks that failed.
  std::vector<std::string> failures() const;

  nlohmann::json to_json() const;
  std::string dump() const;

 private:
  nlohmann::json config_;
  std::vector<CheckResult> checks_;
  nlohmann::json series_ = nlohmann::json::array();
  nlohmann::json constants_ = nlohmann::json::object();
  nlohmann::json sections_ = nlohmann::json::object();
  nlohmann::json timings_ = nlohmann::json::object();
};

nlohmann::json series_summary(const RemainderSeries& series, const PrefixSums& sums);
nlohmann::json constants_json(const ConstantEstimates& c, const HProfile& p);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mlab
