#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlab/dirichlet.hpp"
#include "mlab/report.hpp"

namespace mlab::cli {

enum ExitCode : int { ok = 0, assertion_failed = 1, usage = 2, capability = 3 };

struct RunConfig {
  u64 n_max = 10'000'000;
  u64 conv_cap = 1'000'000;
  u64 segment_size = u64{1} << 20;
  unsigned threads = 0;
  std::optional<std::string> grid;    ///< start:ratio:count
  std::optional<std::string> points;  ///< a,b,c
  std::string which;
  std::string kind = "smoothed";
  double tail_fraction = 0.5;
  Tolerances tol;
  int samples_per_decade = 50;
  std::string function = "one";
  double lambda = 0.5;
  int steps = 50;
  double alpha = 1.0;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> out;
  std::string format;  ///< csv or json; empty picks the command default
  bool timings = false;

  /// Throws PreconditionError when the fields are inconsistent.
  void validate() const;
  nlohmann::json echo() const;
};

/// The full verification suite behind `mlab report`.
VerificationReport run_suite(const RunConfig& config);

/// Entry point; args exclude the program name.  Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlab::cli
