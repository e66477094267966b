#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampsi/amp_engine.hpp"
#include "ampsi/prior_models.hpp"
#include "ampsi/state_evolution.hpp"

namespace ampsi {

/// Invalid experiment parameters. The message starts with the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Model { gg, bg };
enum class ReportFormat { csv, json };

/// Largest m * n the harness will allocate per trial.
inline constexpr std::size_t kMaxMatrixEntries = 500'000'000;
/// XORed into the experiment seed to obtain the Monte-Carlo SE seed.
inline constexpr std::uint64_t kSeSeedMask = 0x9E3779B97F4A7C15ULL;

/// Variances are stored; the CLI also accepts standard deviations.
struct ExperimentConfig {
  Model model = Model::gg;
  std::size_t n = 0;
  std::optional<std::size_t> m;
  std::optional<double> delta;
  double sigma_x2 = 1.0;  // gg only
  double sigma_w2 = 0.01;
  double sigma_si2 = 0.04;
  double epsilon = 0.2;  // bg only
  std::size_t trials = 10;
  std::size_t iters = 30;
  std::uint64_t seed = 0;
  std::size_t se_samples = 1'000'000;
  bool se_common_random_numbers = false;
  LambdaSource lambda_source = LambdaSource::se_prescribed;
  std::size_t threads = 1;

  /// m, or round(delta * n).
  std::size_t resolved_m() const;
  PriorModel prior() const;
  std::uint64_t trial_seed(std::size_t k) const { return seed + k; }
  std::uint64_t se_seed() const { return seed ^ kSeSeedMask; }
  void validate() const;
};

struct ReportRow {
  std::size_t t;
  double empirical_mse_mean;
  double empirical_mse_std;
  double se_lambda2;
  double se_predicted_mse;
  double eff_obs_loss_mean;
  double residual_loss_mean;
  double rel_gap;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string version;
  std::vector<std::uint64_t> trial_seeds;
  SeTrace se_trace;
  std::vector<ReportRow> rows;
  /// Per-trial iteration records, indexed by trial. Not serialized.
  std::vector<std::vector<IterationRecord>> trial_records;
};

/// SE once, then `trials` instances from seed, seed+1, ... each run for
/// iters + 1 AMP iterations; rows t = 0..iters. Trials run on up to
/// config.threads threads and are aggregated in trial order.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string format_csv(const ExperimentReport& report);
std::string format_json(const ExperimentReport& report);
/// Writes the report; throws std::runtime_error naming the path on I/O failure.
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);

/// gnuplot commands plotting empirical vs predicted MSE from a CSV report.
std::string gnuplot_script(const ExperimentReport& report, const std::filesystem::path& csv_path);

/// CSV read back: '#' header lines as key=value pairs plus the data rows.
struct ParsedCsv {
  std::map<std::string, std::string> header;
  std::vector<ReportRow> rows;
};
ParsedCsv parse_csv(const std::string& text);

/// The eight data columns in output order.
const std::vector<std::string>& report_columns();

}  // namespace ampsi
