#include "ampsi/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ampsi/linear_model.hpp"
#include "ampsi/metrics.hpp"
#include "ampsi/version.hpp"

namespace ampsi {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* model_name(Model m) { return m == Model::gg ? "gg" : "bg"; }

const char* lambda_name(LambdaSource s) {
  return s == LambdaSource::se_prescribed ? "se" : "empirical";
}

void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

std::vector<IterationRecord> run_trial(const ExperimentConfig& cfg, const PriorModel& prior,
                                       const SeTrace& trace, std::size_t k) {
  ModelConfig mc;
  mc.n = cfg.n;
  mc.m = cfg.resolved_m();
  mc.sigma_w2 = cfg.sigma_w2;
  mc.prior = prior;
  mc.seed = cfg.trial_seed(k);
  const auto inst = generate_instance(mc);

  AmpConfig ac;
  ac.max_iters = cfg.iters + 1;
  ac.lambda_source = cfg.lambda_source;
  ac.se_trace = trace;
  return run_amp(inst, ac).records;
}

// Mean and sample standard deviation in index order.
std::pair<double, double> mean_std(const std::vector<double>& v) {
  double sum = 0.0;
  for (double e : v) sum += e;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<std::pair<std::string, std::string>> header_fields(const ExperimentReport& r) {
  const auto& c = r.config;
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("version", r.version);
  h.emplace_back("model", model_name(c.model));
  h.emplace_back("n", std::to_string(c.n));
  h.emplace_back("m", std::to_string(c.resolved_m()));
  h.emplace_back("delta", fmt_double(static_cast<double>(c.resolved_m()) / static_cast<double>(c.n)));
  if (c.model == Model::gg) h.emplace_back("sigma_x2", fmt_double(c.sigma_x2));
  h.emplace_back("sigma_w2", fmt_double(c.sigma_w2));
  h.emplace_back("sigma_si2", fmt_double(c.sigma_si2));
  if (c.model == Model::bg) h.emplace_back("epsilon", fmt_double(c.epsilon));
  h.emplace_back("trials", std::to_string(c.trials));
  h.emplace_back("iters", std::to_string(c.iters));
  h.emplace_back("seed", std::to_string(c.seed));
  h.emplace_back("lambda_source", lambda_name(c.lambda_source));
  if (c.model == Model::gg) {
    h.emplace_back("se_backend", "closed-form");
  } else {
    h.emplace_back("se_backend", "monte-carlo");
    h.emplace_back("se_samples", std::to_string(c.se_samples));
    h.emplace_back("se_seed", std::to_string(c.se_seed()));
    h.emplace_back("se_crn", c.se_common_random_numbers ? "1" : "0");
  }
  std::string seeds;
  for (std::size_t k = 0; k < r.trial_seeds.size(); ++k)
    seeds += (k ? ";" : "") + std::to_string(r.trial_seeds[k]);
  h.emplace_back("trial_seeds", seeds);

  std::string rerun = "ampsi_experiment --model " + std::string(model_name(c.model)) +
                      " --n " + std::to_string(c.n) + " --m " + std::to_string(c.resolved_m());
  if (c.model == Model::gg) rerun += " --sigma-x2 " + fmt_double(c.sigma_x2);
  rerun += " --sigma-w2 " + fmt_double(c.sigma_w2) + " --sigma-si2 " + fmt_double(c.sigma_si2);
  if (c.model == Model::bg) rerun += " --epsilon " + fmt_double(c.epsilon);
  rerun += " --trials " + std::to_string(c.trials) + " --iters " + std::to_string(c.iters) +
           " --seed " + std::to_string(c.seed) + " --lambda-source " + lambda_name(c.lambda_source);
  if (c.model == Model::bg) {
    rerun += " --se-samples " + std::to_string(c.se_samples);
    if (c.se_common_random_numbers) rerun += " --se-crn";
  }
  h.emplace_back("rerun", rerun);
  return h;
}

}  // namespace

std::size_t ExperimentConfig::resolved_m() const {
  if (m) return *m;
  if (delta) return static_cast<std::size_t>(std::llround(*delta * static_cast<double>(n)));
  return 0;
}

PriorModel ExperimentConfig::prior() const {
  return model == Model::gg ? PriorModel::gaussian(sigma_x2, sigma_si2)
                            : PriorModel::bernoulli_gaussian(epsilon, sigma_si2);
}

void ExperimentConfig::validate() const {
  if (n < 1) fail("n", "must be >= 1");
  if (m.has_value() == delta.has_value()) fail("m", "supply exactly one of m or delta");
  if (delta && !(*delta > 0.0 && std::isfinite(*delta))) fail("delta", "must be finite and > 0");
  const std::size_t mm = resolved_m();
  if (mm < 1) fail(m ? "m" : "delta", "resolves to m = 0");
  if (mm > kMaxMatrixEntries / n)
    fail(m ? "m" : "delta", "n*m exceeds the cap of " + std::to_string(kMaxMatrixEntries) +
                                " matrix entries");
  if (!(sigma_w2 >= 0.0 && std::isfinite(sigma_w2))) fail("sigma_w", "must be finite and >= 0");
  if (!(sigma_si2 >= 0.0 && std::isfinite(sigma_si2))) fail("sigma_si", "must be finite and >= 0");
  if (model == Model::gg && !(sigma_x2 > 0.0 && std::isfinite(sigma_x2)))
    fail("sigma_x2", "must be finite and > 0");
  if (model == Model::bg) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon", "must lie in (0, 1]");
    if (!(sigma_si2 > 0.0)) fail("sigma_si", "must be > 0 for the bg model");
    if (se_samples < 1000) fail("se_samples", "must be >= 1000");
  }
  if (trials < 1) fail("trials", "must be >= 1");
  if (iters < 1) fail("iters", "must be >= 1");
  if (threads < 1) fail("threads", "must be >= 1");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const PriorModel prior = config.prior();
  const std::size_t m = config.resolved_m();

  ExperimentReport report;
  report.config = config;
  report.version = kVersion;
  for (std::size_t k = 0; k < config.trials; ++k) report.trial_seeds.push_back(config.trial_seed(k));

  SeParams params{prior, static_cast<double>(m) / static_cast<double>(config.n), config.sigma_w2};
  const std::size_t steps = config.iters + 1;
  if (config.model == Model::gg) {
    report.se_trace = run_se(params, steps, ClosedForm{});
  } else {
    report.se_trace = run_se(params, steps,
                             MonteCarlo{config.se_samples, config.se_seed(),
                                        config.se_common_random_numbers});
  }

  report.trial_records.resize(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < config.trials; k = next++) {
      try {
        report.trial_records[k] = run_trial(config, prior, report.se_trace, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(config.threads, config.trials);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t t = 0; t <= config.iters; ++t) {
    std::vector<double> mse, eff, res;
    for (const auto& recs : report.trial_records) {
      mse.push_back(recs[t].estimate_mse);
      eff.push_back(recs[t].eff_obs_loss);
      res.push_back(recs[t].residual_loss);
    }
    const auto [mse_mean, mse_std] = mean_std(mse);
    ReportRow row{};
    row.t = t;
    row.empirical_mse_mean = mse_mean;
    row.empirical_mse_std = mse_std;
    row.se_lambda2 = report.se_trace.lambda2[t];
    row.se_predicted_mse = report.se_trace.predicted_mse[t];
    row.eff_obs_loss_mean = mean_std(eff).first;
    row.residual_loss_mean = mean_std(res).first;
    row.rel_gap = relative_gap(row.empirical_mse_mean, row.se_predicted_mse);
    report.rows.push_back(row);
  }
  return report;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "t",          "empirical_mse_mean", "empirical_mse_std",  "se_lambda2",
      "se_predicted_mse", "eff_obs_loss_mean", "residual_loss_mean", "rel_gap"};
  return cols;
}

std::string format_csv(const ExperimentReport& report) {
  std::string out = "# ampsi experiment report\n";
  for (const auto& [k, v] : header_fields(report)) out += "# " + k + "=" + v + "\n";
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.t);
    for (double v : {r.empirical_mse_mean, r.empirical_mse_std, r.se_lambda2, r.se_predicted_mse,
                     r.eff_obs_loss_mean, r.residual_loss_mean, r.rel_gap})
      out += "," + fmt_double(v);
    out += "\n";
  }
  return out;
}

std::string format_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json header;
  for (const auto& [k, v] : header_fields(report)) header[k] = v;
  doc["header"] = header;
  doc["trial_seeds"] = report.trial_seeds;
  doc["columns"] = report_columns();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["t"] = r.t;
    row["empirical_mse_mean"] = r.empirical_mse_mean;
    row["empirical_mse_std"] = r.empirical_mse_std;
    row["se_lambda2"] = r.se_lambda2;
    row["se_predicted_mse"] = r.se_predicted_mse;
    row["eff_obs_loss_mean"] = r.eff_obs_loss_mean;
    row["residual_loss_mean"] = r.residual_loss_mean;
    row["rel_gap"] = r.rel_gap;
    rows.push_back(row);
  }
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  const std::string text = format == ReportFormat::csv ? format_csv(report) : format_json(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string gnuplot_script(const ExperimentReport& report, const std::filesystem::path& csv_path) {
  std::ostringstream s;
  s << "# gnuplot script generated by ampsi " << report.version << "\n"
    << "set datafile separator ','\n"
    << "set datafile commentschars '#'\n"
    << "set key autotitle columnhead\n"
    << "set logscale y\n"
    << "set xlabel 'iteration t'\n"
    << "set ylabel 'MSE'\n"
    << "set title 'AMP-SI " << model_name(report.config.model) << ", n="
    << report.config.n << ", m=" << report.config.resolved_m() << "'\n"
    << "plot '" << csv_path.string() << "' using 1:2:3 with yerrorbars title 'empirical', \\\n"
    << "     '' using 1:5 with lines title 'state evolution'\n";
  return s.str();
}

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  std::istringstream in(text);
  std::string line;
  bool seen_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos && line.size() > 2)
        out.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!seen_columns) {
      seen_columns = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != report_columns().size())
      throw std::runtime_error("malformed CSV row: " + line);
    ReportRow r{};
    r.t = std::stoull(cells[0]);
    double* fields[] = {&r.empirical_mse_mean, &r.empirical_mse_std, &r.se_lambda2,
                        &r.se_predicted_mse,   &r.eff_obs_loss_mean, &r.residual_loss_mean,
                        &r.rel_gap};
    for (std::size_t i = 0; i < 7; ++i) *fields[i] = std::strtod(cells[i + 1].c_str(), nullptr);
    out.rows.push_back(r);
  }
  return out;
}

}  // namespace ampsi
