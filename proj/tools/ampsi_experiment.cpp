// Runs one AMP-SI experiment configuration and writes a CSV or JSON report.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ampsi/experiment.hpp"
#include "ampsi/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"AMP with side information: empirical MSE vs state evolution"};
  app.set_version_flag("--version", ampsi::kVersion);

  ampsi::ExperimentConfig cfg;
  std::string out_path;
  std::string plot_path;
  std::optional<std::size_t> m;
  std::optional<double> delta, sigma_w, sigma_w2, sigma_si, sigma_si2, sigma_x2;

  const std::map<std::string, ampsi::Model> models{{"gg", ampsi::Model::gg},
                                                   {"bg", ampsi::Model::bg}};
  const std::map<std::string, ampsi::ReportFormat> formats{{"csv", ampsi::ReportFormat::csv},
                                                           {"json", ampsi::ReportFormat::json}};
  const std::map<std::string, ampsi::LambdaSource> sources{
      {"se", ampsi::LambdaSource::se_prescribed}, {"empirical", ampsi::LambdaSource::empirical}};
  ampsi::ReportFormat format = ampsi::ReportFormat::csv;

  app.add_option("--model", cfg.model, "signal/SI model")
      ->required()
      ->transform(CLI::CheckedTransformer(models, CLI::ignore_case));
  app.add_option("--n", cfg.n, "signal length")->required();
  auto* m_opt = app.add_option("--m", m, "measurement count");
  auto* delta_opt = app.add_option("--delta", delta, "measurement rate m/n (m = round(delta n))");
  m_opt->excludes(delta_opt);

  auto* sw = app.add_option("--sigma-w", sigma_w, "measurement noise standard deviation");
  auto* sw2 = app.add_option("--sigma-w2", sigma_w2, "measurement noise variance");
  sw->excludes(sw2);
  auto* ss = app.add_option("--sigma-si", sigma_si, "SI noise standard deviation");
  auto* ss2 = app.add_option("--sigma-si2", sigma_si2, "SI noise variance");
  ss->excludes(ss2);
  app.add_option("--sigma-x2", sigma_x2, "signal variance (gg only, default 1)");
  app.add_option("--epsilon", cfg.epsilon, "nonzero probability (bg only)");
  app.add_option("--trials", cfg.trials, "independent instances")->required();
  app.add_option("--iters", cfg.iters, "last reported iteration index")->required();
  app.add_option("--seed", cfg.seed, "base seed; trial k uses seed + k")->required();
  app.add_option("--se-samples", cfg.se_samples, "Monte-Carlo SE sample count (bg)");
  app.add_flag("--se-crn", cfg.se_common_random_numbers,
               "reuse one Monte-Carlo sample set across SE steps");
  app.add_option("--lambda-source", cfg.lambda_source, "where eta_t takes lambda_t^2 from")
      ->transform(CLI::CheckedTransformer(sources, CLI::ignore_case));
  app.add_option("--threads", cfg.threads, "parallel trials (output does not depend on it)");
  app.add_option("--out", out_path, "report path")->required();
  app.add_option("--format", format, "report format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  app.add_option("--plot-script", plot_path, "also write a gnuplot script for a CSV report");

  CLI11_PARSE(app, argc, argv);

  if (!sigma_w && !sigma_w2) {
    std::cerr << "error: sigma_w: one of --sigma-w or --sigma-w2 is required\n";
    return 2;
  }
  if (!sigma_si && !sigma_si2) {
    std::cerr << "error: sigma_si: one of --sigma-si or --sigma-si2 is required\n";
    return 2;
  }
  cfg.m = m;
  cfg.delta = delta;
  cfg.sigma_w2 = sigma_w ? *sigma_w * *sigma_w : *sigma_w2;
  cfg.sigma_si2 = sigma_si ? *sigma_si * *sigma_si : *sigma_si2;
  if (sigma_x2) cfg.sigma_x2 = *sigma_x2;

  try {
    const auto report = ampsi::run_experiment(cfg);
    ampsi::emit_report(report, format, out_path);
    if (!plot_path.empty()) {
      std::ofstream plot(plot_path);
      plot << ampsi::gnuplot_script(report, out_path);
      if (!plot) throw std::runtime_error("write failed for " + plot_path);
    }
  } catch (const ampsi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
