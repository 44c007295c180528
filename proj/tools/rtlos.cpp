#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/experiments/report.hpp"
#include "rtlos/experiments/runner.hpp"
#include "rtlos/experiments/scenario.hpp"

namespace fs = std::filesystem;
using namespace rtlos;
using namespace rtlos::experiments;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out;
  int jobs = 1;
};

ScenarioConfig load(const Globals& g) {
  auto cfg = g.config.empty() ? default_scenario() : load_scenario(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.reps) cfg.replications = *g.reps;
  if (g.out) cfg.out_dir = *g.out;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::string path(const ScenarioConfig& cfg, const std::string& file) { return (fs::path(cfg.out_dir) / file).string(); }

void write_scenario(const ScenarioConfig& cfg, const ScenarioResult& r, const std::string& title) {
  {
    auto out = open_output(path(cfg, "outcomes.csv"));
    write_outcomes_csv(out, r.outcomes, cfg.facilities);
  }
  {
    auto out = open_output(path(cfg, "summary.csv"));
    write_summary_csv(out, r.summary, cfg.facilities);
  }
  {
    auto out = open_output(path(cfg, "summary.md"));
    write_summary_md(out, title, r.summary, cfg.facilities);
  }
  if (cfg.predictor) {
    auto out = open_output(path(cfg, "assignments.csv"));
    rthfa::write_assignment_header(out, cfg.facilities.size());
    for (const auto& d : r.audit) rthfa::write_assignment_row(out, 0, d);
  }
  if (r.prepared.calibration) {
    auto out = open_output(path(cfg, "lambda_trace.csv"));
    write_lambda_trace_csv(out, *r.prepared.calibration, cfg.facilities, cfg.t0_days);
  }
  write_summary_md(std::cout, title, r.summary, cfg.facilities);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time length-of-stay prediction and facility assignment for primary health centers"};
  app.require_subcommand(1);
  Globals g;
  auto global = [&g](CLI::App* sub) {
    sub->add_option("--config", g.config, "Scenario file (default: the built-in two-PHC network)");
    sub->add_option("--seed", g.seed, "Master seed; replication i uses seed + i");
    sub->add_option("--reps", g.reps, "Number of replications")->check(CLI::PositiveNumber);
    sub->add_option("--out", g.out, "Output directory");
    sub->add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Baseline run without assignment");
  global(simulate);

  auto* assign = app.add_subcommand("assign", "RT-HFA run");
  global(assign);
  std::string predictor = "aqt";
  std::optional<double> compliance;
  assign->add_option("--predictor", predictor, "actual, aqt or simml")
      ->check(CLI::IsMember({"actual", "aqt", "simml"}));
  assign->add_option("--compliance", compliance, "Probability of following the recommendation")
      ->check(CLI::Range(0.0, 1.0));

  auto* dataset = app.add_subcommand("dataset", "Generate Sim-ML training data");
  global(dataset);
  bool baseline_routing = false;
  dataset->add_flag("--baseline", baseline_routing, "Usual-facility routing instead of AQT-driven assignment");

  auto* train = app.add_subcommand("train-eval", "Fit KNN models and report MAPE against AQT");
  global(train);
  std::string data_path, model_path;
  double train_fraction = 0.75;
  train->add_option("--data", data_path, "dataset.csv to use instead of generating one");
  train->add_option("--save-model", model_path, "Write the global assignment-time model here");
  train->add_option("--train-fraction", train_fraction, "Training share of the split")->check(CLI::Range(0.01, 0.99));

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Effective interarrival fixed point");
  global(calibrate_cmd);
  std::string calib_predictor = "aqt";
  calibrate_cmd->add_option("--predictor", calib_predictor, "aqt or simml")->check(CLI::IsMember({"aqt", "simml"}));

  auto* sweep = app.add_subcommand("sweep", "Compliance sensitivity");
  global(sweep);
  std::vector<double> rates{1.0, 0.75, 0.5, 0.25};
  std::string sweep_predictor = "actual";
  sweep->add_option("--rates", rates, "Compliance rates")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--predictor", sweep_predictor, "actual, aqt or simml")
      ->check(CLI::IsMember({"actual", "aqt", "simml"}));

  auto* report = app.add_subcommand("report", "Merge summary.csv files into one markdown report");
  std::vector<std::string> inputs;
  std::string report_out = "report.md";
  report->add_option("inputs", inputs, "summary.csv files or directories holding one")->required();
  report->add_option("--out", report_out, "Markdown file to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      auto cfg = load(g);
      cfg.predictor.reset();
      write_scenario(cfg, run_scenario(cfg, g.jobs), cfg.name + ": no assignment");
    } else if (assign->parsed()) {
      auto cfg = load(g);
      cfg.predictor = rthfa::parse_predictor(predictor);
      if (compliance) cfg.compliance = *compliance;
      write_scenario(cfg, run_scenario(cfg, g.jobs),
                     cfg.name + ": RT-HFA, " + predictor + " predictor, compliance " + std::to_string(cfg.compliance));
    } else if (dataset->parsed()) {
      auto cfg = load(g);
      auto opt = training_options(cfg);
      opt.assign = !baseline_routing;
      const auto data = generate_dataset(cfg, opt);
      auto out = open_output(path(cfg, "dataset.csv"));
      simml::write_csv(out, data);
      std::cout << "wrote " << data.size() << " samples to " << path(cfg, "dataset.csv") << '\n';
    } else if (train->parsed()) {
      auto cfg = load(g);
      simml::Dataset data;
      if (data_path.empty()) {
        data = generate_dataset(cfg, training_options(cfg));
      } else {
        std::ifstream in(data_path);
        if (!in) throw ConfigError("cannot open dataset '" + data_path + "'");
        data = simml::read_csv(in);
      }
      const auto report_data = train_eval(data, cfg.knn_k, cfg.seed, train_fraction);
      {
        auto out = open_output(path(cfg, "accuracy.csv"));
        write_accuracy_csv(out, report_data);
      }
      {
        auto out = open_output(path(cfg, "accuracy.md"));
        write_accuracy_md(out, report_data);
      }
      write_accuracy_md(std::cout, report_data);
      if (!model_path.empty()) {
        auto out = open_output(model_path);
        train_knn(data, cfg.knn_k, static_cast<std::size_t>(cfg.train_max_samples), cfg.seed)->save(out);
      }
    } else if (calibrate_cmd->parsed()) {
      auto cfg = load(g);
      cfg.predictor = rthfa::parse_predictor(calib_predictor);
      cfg.calibrate = true;
      const auto prep = prepare(cfg);
      auto out = open_output(path(cfg, "lambda_trace.csv"));
      write_lambda_trace_csv(out, *prep.calibration, cfg.facilities, cfg.t0_days);
      write_lambda_trace_csv(std::cout, *prep.calibration, cfg.facilities, cfg.t0_days);
    } else if (sweep->parsed()) {
      auto cfg = load(g);
      cfg.predictor = rthfa::parse_predictor(sweep_predictor);
      const auto points = compliance_sweep(cfg, rates, g.jobs);
      {
        auto out = open_output(path(cfg, "sweep.csv"));
        write_sweep_csv(out, points, cfg.facilities);
      }
      auto md = open_output(path(cfg, "summary.md"));
      for (const auto& p : points)
        write_summary_md(md, cfg.name + ": compliance " + std::to_string(p.compliance), p.result.summary,
                         cfg.facilities);
      write_sweep_csv(std::cout, points, cfg.facilities);
    } else if (report->parsed()) {
      std::vector<std::pair<std::string, std::vector<SummaryRow>>> parts;
      for (const auto& input : inputs) {
        fs::path p(input);
        if (fs::is_directory(p)) p /= "summary.csv";
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open '" + p.string() + "'");
        parts.emplace_back(p.parent_path().filename().string(), read_summary_csv(in));
      }
      auto out = open_output(report_out);
      write_report_md(out, parts);
      std::cout << "wrote " << report_out << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
