// Command-line entry point: scenario runs, landing-plan solving, distance
// model training, and trace evaluation/reporting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "padguard/gbdt.hpp"
#include "padguard/landing.hpp"
#include "padguard/metrics.hpp"
#include "padguard/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

padguard::LandingProblem problem_from_json(const json& j) {
  padguard::LandingProblem pb;
  for (const auto& p : j.at("people"))
    pb.people.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (j.contains("camera"))
    pb.camera = {j.at("camera").at(0).get<double>(), j.at("camera").at(1).get<double>()};
  if (j.contains("params")) {
    const auto& pr = j.at("params");
    pb.params.r_l = pr.value("r_l", pb.params.r_l);
    pb.params.r_s = pr.value("r_s", pb.params.r_s);
    pb.params.r_d = pr.value("r_d", pb.params.r_d);
    pb.params.alpha = pr.value("alpha", pb.params.alpha);
  }
  return pb;
}

ordered_json solution_to_json(const padguard::LandingSolution& sol) {
  ordered_json j;
  j["offset"] = {sol.offset.x, sol.offset.y};
  j["objective"] = sol.objective;
  j["feasible"] = sol.feasible;
  j["fallback_used"] = sol.fallback_used;
  return j;
}

ordered_json metrics_to_json(const padguard::RegressionMetrics& m) {
  ordered_json j;
  j["mae"] = m.mae;
  j["medae"] = m.medae;
  j["maxerr"] = m.maxerr;
  j["expvar"] = m.expvar;
  return j;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint32_t> seed, const std::string& model_path,
            const std::string& transport_kind, int udp_port) {
  padguard::Scenario sc = padguard::load_scenario(scenario_path);
  if (!seed) {
    std::cerr << "run: --seed is required\n";
    return 2;
  }
  sc.seed = *seed;

  padguard::GbdtModel model;
  const padguard::GbdtModel* model_ptr = nullptr;
  if (!sc.use_truth_distance) {
    if (!model_path.empty()) {
      model = padguard::load_model(model_path);
    } else {
      std::cerr << "no --model given; training a default distance model\n";
      const padguard::Dataset data =
          padguard::generate_distance_dataset(sc.camera, 5000, sc.seed);
      model = padguard::fit(data, padguard::GbdtHyperParams{}, sc.seed);
    }
    model_ptr = &model;
  }

  std::optional<padguard::Transport> transport;
  if (transport_kind == "udp") transport = padguard::make_udp_transport(udp_port);

  const padguard::SimulationTrace trace =
      padguard::run_scenario(sc, model_ptr, transport ? &*transport : nullptr);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  trace.save((dir / "trace.jsonl").string());

  const padguard::RunReport report = padguard::report_from_trace(trace.lines);
  {
    std::ofstream f(dir / "report.json");
    f << report.to_json().dump(2) << "\n";
  }
  {
    // UAV trajectory for external plotting
    std::ofstream f(dir / "trajectory.csv");
    f << "t,x,y,z,mode\n" << std::setprecision(17);
    for (const std::string& line : trace.lines) {
      if (line.empty() || line[0] != '{') continue;
      const json j = json::parse(line);
      if (j.value("type", "") != "state") continue;
      f << j.at("t").get<double>() << "," << j.at("uav").at(0).get<double>() << ","
        << j.at("uav").at(1).get<double>() << "," << j.at("uav").at(2).get<double>() << ","
        << j.at("mode").get<std::string>() << "\n";
    }
  }
  {
    ordered_json manifest;
    manifest["scenario_id"] = sc.id;
    manifest["seed"] = sc.seed;
    manifest["files"] = {"trace.jsonl", "report.json", "trajectory.csv"};
    std::ofstream f(dir / "manifest.json");
    f << manifest.dump(2) << "\n";
  }
  std::cout << report.to_json().dump(2) << "\n";
  return 0;
}

int cmd_plan(const std::string& problem_path, bool with_oracle, double grid_step) {
  std::ifstream f(problem_path);
  if (!f) {
    std::cerr << "cannot open problem: " << problem_path << "\n";
    return 2;
  }
  const padguard::LandingProblem pb = problem_from_json(json::parse(f));
  const padguard::LandingSolution sol = padguard::solve_landing(pb);
  ordered_json out;
  out["solution"] = solution_to_json(sol);
  if (with_oracle) out["oracle"] = solution_to_json(padguard::oracle_solve(pb, grid_step));
  std::cout << out.dump(2) << "\n";
  return sol.fallback_used ? 1 : 0;
}

int cmd_train_dist(const std::string& out_path, std::size_t samples, std::uint32_t seed,
                   bool search, int trials, int k_folds, double holdout_frac,
                   double pixel_sigma, const std::string& dataset_in,
                   const std::string& dataset_out) {
  padguard::Dataset data;
  if (!dataset_in.empty()) {
    std::ifstream f(dataset_in);
    if (!f) {
      std::cerr << "cannot open dataset: " << dataset_in << "\n";
      return 2;
    }
    data = padguard::load_dataset_csv(f);
  } else {
    padguard::FisheyeCameraModel cam;
    padguard::DatasetGenOptions opt;
    opt.pixel_sigma = pixel_sigma;
    data = padguard::generate_distance_dataset(cam, samples, seed, opt);
  }
  if (!dataset_out.empty()) {
    std::ofstream f(dataset_out);
    padguard::save_dataset_csv(data, f);
  }

  const std::size_t n_holdout = static_cast<std::size_t>(holdout_frac * data.size());
  if (data.size() - n_holdout < static_cast<std::size_t>(k_folds)) {
    std::cerr << "not enough samples for " << k_folds << " folds\n";
    return 2;
  }
  const padguard::Dataset train(data.begin(), data.end() - n_holdout);
  const padguard::Dataset holdout(data.end() - n_holdout, data.end());

  const padguard::GbdtHyperParams defaults;
  padguard::GbdtHyperParams chosen = defaults;
  if (search)
    chosen = padguard::random_search_cv(train, padguard::GbdtSearchSpace{}, k_folds, trials, seed);

  const padguard::GbdtModel model = padguard::fit(train, chosen, seed);
  padguard::save_model(model, out_path);
  const padguard::RegressionMetrics m = padguard::evaluate(model, holdout);

  ordered_json out;
  out["model"] = out_path;
  out["train_samples"] = train.size();
  out["holdout_samples"] = holdout.size();
  out["metrics"] = metrics_to_json(m);
  std::cout << out.dump(2) << "\n";

  if (search) {
    const padguard::GbdtModel base = padguard::fit(train, defaults, seed);
    const padguard::RegressionMetrics mb = padguard::evaluate(base, holdout);
    std::cout << "\nHyperparameters   MAE     MedAE   MaxErr  ExpVar\n";
    auto row = [](const char* name, const padguard::RegressionMetrics& r) {
      std::printf("%-17s %-7.3f %-7.3f %-7.3f %-7.3f\n", name, r.mae, r.medae, r.maxerr,
                  r.expvar);
    };
    row("Default", mb);
    row("Tuned", m);
  }
  return 0;
}

int cmd_eval(const std::string& trace_path) {
  const padguard::RunReport rep = padguard::report_from_trace(padguard::load_trace(trace_path));
  if (!rep.has_localization) {
    std::cerr << "trace has no detections to evaluate\n";
    return 1;
  }
  ordered_json j;
  j["ape"] = rep.localization.ape;
  j["cossim"] = rep.localization.cossim;
  j["matched"] = rep.localization.matched;
  j["omitted"] = rep.localization.omitted;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::string& trace_path, const std::string& out_path) {
  const padguard::RunReport rep = padguard::report_from_trace(padguard::load_trace(trace_path));
  const std::string text = rep.to_json().dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << text;
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground-camera safe landing pipeline"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, model_path, transport_kind = "inproc";
  std::optional<std::uint32_t> seed;
  int udp_port = 47231;
  auto* run = app.add_subcommand("run", "execute a scenario and write trace + report");
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "run seed (required)");
  run->add_option("--model", model_path, "distance model file");
  run->add_option("--transport", transport_kind, "inproc|udp")
      ->check(CLI::IsMember({"inproc", "udp"}));
  run->add_option("--udp-port", udp_port, "loopback port for udp transport");

  std::string problem_path;
  bool with_oracle = false;
  double grid_step = 0.01;
  auto* plan = app.add_subcommand("plan", "solve a landing problem");
  plan->add_option("--problem", problem_path, "problem JSON file")->required();
  plan->add_flag("--oracle", with_oracle, "cross-check against the grid oracle");
  plan->add_option("--grid", grid_step, "oracle grid step, meters");

  std::string train_out = "distance_model.txt", dataset_in, dataset_out;
  std::size_t samples = 5000;
  std::uint32_t train_seed = 1;
  bool search = false;
  int trials = 20, k_folds = 5;
  double holdout_frac = 0.2, pixel_sigma = 0.0;
  auto* train = app.add_subcommand("train-dist", "train the distance estimator");
  train->add_option("--out", train_out, "model output path");
  train->add_option("--samples", samples, "synthetic samples to generate");
  train->add_option("--seed", train_seed, "training seed");
  train->add_flag("--search", search, "randomized hyperparameter search with CV");
  train->add_option("--trials", trials, "search trials");
  train->add_option("--k-folds", k_folds, "cross-validation folds");
  train->add_option("--holdout-frac", holdout_frac, "holdout fraction");
  train->add_option("--pixel-sigma", pixel_sigma, "pixel noise on generated boxes");
  train->add_option("--dataset-in", dataset_in, "train from an existing CSV");
  train->add_option("--dataset-out", dataset_out, "also write the dataset CSV");

  std::string trace_path, report_out;
  auto* ev = app.add_subcommand("eval", "localization metrics from a trace");
  ev->add_option("--trace", trace_path, "trace.jsonl path")->required();
  auto* rep = app.add_subcommand("report", "rebuild the run report from a trace");
  rep->add_option("--trace", trace_path, "trace.jsonl path")->required();
  rep->add_option("--out", report_out, "report output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, out_dir, seed, model_path, transport_kind, udp_port);
    if (plan->parsed()) return cmd_plan(problem_path, with_oracle, grid_step);
    if (train->parsed())
      return cmd_train_dist(train_out, samples, train_seed, search, trials, k_folds,
                            holdout_frac, pixel_sigma, dataset_in, dataset_out);
    if (ev->parsed()) return cmd_eval(trace_path);
    if (rep->parsed()) return cmd_report(trace_path, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
