#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wproj/baselines.hpp"
#include "wproj/errors.hpp"
#include "wproj/io.hpp"
#include "wproj/logconcave.hpp"
#include "wproj/monotone.hpp"
#include "wproj/transport.hpp"
#include "wproj/verify.hpp"

namespace {

using namespace wproj;

// step quantile of a measure at full resolution, no grid coarsening
StepQuantile full_step(const EmpiricalMeasure& m) {
  StepQuantile s;
  s.part.u.reserve(m.size() + 1);
  s.part.u.push_back(0.0);
  for (double c : m.cw) s.part.u.push_back(c);
  s.y = m.x;
  return s;
}

Quantile quantile_from_arg(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return read_fit(path).quantile();
  return Quantile(full_step(load_dataset(path)));
}

int finish_fit(const FitDocument& doc, const std::string& output,
               const std::string& plot) {
  write_fit(doc, output);
  if (!plot.empty()) {
    if (doc.point_mass)
      throw input_error("point-mass fit has no density to plot");
    write_plot_csv(doc.density, plot);
  }
  std::printf("model %s: %d cells, w2 = %.6g, status %s, %d iterations\n",
              doc.model.c_str(), static_cast<int>(doc.u.size()) - 1, doc.w2,
              to_string(doc.report.status), doc.report.iterations);
  if (doc.report.status != SolveStatus::Optimal) {
    std::fprintf(stderr, "solver did not reach optimality (%s)\n",
                 to_string(doc.report.status));
    return 3;
  }
  return 0;
}

const char* model_name(Model m) { return m == Model::Monotone ? "monotone" : "logconcave"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape-constrained density estimation by quantile projection"};
  app.require_subcommand(1);

  std::string input, output, plot, config_path;
  std::string arg_a, arg_b, fit_path, data_path;
  int grid_size = 200;
  double tol = 0;  // 0 = solver default
  int max_iter = 0;
  bool nonneg = false;
  double p = 2.0;
  int n_samples = 0;
  std::uint64_t seed = 1;

  auto add_fit_opts = [&](CLI::App* sub) {
    sub->add_option("--input", input, "dataset CSV (value or value,weight rows)")->required();
    sub->add_option("--output", output, "fit document path (JSON)")->required();
    sub->add_option("--grid-size", grid_size, "number of grid cells")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "solver tolerance override");
    sub->add_option("--max-iter", max_iter, "iteration cap override");
    sub->add_option("--emit-plot", plot, "also write density plot CSV here");
  };

  CLI::App* fit_mono = app.add_subcommand(
      "fit-monotone", "project onto quantiles of non-increasing densities on (0, inf)");
  add_fit_opts(fit_mono);

  CLI::App* fit_lc = app.add_subcommand(
      "fit-logconcave", "project onto quantiles of log-concave densities");
  add_fit_opts(fit_lc);
  fit_lc->add_flag("--nonneg-support", nonneg, "constrain the support to [0, inf)");

  CLI::App* gren = app.add_subcommand("grenander", "Grenander monotone density estimate");
  gren->add_option("--input", input, "dataset CSV")->required();
  gren->add_option("--output", output, "fit document path (JSON)")->required();
  gren->add_option("--emit-plot", plot, "also write density plot CSV here");

  CLI::App* dist = app.add_subcommand(
      "distance", "Wasserstein-p distance between two fits or datasets");
  dist->add_option("--p", p, "order of the distance (>= 1)");
  dist->add_option("a", arg_a, "fit JSON or dataset CSV")->required();
  dist->add_option("b", arg_b, "fit JSON or dataset CSV")->required();

  CLI::App* samp = app.add_subcommand("sample", "draw samples from a fitted model");
  samp->add_option("--n", n_samples, "number of samples")->required()->check(CLI::PositiveNumber);
  samp->add_option("--seed", seed, "generator seed");
  samp->add_option("--output", output, "destination CSV (default stdout)");
  samp->add_option("model", fit_path, "fit JSON")->required();

  CLI::App* check = app.add_subcommand(
      "check", "recompute the first-order optimality certificate of a fit");
  check->add_option("model", fit_path, "fit JSON")->required();
  check->add_option("data", data_path, "dataset CSV the fit was computed from")->required();

  CLI::App* sim = app.add_subcommand("simulate", "consistency experiment from a config file");
  sim->add_option("config", config_path, "JSON config")->required();
  sim->add_option("--output", output, "write the result table as JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fit_mono)) {
      EmpiricalMeasure m = load_dataset(input);
      SolverConfig cfg;
      if (tol > 0) cfg.tol = tol;
      if (max_iter > 0) cfg.max_iter = max_iter;
      MonotoneFit fit = fit_monotone(discretize(m, grid_size), cfg);
      return finish_fit(make_document(fit, digest_of(m)), output, plot);
    }
    if (app.got_subcommand(fit_lc)) {
      EmpiricalMeasure m = load_dataset(input);
      LogConcaveConfig cfg;
      if (tol > 0) cfg.grad_tol = tol;
      if (max_iter > 0) cfg.max_iter = max_iter;
      cfg.nonneg_support = nonneg;
      LogConcaveFit fit = fit_logconcave(m, grid_size, cfg);
      return finish_fit(make_document(fit, digest_of(m)), output, plot);
    }
    if (app.got_subcommand(gren)) {
      EmpiricalMeasure m = load_dataset(input);
      PwAffineQuantile gq = grenander_quantile(m);
      DensityModel d = grenander(m);
      double w2 = wp_distance(Quantile(full_step(m)), Quantile(gq), 2.0);
      return finish_fit(make_document_grenander(gq, d, w2, digest_of(m)), output, plot);
    }
    if (app.got_subcommand(dist)) {
      double val = wp_distance(quantile_from_arg(arg_a), quantile_from_arg(arg_b), p);
      std::printf("%.12g\n", val);
      return 0;
    }
    if (app.got_subcommand(samp)) {
      Quantile qf = read_fit(fit_path).quantile();
      std::vector<double> xs = sample(qf, n_samples, seed);
      if (output.empty()) {
        for (double x : xs) std::printf("%.17g\n", x);
      } else {
        std::ofstream out(output);
        if (!out) throw io_error("cannot open output: " + output);
        out.precision(17);
        for (double x : xs) out << x << "\n";
        if (!out) throw io_error("write failed: " + output);
      }
      return 0;
    }
    if (app.got_subcommand(check)) {
      FitDocument doc = read_fit(fit_path);
      EmpiricalMeasure m = load_dataset(data_path);
      StepQuantile data = discretize_on(m, Partition{doc.u});
      double res;
      if (doc.model == "monotone") {
        MonotoneFit fit;
        fit.part.u = doc.u;
        fit.q = doc.q;
        res = first_order_residual(fit, data);
      } else if (doc.model == "logconcave") {
        if (doc.point_mass) throw input_error("check: point-mass fit has no certificate");
        LogConcaveFit fit;
        fit.part.u = doc.u;
        fit.c = doc.c;
        fit.h = doc.h;
        fit.q = doc.q;
        res = first_order_residual(fit, data);
      } else {
        throw input_error("check supports monotone and logconcave fits");
      }
      bool ok = res >= -1e-7;
      std::printf("first-order residual %.6e: %s\n", res, ok ? "pass" : "fail");
      return ok ? 0 : 1;
    }
    if (app.got_subcommand(sim)) {
      SimulateConfig cfg = load_simulate_config(config_path);
      ConsistencyReport rep = consistency_experiment(cfg.truth, cfg.ns, cfg.reps,
                                                     cfg.model, cfg.k, cfg.seed,
                                                     cfg.max_iter);
      std::printf("model %s, truth %s, reps %d, grid %d\n", model_name(cfg.model),
                  cfg.truth.name.empty() ? "(unnamed)" : cfg.truth.name.c_str(),
                  cfg.reps, cfg.k);
      std::printf("%10s %14s %14s %14s\n", "n", "w2_median", "w2_q25", "w2_q75");
      for (const auto& row : rep.rows)
        std::printf("%10d %14.6g %14.6g %14.6g\n", row.n, row.w2_median, row.w2_q25,
                    row.w2_q75);
      if (!output.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : rep.rows)
          rows.push_back({{"n", row.n},
                          {"w2_median", row.w2_median},
                          {"w2_q25", row.w2_q25},
                          {"w2_q75", row.w2_q75}});
        nlohmann::json out = {{"model", model_name(cfg.model)},
                              {"truth", cfg.truth.name},
                              {"reps", cfg.reps},
                              {"grid_size", cfg.k},
                              {"seed", cfg.seed},
                              {"rows", rows}};
        std::ofstream f(output);
        if (!f) throw io_error("cannot open output: " + output);
        f << out.dump(2) << "\n";
      }
      return 0;
    }
    std::fprintf(stderr, "no command selected\n");
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
