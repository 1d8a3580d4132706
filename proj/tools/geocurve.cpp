#include <CLI11.hpp>

#include "geocurve/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"global regression for sphere-valued curve processes"};
  app.require_subcommand(1);

  geocurve::cli::CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "configuration file (JSON)");
    sub->add_option("--set", args.overrides, "override a config key, key.path=value");
    sub->add_option("--seed", args.seed, "override the simulation seed");
    sub->add_option("--out", args.out_dir, "output directory");
  };

  auto* sim = app.add_subcommand("simulate", "generate a paired curve sample");
  add_common(sim);

  auto* fit = app.add_subcommand("fit-predict", "fit the model and predict one window");
  add_common(fit);
  fit->add_option("--sample", args.sample_dir, "sample directory (overrides io.input_dir)");

  auto* sel = app.add_subcommand("select", "run variable selection over candidates");
  add_common(sel);
  sel->add_option("--sample", args.sample_dir, "sample directory (overrides io.input_dir)");

  auto* rep = app.add_subcommand("report", "aggregate fit-predict runs");
  add_common(rep);
  rep->add_option("runs", args.run_dirs, "run directories containing metrics.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  if (sim->parsed()) return geocurve::cli::run_simulate(args);
  if (fit->parsed()) return geocurve::cli::run_fit_predict(args);
  if (sel->parsed()) return geocurve::cli::run_select(args);
  if (rep->parsed()) return geocurve::cli::run_report(args);
  return 1;
}
