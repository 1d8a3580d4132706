#include "geocurve/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "geocurve/config.hpp"
#include "geocurve/errors.hpp"
#include "geocurve/io.hpp"
#include "geocurve/kernels.hpp"
#include "geocurve/plot.hpp"
#include "geocurve/regression.hpp"
#include "geocurve/selection.hpp"
#include "geocurve/simulation.hpp"

namespace geocurve::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const AntipodalPoint& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateCovariance& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 1;
  } catch (const DimensionMismatch& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 1;
  } catch (const GridMismatch& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "geocurve: " << e.what() << "\n";
    return 2;
  }
}

ExperimentConfig effective_config(const CommonArgs& args) {
  auto cfg = load_config(args.config_path, args.overrides);
  if (args.seed) cfg.generator.seed = *args.seed;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (!args.sample_dir.empty()) cfg.input_dir = args.sample_dir;
  return cfg;
}

std::string index_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04zu.csv", prefix, i);
  return buf;
}

struct Sample {
  std::vector<ManifoldCurve> responses, regressors;
  json manifest;
};

Sample load_sample(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("sample manifest not found: " + (dir / "manifest.json").string());
  Sample s;
  try {
    in >> s.manifest;
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  if (s.manifest.value("kind", "") != "sample")
    throw IoError(dir.string() + ": manifest is not a sample manifest");
  const auto& files = s.manifest.at("files");
  for (const auto& f : files.at("responses"))
    s.responses.push_back(io::read_curve_csv(dir / f.get<std::string>()));
  for (const auto& f : files.at("regressors"))
    s.regressors.push_back(io::read_curve_csv(dir / f.get<std::string>()));
  if (s.responses.empty() || s.responses.size() != s.regressors.size())
    throw IoError(dir.string() + ": sample has mismatched response/regressor counts");
  return s;
}

// m from the config, or from the lag-covariance decay of the regressors
// (thinned the same way fit thins them).
std::size_t resolve_m(const ExperimentConfig& cfg, const std::vector<ManifoldCurve>& xs) {
  if (cfg.m > 0) return cfg.m;
  const auto idx =
      TimeGrid::subsample_indices(xs[0].grid().size(), cfg.fit.working_resolution);
  std::vector<ManifoldCurve> thin;
  thin.reserve(xs.size());
  const bool need = idx.size() < xs[0].grid().size();
  for (const auto& x : xs) thin.push_back(need ? x.restrict_to(idx) : x);
  const auto mean = frechet_mean_curve(thin, cfg.fit.karcher);
  std::vector<TangentCurve> logs;
  logs.reserve(thin.size());
  for (const auto& x : thin) logs.push_back(log_map_curve(mean.mean, x));
  return estimate_lag_range(logs, cfg.lag_threshold);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

int run_simulate(const CommonArgs& args) {
  return guarded([&] {
    auto cfg = effective_config(args);
    GeneratorConfig gen = cfg.generator;
    gen.sde.grid = TimeGrid::uniform(0.0, cfg.sim_t_end, cfg.sim_nodes);
    const auto sample = generate_bivariate_sample(gen);

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    json files;
    files["responses"] = json::array();
    files["regressors"] = json::array();
    for (std::size_t i = 0; i < gen.n; ++i) {
      const auto yname = index_name("Y", i), xname = index_name("X", i);
      io::write_curve_csv(dir / yname, sample.responses[i]);
      io::write_curve_csv(dir / xname, sample.regressors[i]);
      files["responses"].push_back(yname);
      files["regressors"].push_back(xname);
    }
    json manifest;
    manifest["kind"] = "sample";
    manifest["n"] = gen.n;
    manifest["config"] = json::parse(config_to_json(cfg));
    manifest["volatility"] = sample.volatility;
    manifest["files"] = files;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    if (cfg.plots) {
      const std::size_t show = std::min<std::size_t>(2, gen.n);
      std::vector<ManifoldCurve> curves;
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < show; ++i) {
        curves.push_back(sample.responses[i]);
        labels.push_back("response " + std::to_string(i));
        curves.push_back(sample.regressors[i]);
        labels.push_back("regressor " + std::to_string(i));
      }
      plot::write_svg(dir / "sample_scatter.svg",
                      plot::sphere_scatter("generated sample (orthographic +z view)",
                                           curves, labels));
    }
    std::cout << "wrote " << 2 * gen.n << " curves to " << dir.string() << "\n";
    return 0;
  });
}

int run_fit_predict(const CommonArgs& args) {
  return guarded([&] {
    auto cfg = effective_config(args);
    if (cfg.input_dir.empty())
      throw InvalidArgument("fit-predict: no sample directory (io.input_dir or --sample)");
    const auto sample = load_sample(cfg.input_dir);
    const std::size_t m = resolve_m(cfg, sample.regressors);

    const auto model = RegressionModel::fit(sample.responses, sample.regressors, m, cfg.fit);
    const auto query = model.make_query(cfg.query_index);
    const auto pred = model.predict(query, cfg.predict);

    const auto& truth = model.response(cfg.query_index);
    const double sup_err = sup_geodesic_distance(pred.curve, truth);
    const double int_err = integrated_sq_geodesic_distance(pred.curve, truth);
    double wmean = 0.0;
    for (double w : pred.sample_weights) wmean += w;
    wmean /= static_cast<double>(pred.sample_weights.size());

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    io::write_curve_csv(dir / "predicted.csv", pred.curve);
    io::write_curve_csv(dir / "mean_curve.csv", model.mu_hat());
    {
      std::ostringstream w;
      w << "window_index,weight\n";
      for (std::size_t i = 0; i < pred.sample_weights.size(); ++i)
        w << i << "," << io::format_double(pred.sample_weights[i]) << "\n";
      write_text(dir / "weights.csv", w.str());
    }
    {
      std::ostringstream t;
      t << "sweep,objective\n";
      for (std::size_t i = 0; i < pred.objective_trace.size(); ++i)
        t << i << "," << io::format_double(pred.objective_trace[i]) << "\n";
      write_text(dir / "trace.csv", t.str());
    }
    json metrics;
    metrics["kind"] = "fit_predict_metrics";
    metrics["n"] = model.n();
    metrics["m"] = model.m();
    metrics["query_index"] = cfg.query_index;
    metrics["objective"] = pred.objective;
    metrics["converged"] = pred.converged;
    metrics["coord_capped"] = pred.coord_capped;
    metrics["sweeps"] = pred.objective_trace.empty() ? 0 : pred.objective_trace.size() - 1;
    metrics["sup_geodesic_error"] = sup_err;
    metrics["integrated_sq_error"] = int_err;
    metrics["weight_mean"] = wmean;
    metrics["mean_converged"] = model.mean_converged();
    metrics["retained_eigenvalues"] = model.inverse().retained();
    metrics["ridge"] = model.inverse().ridge();
    metrics["working_nodes"] = model.grid().size();
    metrics["config"] = json::parse(config_to_json(cfg));
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");

    if (cfg.plots) {
      plot::Series tr{"objective", {}, pred.objective_trace};
      for (std::size_t i = 0; i < pred.objective_trace.size(); ++i)
        tr.x.push_back(static_cast<double>(i));
      plot::write_svg(dir / "trace.svg",
                      plot::line_plot("prediction objective by sweep", {&tr, 1}, "sweep",
                                      "objective"));
      std::vector<ManifoldCurve> curves{pred.curve, truth};
      std::vector<std::string> labels{"predicted", "observed"};
      plot::write_svg(dir / "prediction_scatter.svg",
                      plot::sphere_scatter("prediction vs observed", curves, labels));
    }
    std::cout << "sup geodesic error " << io::format_double(sup_err) << ", objective "
              << io::format_double(pred.objective) << "\n";
    return 0;
  });
}

int run_select(const CommonArgs& args) {
  return guarded([&] {
    auto cfg = effective_config(args);
    if (cfg.input_dir.empty())
      throw InvalidArgument("select: no sample directory (io.input_dir or --sample)");
    const auto sample = load_sample(cfg.input_dir);
    const std::size_t m = resolve_m(cfg, sample.regressors);
    const auto model = RegressionModel::fit(sample.responses, sample.regressors, m, cfg.fit);

    std::vector<std::size_t> times = cfg.prediction_times;
    if (times.empty()) times.push_back(model.n() / 2);

    std::vector<int> scenarios;
    if (cfg.scenario1) scenarios.push_back(1);
    if (cfg.scenario2) scenarios.push_back(2);
    if (scenarios.empty()) throw InvalidArgument("select: both scenarios disabled");

    json rows = json::array();
    std::ostringstream table;
    table << "scenario,prediction_index,selected,s1,s2,empty_intersection\n";
    auto join = [](const std::vector<std::size_t>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ";";
        s += std::to_string(v[i]);
      }
      return s;
    };

    std::vector<plot::Series> weight_series, dist_series;
    std::optional<SelectionResult> first_row;
    std::size_t first_time = 0;
    for (int sc : scenarios) {
      for (std::size_t st : times) {
        SelectionConfig sel = cfg.selection;
        sel.prediction_index = st;
        sel.include_s_star = (sc == 2);
        if (sel.response_times.empty()) sel.response_times = {st};
        const auto res = scvsa(model, sel);
        if (!first_row) {
          first_row = res;
          first_time = st;
        }
        json row;
        row["scenario"] = sc;
        row["prediction_index"] = st;
        row["s1"] = res.s1;
        row["s2"] = res.s2;
        row["selected"] = res.selected;
        row["empty_intersection"] = res.empty_intersection;
        row["candidates"] = res.candidates;
        row["weights"] = res.weights;
        row["distances"] = res.distances;
        row["relative_distances"] = res.relative_distances;
        rows.push_back(row);
        table << "Scenario " << sc << "," << st << "," << join(res.selected) << ","
              << join(res.s1) << "," << join(res.s2) << ","
              << (res.empty_intersection ? "true" : "false") << "\n";

        plot::Series ws, ds;
        ws.label = "S" + std::to_string(sc) + " s*=" + std::to_string(st);
        ds.label = ws.label;
        for (std::size_t i = 0; i < res.candidates.size(); ++i) {
          ws.x.push_back(static_cast<double>(res.candidates[i]));
          ws.y.push_back(res.weights[i]);
          ds.x.push_back(static_cast<double>(res.candidates[i]));
          ds.y.push_back(res.relative_distances[i]);
        }
        weight_series.push_back(std::move(ws));
        dist_series.push_back(std::move(ds));
      }
    }

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    json out;
    out["kind"] = "selection_report";
    out["m"] = model.m();
    out["n"] = model.n();
    out["rows"] = rows;
    out["config"] = json::parse(config_to_json(cfg));
    write_text(dir / "selection.json", out.dump(2) + "\n");
    write_text(dir / "table.csv", table.str());

    if (cfg.plots) {
      plot::write_svg(dir / "weights.svg",
                      plot::line_plot("empirical weights by candidate", weight_series,
                                      "candidate index", "weight"));
      plot::write_svg(dir / "distances.svg",
                      plot::line_plot("relative semi-distance by candidate", dist_series,
                                      "candidate index", "relative distance"));
      // pointwise geodesic distance curves for the first row's selection
      const auto& sel0 = first_row->selected.empty() ? first_row->candidates
                                                     : first_row->selected;
      std::vector<plot::Series> pw;
      const std::size_t N = model.grid().size();
      std::vector<double> dist(N);
      const auto& yref = model.response(first_time);
      for (std::size_t k = 0; k < std::min<std::size_t>(6, sel0.size()); ++k) {
        const auto& xc = model.regressor(sel0[k]);
        kernels::pointwise_geodesic_soa(xc.values().data(), yref.values().data(),
                                        model.dim(), N, dist.data());
        plot::Series s;
        s.label = "candidate " + std::to_string(sel0[k]);
        for (std::size_t t = 0; t < N; ++t) {
          s.x.push_back(model.grid().node(t));
          s.y.push_back(dist[t]);
        }
        pw.push_back(std::move(s));
      }
      plot::write_svg(dir / "pointwise_distances.svg",
                      plot::line_plot("pointwise geodesic distance to the response", pw,
                                      "t", "distance"));
    }
    std::cout << "selection rows: " << rows.size() << "\n";
    return 0;
  });
}

int run_report(const CommonArgs& args) {
  return guarded([&] {
    auto cfg = effective_config(args);
    if (args.run_dirs.empty())
      throw InvalidArgument("report: no run directories given");

    struct Row {
      std::string dir;
      std::size_t n = 0;
      double sup_err = 0.0, int_err = 0.0, wmean = 0.0;
      bool converged = false;
    };
    std::vector<Row> rows;
    std::vector<std::string> missing;
    for (const auto& d : args.run_dirs) {
      std::ifstream in(fs::path(d) / "metrics.json");
      if (!in) {
        missing.push_back(d);
        continue;
      }
      json metrics;
      try {
        in >> metrics;
      } catch (const json::exception&) {
        missing.push_back(d);
        continue;
      }
      if (metrics.value("kind", "") != "fit_predict_metrics") {
        missing.push_back(d);
        continue;
      }
      Row r;
      r.dir = d;
      r.n = metrics.value("n", std::size_t{0});
      r.sup_err = metrics.value("sup_geodesic_error", 0.0);
      r.int_err = metrics.value("integrated_sq_error", 0.0);
      r.wmean = metrics.value("weight_mean", 0.0);
      r.converged = metrics.value("converged", false);
      rows.push_back(std::move(r));
    }
    if (rows.empty()) {
      std::cerr << "geocurve: no usable runs";
      for (const auto& d : missing) std::cerr << " " << d;
      std::cerr << "\n";
      return 1;
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.n < b.n; });

    bool weight_ok = true;
    for (const auto& r : rows) weight_ok = weight_ok && std::abs(r.wmean - 1.0) <= 1e-8;
    bool trend_known = false, trend_ok = true;
    {
      std::vector<Row> distinct;
      for (const auto& r : rows)
        if (distinct.empty() || distinct.back().n != r.n) distinct.push_back(r);
      if (distinct.size() >= 2) {
        trend_known = true;
        for (std::size_t i = 1; i < distinct.size(); ++i)
          trend_ok = trend_ok && distinct[i].sup_err <= distinct[i - 1].sup_err + 1e-12;
      }
    }

    std::ostringstream md;
    md << "# run summary\n\n";
    md << "| run | n | sup geodesic error | integrated sq error | weight mean | converged |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
      md << "| " << r.dir << " | " << r.n << " | " << io::format_double(r.sup_err) << " | "
         << io::format_double(r.int_err) << " | " << io::format_double(r.wmean) << " | "
         << (r.converged ? "yes" : "no") << " |\n";
    md << "\n";
    md << "- weight-mean identity (|mean - 1| <= 1e-8): " << (weight_ok ? "pass" : "FAIL")
       << "\n";
    if (trend_known)
      md << "- error non-increasing in n: " << (trend_ok ? "pass" : "FAIL") << "\n";
    else
      md << "- error non-increasing in n: not evaluated (needs >= 2 distinct n)\n";
    if (!missing.empty()) {
      md << "\nmissing or unreadable runs:\n";
      for (const auto& d : missing) md << "- " << d << "\n";
    }

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    write_text(dir / "report.md", md.str());

    json summary;
    summary["kind"] = "report";
    summary["runs"] = json::array();
    for (const auto& r : rows)
      summary["runs"].push_back({{"dir", r.dir},
                                 {"n", r.n},
                                 {"sup_geodesic_error", r.sup_err},
                                 {"integrated_sq_error", r.int_err},
                                 {"weight_mean", r.wmean},
                                 {"converged", r.converged}});
    summary["missing"] = missing;
    summary["weight_identity_pass"] = weight_ok;
    summary["trend_evaluated"] = trend_known;
    summary["trend_pass"] = trend_ok;
    write_text(dir / "report.json", summary.dump(2) + "\n");

    if (cfg.plots) {
      plot::Series s;
      s.label = "sup geodesic error";
      for (const auto& r : rows) {
        s.x.push_back(static_cast<double>(r.n));
        s.y.push_back(r.sup_err);
      }
      plot::write_svg(dir / "trend.svg",
                      plot::line_plot("prediction error by sample size", {&s, 1}, "n",
                                      "sup geodesic error"));
    }

    const bool checks_ok = weight_ok && (!trend_known || trend_ok);
    std::cout << (checks_ok ? "checks passed" : "checks FAILED") << " over " << rows.size()
              << " runs\n";
    return checks_ok ? 0 : 3;
  });
}

}  // namespace geocurve::cli
