#include "zne/engine.hpp"
#include "zne/format.hpp"
#include "zne/io.hpp"
#include "zne/models.hpp"
#include "zne/stats.hpp"
#include "zne/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kInternalError = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string::npos) pos = text.size();
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw zne::SpecParseError("invalid " + what + " '" + text + "'");
  }
}

std::vector<std::vector<double>> parse_lambda_sets(const std::string& text) {
  std::vector<std::vector<double>> sets;
  for (const std::string& group : split(text, ';')) {
    if (group.empty()) continue;
    std::vector<double> lambdas;
    for (const std::string& item : split(group, ',')) {
      lambdas.push_back(parse_number(item, "lambda"));
    }
    sets.push_back(std::move(lambdas));
  }
  if (sets.empty()) throw zne::SpecParseError("no lambda sets given");
  return sets;
}

zne::ScaleSeries read_series(const std::string& source) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (source != "-") {
    file.open(source);
    if (!file) throw zne::DataError("cannot open '" + source + "' for reading");
    in = &file;
  }
  std::string first_line;
  std::vector<std::pair<double, double>> points;
  std::string line;
  long number = 0;
  while (std::getline(*in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty()) continue;
    if (trimmed[0] == '{') {
      // A dataset record line; its lambdas/expectations become the series.
      zne::ExperimentRecord rec = zne::record_from_json(trimmed);
      return zne::ScaleSeries(rec.lambdas, rec.expectations);
    }
    std::istringstream fields(trimmed);
    double lambda = 0.0, value = 0.0;
    std::string extra;
    if (!(fields >> lambda >> value) || (fields >> extra)) {
      throw zne::DataError("line " + std::to_string(number) +
                               ": expected 'lambda value'",
                           number);
    }
    points.emplace_back(lambda, value);
  }
  return zne::ScaleSeries::from_pairs(points);
}

std::string sanitize_slug(const std::string& text) {
  std::string out;
  for (char ch : text) {
    bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                (ch >= '0' && ch <= '9');
    out += keep ? ch : '-';
  }
  return out;
}

int run_simulate(const std::string& out_path, std::uint64_t seed, double bins,
                 int per_bin, long shots, int reps,
                 const std::string& lambda_sets, const std::string& regimes) {
  zne::BenchmarkConfig cfg;
  cfg.bin_width = bins;
  cfg.curves_per_bin = per_bin;
  cfg.shots = shots;
  cfg.repetitions = reps;
  cfg.seed = seed;
  cfg.lambda_sets = parse_lambda_sets(lambda_sets);
  cfg.regimes.clear();
  for (const std::string& name : split(regimes, ',')) {
    if (name.empty()) continue;
    cfg.regimes.push_back(zne::regime_by_name(name));
  }
  if (cfg.regimes.empty()) throw zne::SpecParseError("no regimes given");

  zne::Dataset dataset = zne::generate_dataset(cfg);
  zne::write_dataset(out_path, dataset.records);
  std::cout << "wrote " << dataset.records.size() << " records ("
            << dataset.curves.size() << " curves) to " << out_path << "\n";
  return 0;
}

int run_fit(const std::string& series_path, const std::string& family,
            int degree, bool degree_given, const std::string& asymptote,
            bool asymptote_given, bool bounded, std::uint64_t seed) {
  std::string spec_text = family;
  if (degree_given) {
    if (family == "exp") {
      throw zne::SpecParseError("--degree is not applicable to exp");
    }
    spec_text += ":d=" + std::to_string(degree);
  }
  if (asymptote_given) {
    if (family == "poly") {
      throw zne::SpecParseError("--asymptote is not applicable to poly");
    }
    spec_text += ":a=" + asymptote;
  }
  spec_text += bounded ? ":bounded" : ":unbounded";
  zne::ModelSpec spec = zne::parse_model_spec(spec_text);

  zne::ScaleSeries series = read_series(series_path);
  zne::FitResult result = zne::fit(series, spec, zne::SolveSettings{}, seed);
  std::cout << zne::fit_result_to_json(result) << "\n";
  return 0;
}

int run_benchmark(const std::string& data_path, const std::string& models,
                  const std::string& out_path, std::uint64_t seed) {
  std::vector<zne::ModelSpec> specs;
  for (const std::string& item : split(models, ',')) {
    if (item.empty()) continue;
    specs.push_back(zne::parse_model_spec(item));
  }
  if (specs.empty()) throw zne::SpecParseError("no model specs given");

  std::vector<zne::ExperimentRecord> records = zne::read_dataset(data_path);
  std::map<std::string, const zne::ExperimentRecord*> by_id;
  for (const zne::ExperimentRecord& rec : records) {
    if (!by_id.emplace(rec.id, &rec).second) {
      throw zne::DataError("duplicate record id '" + rec.id + "' in " +
                           data_path);
    }
  }

  std::vector<zne::BatchResult> batch =
      zne::fit_batch(records, specs, zne::SolveSettings{}, seed);

  std::vector<zne::ResultRow> rows;
  rows.reserve(batch.size());
  for (const zne::BatchResult& item : batch) {
    const zne::ExperimentRecord& rec = *by_id.at(item.record_id);
    const zne::FitResult& fit = item.result;
    zne::ResultRow row;
    row.record_id = item.record_id;
    row.spec = item.spec;
    row.family_key = zne::family_id(fit.spec);
    row.bounded = fit.spec.bounded;
    std::string lambda_key;
    for (Eigen::Index i = 0; i < rec.lambdas.size(); ++i) {
      if (i > 0) lambda_key += ',';
      lambda_key += zne::format_double(rec.lambdas[i]);
    }
    row.lambda_key = lambda_key;
    row.backend = rec.backend;
    auto width = rec.meta.find("width");
    row.width = width == rec.meta.end() ? "-" : width->second;
    row.ideal = rec.ideal;
    row.status = fit.status;
    row.zne = fit.zne_estimate;
    row.sse = fit.sse;
    row.starts_used = fit.starts_used;
    rows.push_back(std::move(row));
  }
  zne::write_results(out_path, rows);
  std::cout << "wrote " << rows.size() << " fit rows to " << out_path << "\n";
  return 0;
}

int run_compare(const std::string& results_path, const std::string& group_by,
                double alpha, const std::string& out_path) {
  zne::GroupByOptions opts{false, false, false};
  for (const std::string& dim : split(group_by, ',')) {
    if (dim.empty() || dim == "none") continue;
    if (dim == "lambda_set") {
      opts.lambda_set = true;
    } else if (dim == "backend") {
      opts.backend = true;
    } else if (dim == "width") {
      opts.width = true;
    } else {
      throw zne::SpecParseError("unknown group-by dimension '" + dim + "'");
    }
  }
  std::vector<zne::ResultRow> rows = zne::read_results(results_path);
  std::vector<zne::PairedGroupSummary> groups =
      zne::build_paired_summaries(rows, opts, alpha);
  zne::write_summary(out_path, groups);
  zne::write_deltas(out_path + ".deltas", groups);
  std::cout << "wrote " << groups.size() << " comparison groups to "
            << out_path << " (+ .deltas)\n";
  return 0;
}

int run_report(const std::string& compare_path, double ecdf_cap,
               const std::string& out_dir) {
  std::string deltas_path = compare_path;
  const std::string suffix = ".deltas";
  if (deltas_path.size() < suffix.size() ||
      deltas_path.compare(deltas_path.size() - suffix.size(), suffix.size(),
                          suffix) != 0) {
    deltas_path += suffix;
  }
  std::vector<zne::DeltaGroup> groups = zne::read_deltas(deltas_path);
  std::filesystem::create_directories(out_dir);

  std::ofstream report(out_dir + "/report.txt", std::ios::binary);
  if (!report) {
    throw zne::DataError("cannot open '" + out_dir + "/report.txt'");
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const zne::DeltaGroup& g = groups[i];
    std::string label = g.key.family_key + " lambda_set=" + g.key.lambda_key +
                        " backend=" + g.key.backend + " width=" + g.key.width;
    if (g.deltas.empty()) {
      report << label << " k=0 (no matched pairs)\n";
      continue;
    }
    zne::EcdfSummary ecdf = zne::ecdf_winsorized(g.deltas, ecdf_cap);
    std::string slug = sanitize_slug(g.key.family_key) + "_" +
                       sanitize_slug(g.key.lambda_key) + "_" +
                       sanitize_slug(g.key.backend) + "_" +
                       sanitize_slug(g.key.width);
    std::string ecdf_path = out_dir + "/ecdf_" + slug + ".tsv";
    std::ofstream out(ecdf_path, std::ios::binary);
    if (!out) throw zne::DataError("cannot open '" + ecdf_path + "'");
    out << "delta\tcdf\n";
    for (std::size_t j = 0; j < ecdf.xs.size(); ++j) {
      out << zne::format_double(ecdf.xs[j]) << '\t'
          << zne::format_double(ecdf.fs[j]) << '\n';
    }
    if (!out) throw zne::DataError("failed writing '" + ecdf_path + "'");
    report << label << " k=" << g.deltas.size() << " fraction_improved="
           << zne::format_percent(ecdf.fraction_positive) << " cap=±"
           << zne::format_double(ecdf_cap) << " ecdf=" << ecdf_path << "\n";
  }
  if (!report) throw zne::DataError("failed writing report");
  std::cout << "wrote report for " << groups.size() << " groups to " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physically bounded zero-noise extrapolation toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate the synthetic shot-noise benchmark dataset");
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  double sim_bins = 0.05;
  int sim_per_bin = 100;
  long sim_shots = 10000;
  int sim_reps = 10;
  std::string sim_lambda_sets = "1,2,3;1,3,5;1,2,3,4,5";
  std::string sim_regimes = "mild,harsh";
  simulate->add_option("--out", sim_out, "Output dataset path (JSONL)")
      ->required();
  simulate->add_option("--seed", sim_seed, "Master seed")->required();
  simulate->add_option("--bins", sim_bins, "Ideal-value bin width")->capture_default_str();
  simulate->add_option("--per-bin", sim_per_bin, "Curves per bin")->capture_default_str();
  simulate->add_option("--shots", sim_shots, "Shots per expectation")->capture_default_str();
  simulate->add_option("--reps", sim_reps, "Repetitions per lambda set")->capture_default_str();
  simulate->add_option("--lambda-sets", sim_lambda_sets,
                       "Semicolon-separated lambda sets")->capture_default_str();
  simulate->add_option("--regimes", sim_regimes,
                       "Comma-separated regime names (mild, harsh)")->capture_default_str();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model to one series");
  std::string fit_series, fit_family, fit_asymptote = "free";
  int fit_degree = 1;
  bool fit_bounded = false;
  std::uint64_t fit_seed = 0;
  fit_cmd
      ->add_option("--series", fit_series,
                   "Series path, '-' for stdin; lines of 'lambda value' or a "
                   "dataset record line")
      ->required();
  auto* family_opt =
      fit_cmd->add_option("--family", fit_family, "poly, exp or polyexp")
          ->required();
  (void)family_opt;
  auto* degree_opt =
      fit_cmd->add_option("--degree", fit_degree, "Polynomial degree")->capture_default_str();
  auto* asymptote_opt = fit_cmd->add_option(
      "--asymptote", fit_asymptote, "'free' or a fixed numeric value")->capture_default_str();
  fit_cmd->add_flag("--bounded", fit_bounded,
                    "Constrain the zero-noise value to [-1, 1]");
  fit_cmd->add_option("--seed", fit_seed, "Seed for perturbed starts")->capture_default_str();

  // benchmark
  auto* benchmark =
      app.add_subcommand("benchmark", "Fit model specs across a dataset");
  std::string bench_data, bench_models, bench_out;
  std::uint64_t bench_seed = 0;
  benchmark->add_option("--data", bench_data, "Dataset path (JSONL)")
      ->required();
  benchmark
      ->add_option("--models", bench_models,
                   "Comma-separated model specs, e.g. "
                   "'exp:a=free:bounded,exp:a=free:unbounded'")
      ->required();
  benchmark->add_option("--out", bench_out, "Output results path (JSONL)")
      ->required();
  benchmark->add_option("--seed", bench_seed, "Master seed")->required();

  // compare
  auto* compare =
      app.add_subcommand("compare", "Paired bounded-vs-unbounded statistics");
  std::string cmp_results, cmp_out, cmp_group_by = "lambda_set,backend,width";
  double cmp_alpha = 0.05;
  compare->add_option("--results", cmp_results, "Results path from benchmark")
      ->required();
  compare->add_option("--group-by", cmp_group_by,
                      "Comma-separated dimensions: lambda_set, backend, "
                      "width; 'none' pools everything")->capture_default_str();
  compare->add_option("--alpha", cmp_alpha, "Significance level")->capture_default_str();
  compare->add_option("--out", cmp_out, "Summary table output path")
      ->required();

  // report
  auto* report = app.add_subcommand(
      "report", "ECDF step points and improvement fractions per group");
  std::string rep_compare, rep_out_dir;
  double rep_cap = 2.0;
  report
      ->add_option("--compare", rep_compare,
                   "Summary path from compare (reads '<path>.deltas')")
      ->required();
  report->add_option("--ecdf-cap", rep_cap, "Winsorising cap")->capture_default_str();
  report->add_option("--out-dir", rep_out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(sim_out, sim_seed, sim_bins, sim_per_bin, sim_shots,
                          sim_reps, sim_lambda_sets, sim_regimes);
    }
    if (fit_cmd->parsed()) {
      return run_fit(fit_series, fit_family, fit_degree,
                     degree_opt->count() > 0, fit_asymptote,
                     asymptote_opt->count() > 0, fit_bounded, fit_seed);
    }
    if (benchmark->parsed()) {
      return run_benchmark(bench_data, bench_models, bench_out, bench_seed);
    }
    if (compare->parsed()) {
      return run_compare(cmp_results, cmp_group_by, cmp_alpha, cmp_out);
    }
    if (report->parsed()) {
      return run_report(rep_compare, rep_cap, rep_out_dir);
    }
    std::cerr << "no subcommand given\n";
    return kUsageError;
  } catch (const zne::SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const zne::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}
