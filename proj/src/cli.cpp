#include "brt/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "brt/benchmark.hpp"
#include "brt/errors.hpp"
#include "brt/io.hpp"
#include "brt/kernels.hpp"
#include "brt/metrics.hpp"
#include "brt/phantoms.hpp"

namespace brt {

namespace fs = std::filesystem;

PhantomPair render_phantoms(const ExperimentConfig& cfg) {
  const ImageGrid grid = cfg.grid();
  Image unit = cfg.phantom == PhantomKind::SheppLogan ? shepp_logan(grid, 1.0)
                                                      : rectangle_phantom(grid, 1.0, 1.5, 1.0, 1.0);
  PhantomPair out{unit, scatter_map(unit, cfg.scatter)};
  for (double& v : out.mu.values) v *= cfg.max_mu;
  return out;
}

OperatorSet build_operators(const ExperimentConfig& cfg, const std::vector<SourceDetectorPair>& pairs) {
  return build_operator_set(cfg.grid(), pairs, cfg.op, cfg.extra_padding);
}

MeasurementSet simulate_measurements(const ExperimentConfig& cfg, const Image& mu, const Image& alpha,
                                     const OperatorSet& ops) {
  if (!(mu.grid == ops.grid()) || !(alpha.grid == ops.grid()))
    throw GridMismatch("phantom images do not match the configured grid");
  std::vector<SourceDetectorPair> pairs;
  for (std::size_t i = 0; i < ops.size(); ++i) pairs.push_back(ops[i].pair());
  MeasurementSet ms = make_measurement_set(ops.grid(), pairs, cfg.I0, cfg.beta);
  MeanCounts g = mean_counts(alpha, mu, ms, ops);
  ms.counts = cfg.noise_free ? std::move(g.g) : simulate(g, cfg.seed);
  return ms;
}

std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::string out = "iter,half,J,I_div,R_alpha,R_mu,wall_ms\n";
  char buf[256];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", e.iter, e.half, e.parts.J,
                  e.parts.i_div, e.parts.r_alpha, e.parts.r_mu, e.wall_ms);
    out += buf;
  }
  return out;
}

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string op;
  int workers = 0;
  bool freeze_mu = false, freeze_alpha = false, pgm = false, quiet = false;
  std::string mu, alpha, data, truth_mu, truth_alpha, mu_hat, mu_init, alpha_init;
  std::vector<std::size_t> sizes, pair_counts;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.op.empty()) c.op = parse_operator_choice(o.op);
  int w = o.workers;
  if (w <= 0)
    if (const char* env = std::getenv("BRT_WORKERS")) {
      try {
        w = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("BRT_WORKERS is not an integer: ") + env);
      }
      if (w < 0) throw ConfigError("BRT_WORKERS must be nonnegative");
    }
  if (w <= 0) w = c.workers;
  c.workers = w;
  set_workers(w);
  c.validate();
  return c;
}

Image read_kind(const std::string& path, ImageKind kind, const ImageGrid* grid) {
  Image img = read_image(path);
  if (img.kind != kind) throw FormatError(path + ": unexpected image kind");
  if (grid && !(img.grid == *grid)) throw GridMismatch(path + ": grid differs from the expected grid");
  img.check_constraints();
  return img;
}

fs::path out_dir(const Options& o) {
  fs::path d = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw IoError("cannot create output directory " + d.string());
  return d;
}

void maybe_pgm(const Options& o, const fs::path& path, const Image& img, double hi) {
  if (!o.pgm) return;
  fs::path p = path;
  write_pgm(p.replace_extension(".pgm"), img, 0.0, hi);
}

double max_of(const Image& img) {
  double m = 0.0;
  for (double v : img.values) m = std::max(m, v);
  return m > 0.0 ? m : 1.0;
}

void cmd_phantom(const Options& o) {
  const ExperimentConfig c = load(o);
  const PhantomPair p = render_phantoms(c);
  const fs::path d = out_dir(o);
  write_image(d / "mu.brti", p.mu);
  write_image(d / "alpha.brti", p.alpha);
  maybe_pgm(o, d / "mu.brti", p.mu, c.max_mu);
  maybe_pgm(o, d / "alpha.brti", p.alpha, 1.0);
}

void cmd_simulate(const Options& o) {
  const ExperimentConfig c = load(o);
  const ImageGrid grid = c.grid();
  const fs::path d = out_dir(o);
  Image mu, alpha;
  if (o.mu.empty() || o.alpha.empty()) {
    const PhantomPair p = render_phantoms(c);
    mu = o.mu.empty() ? p.mu : read_kind(o.mu, ImageKind::Attenuation, &grid);
    alpha = o.alpha.empty() ? p.alpha : read_kind(o.alpha, ImageKind::Scatter, &grid);
  } else {
    mu = read_kind(o.mu, ImageKind::Attenuation, &grid);
    alpha = read_kind(o.alpha, ImageKind::Scatter, &grid);
  }
  const OperatorSet ops = build_operators(c, c.geometry());
  write_measurements(d / "data.brtm", simulate_measurements(c, mu, alpha, ops));
}

void write_ssim(const fs::path& path, const std::vector<std::pair<std::string, double>>& rows) {
  std::string s = "image,ssim\n";
  char buf[128];
  for (const auto& [name, v] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", name.c_str(), v);
    s += buf;
  }
  write_file(path, s);
}

void cmd_reconstruct(const Options& o) {
  const ExperimentConfig c = load(o);
  if (o.data.empty()) throw ConfigError("reconstruct needs --data");
  const MeasurementSet ms = read_measurements(o.data);
  const ImageGrid& grid = ms.grid;
  if (o.freeze_mu && o.mu_init.empty()) throw ConfigError("--freeze-attenuation needs --mu-init");
  if (o.freeze_alpha && o.alpha_init.empty()) throw ConfigError("--freeze-scatter needs --alpha-init");

  const Image alpha0 = o.alpha_init.empty() ? Image(grid, ImageKind::Scatter, c.alpha0)
                                            : read_kind(o.alpha_init, ImageKind::Scatter, &grid);
  const Image mu0 = o.mu_init.empty() ? Image(grid, ImageKind::Attenuation, c.mu0)
                                      : read_kind(o.mu_init, ImageKind::Attenuation, &grid);
  std::optional<Image> truth_mu, truth_alpha;
  if (!o.truth_mu.empty()) truth_mu = read_kind(o.truth_mu, ImageKind::Attenuation, &grid);
  if (!o.truth_alpha.empty()) truth_alpha = read_kind(o.truth_alpha, ImageKind::Scatter, &grid);

  const OperatorSet ops = build_operator_set(grid, ms.pairs, c.op, c.extra_padding);
  SolverConfig sc = c.solver();
  sc.freeze_mu = o.freeze_mu;
  sc.freeze_alpha = o.freeze_alpha;

  const fs::path d = out_dir(o);
  ProgressFn progress;
  if (!o.quiet)
    progress = [](const TraceEntry& e) {
      if (e.half == 2 || e.iter == 0) std::fprintf(stderr, "iter %d  J = %.10g\n", e.iter, e.parts.J);
    };
  const ReconResult res = joint_estimate(alpha0, mu0, ms, ops, sc, progress);
  write_image(d / "alpha.brti", res.alpha);
  write_image(d / "mu.brti", res.mu);
  write_file(d / "j_trace.csv", trace_csv(res.trace));
  maybe_pgm(o, d / "alpha.brti", res.alpha, 1.0);
  maybe_pgm(o, d / "mu.brti", res.mu, truth_mu ? max_of(*truth_mu) : max_of(res.mu));

  std::vector<std::pair<std::string, double>> scores;
  if (truth_alpha) scores.emplace_back("alpha", ssim(res.alpha, *truth_alpha));
  if (truth_mu) scores.emplace_back("mu", ssim(res.mu, *truth_mu));
  if (!scores.empty()) write_ssim(d / "ssim.csv", scores);
}

void cmd_baseline(const Options& o) {
  const ExperimentConfig c = load(o);
  if (o.data.empty()) throw ConfigError("baseline needs --data");
  const MeasurementSet ms = read_measurements(o.data);
  std::optional<Image> mu_hat;
  std::optional<OperatorSet> ops;
  if (!o.mu_hat.empty()) {
    mu_hat = read_kind(o.mu_hat, ImageKind::Attenuation, &ms.grid);
    ops = build_operator_set(ms.grid, ms.pairs, c.op, c.extra_padding);
  }
  const BaselineData pre = baseline_preprocess(ms);
  const Image a = baseline_scatter(pre, ms, mu_hat ? &*mu_hat : nullptr, ops ? &*ops : nullptr);

  const fs::path d = out_dir(o);
  write_image(d / "baseline_alpha.brti", a);
  maybe_pgm(o, d / "baseline_alpha.brti", a, 1.0);
  for (std::size_t i = 0; i < ms.num_pairs(); ++i)
    write_image(d / ("bhat_" + std::to_string(i) + ".brti"), Image(ms.grid, ImageKind::Data, pre.bhat[i]));
  if (!o.truth_alpha.empty()) {
    const Image truth = read_kind(o.truth_alpha, ImageKind::Scatter, &ms.grid);
    write_ssim(d / "ssim.csv", {{"baseline_alpha", ssim(a, truth)}});
  }
}

void cmd_benchmark(const Options& o) {
  const ExperimentConfig c = load(o);
  BenchSettings s;
  s.sizes = o.sizes.empty() ? c.bench_sizes : o.sizes;
  s.pair_counts = o.pair_counts.empty() ? c.bench_pair_counts : o.pair_counts;
  for (auto n : s.pair_counts)
    if (n < 1 || n > 8) throw ConfigError("--pair-counts entries must be in [1, 8]");
  for (auto n : s.sizes)
    if (n < 4) throw ConfigError("--sizes entries must be at least 4");
  s.repetitions = c.bench_repetitions;
  s.memory_budget_bytes = c.bench_memory_mb * 1024.0 * 1024.0;
  s.workers = c.workers;
  s.lambda = c.lambda_alpha;
  if (!o.op.empty() && c.op != OperatorChoice::Auto) s.realizations = {c.op};

  const fs::path path = o.out.empty() ? fs::path("benchmark.csv") : fs::path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::string csv = bench_csv_header() + "\n";
  std::cout << bench_csv_header() << std::endl;
  run_benchmark(s, [&](const BenchRow& r) {
    const std::string line = bench_csv_row(r);
    std::cout << line << std::endl;
    csv += line + "\n";
    write_file(path, csv);
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Broken-ray transform simulation and joint scatter/attenuation reconstruction", "brt"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "Experiment config (INI)")->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed, "Override the simulation seed");
    s->add_option("--operator", o.op, "Operator realization")
        ->check(CLI::IsMember({"direct", "fourier", "auto"}));
    s->add_option("--workers", o.workers, "Worker threads (falls back to BRT_WORKERS)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* phantom = app.add_subcommand("phantom", "Render the attenuation and scatter phantoms");
  common(phantom);
  phantom->add_option("--out", o.out, "Output directory");
  phantom->add_flag("--pgm", o.pgm, "Also write 8-bit PGM previews");

  auto* sim = app.add_subcommand("simulate", "Simulate measurements");
  common(sim);
  sim->add_option("--mu", o.mu, "Attenuation image (defaults to the configured phantom)");
  sim->add_option("--alpha", o.alpha, "Scatter image (defaults to the configured phantom)");
  sim->add_option("--out", o.out, "Output directory");

  auto* rec = app.add_subcommand("reconstruct", "Joint scatter and attenuation estimation");
  common(rec);
  rec->add_option("--data", o.data, "Measurement file")->required();
  rec->add_option("--out", o.out, "Output directory");
  rec->add_option("--mu-init", o.mu_init, "Initial (or known) attenuation image");
  rec->add_option("--alpha-init", o.alpha_init, "Initial (or known) scatter image");
  rec->add_option("--truth-mu", o.truth_mu, "True attenuation, for SSIM");
  rec->add_option("--truth-alpha", o.truth_alpha, "True scatter image, for SSIM");
  rec->add_flag("--freeze-attenuation", o.freeze_mu, "Keep the attenuation image fixed");
  rec->add_flag("--freeze-scatter", o.freeze_alpha, "Keep the scatter image fixed");
  rec->add_flag("--pgm", o.pgm, "Also write 8-bit PGM previews");
  rec->add_flag("--quiet", o.quiet, "No progress output");

  auto* base = app.add_subcommand("baseline", "Thresholded log data and the baseline scatter estimate");
  common(base);
  base->add_option("--data", o.data, "Measurement file")->required();
  base->add_option("--mu-hat", o.mu_hat, "Attenuation estimate");
  base->add_option("--truth-alpha", o.truth_alpha, "True scatter image, for SSIM");
  base->add_option("--out", o.out, "Output directory");
  base->add_flag("--pgm", o.pgm, "Also write 8-bit PGM previews");

  auto* bench = app.add_subcommand("benchmark", "Time operators and update steps");
  common(bench);
  bench->add_option("--sizes", o.sizes, "Pixel counts")->delimiter(',');
  bench->add_option("--pair-counts", o.pair_counts, "Numbers of scatter pairs")->delimiter(',');
  bench->add_option("--out", o.out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*phantom) cmd_phantom(o);
    else if (*sim) cmd_simulate(o);
    else if (*rec) cmd_reconstruct(o);
    else if (*base) cmd_baseline(o);
    else if (*bench) cmd_benchmark(o);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"brt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace brt
