#include <malloc.h>

// Command-line front end: analyze | simulate | estimate | sweep | verify.
// Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 acceptance failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mccm/cascade.hpp"
#include "mccm/errors.hpp"
#include "mccm/estimators.hpp"
#include "mccm/io.hpp"
#include "mccm/regimes.hpp"
#include "mccm/spectrum.hpp"
#include "mccm/svg.hpp"
#include "mccm/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::string model = "lognormal";
  double sigma = -1;
  double sigma2_over_logb = -1;
  double x = -1;
  std::string atoms;
  int b = 2;
  int depth = 10;
  int reps = 1;
  std::uint64_t seed = 1;
  std::uint64_t kmax = 0;
  std::string out;
  int threads = 0;
  std::string format = "csv";
  int grid = 25;
  bool estimate_sweep = false;
  bool dump_fields = false;
  bool skip_repro = false;
  std::vector<std::string> inputs;
};

// flags > config file > defaults
void apply_config_defaults(CLI::App& app, Options& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream is(opt.config_path);
  if (!is) throw mccm::Error(mccm::ErrorCode::BadConfig, "cannot open config " + opt.config_path);
  json cfg;
  try {
    is >> cfg;
  } catch (const std::exception& e) {
    throw mccm::Error(mccm::ErrorCode::BadConfig,
                      std::string("config parse error in ") + opt.config_path + ": " + e.what());
  }
  const auto take = [&](const char* flag, auto& field) {
    using T = std::decay_t<decltype(field)>;
    const std::string key = flag;
    if (cfg.contains(key) && app.count("--" + key) == 0) field = cfg.at(key).get<T>();
  };
  take("model", opt.model);
  take("sigma", opt.sigma);
  take("sigma2-over-logb", opt.sigma2_over_logb);
  take("x", opt.x);
  take("atoms", opt.atoms);
  take("b", opt.b);
  take("depth", opt.depth);
  take("reps", opt.reps);
  take("seed", opt.seed);
  take("kmax", opt.kmax);
  take("out", opt.out);
  take("threads", opt.threads);
  take("format", opt.format);
  take("grid", opt.grid);
}

mccm::WeightModel build_model(const Options& opt) {
  if (opt.model == "lognormal") {
    double sigma = opt.sigma;
    if (opt.sigma2_over_logb > 0)
      sigma = std::sqrt(opt.sigma2_over_logb * std::log(static_cast<double>(opt.b)));
    if (!(sigma > 0))
      throw mccm::Error(mccm::ErrorCode::BadConfig, "lognormal needs --sigma or --sigma2-over-logb");
    return mccm::WeightModel::log_normal(sigma);
  }
  if (opt.model == "twopoint") {
    if (!(opt.x > 0))
      throw mccm::Error(mccm::ErrorCode::BadConfig, "twopoint needs --x");
    return mccm::WeightModel::two_point(opt.x);
  }
  if (opt.model == "discrete") {
    // "v:p,v:p,..."
    std::vector<std::pair<double, double>> atoms;
    std::stringstream ss(opt.atoms);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw mccm::Error(mccm::ErrorCode::BadConfig, "--atoms wants v:p,v:p,...");
      atoms.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    if (atoms.empty()) throw mccm::Error(mccm::ErrorCode::BadConfig, "discrete needs --atoms");
    return mccm::WeightModel::discrete(std::move(atoms));
  }
  throw mccm::Error(mccm::ErrorCode::BadConfig, "unknown --model " + opt.model);
}

json effective_config(const Options& opt, const mccm::ModelSpec& spec) {
  json j;
  j["model"] = spec.weight.to_json();
  j["b"] = spec.b;
  j["depth"] = opt.depth;
  j["reps"] = opt.reps;
  j["seed"] = opt.seed;
  j["kmax"] = opt.kmax;
  j["format"] = opt.format;
  j["threads"] = opt.threads;
  return j;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int cmd_analyze(const Options& opt, const std::string& cmdline) {
  const mccm::ModelSpec spec{mccm::validate(build_model(opt)), opt.b};
  const auto report = mccm::dimension_report(spec, /*allow_degenerate=*/true);
  const json j = mccm::report_to_json(report);
  std::cout << j.dump(2) << '\n';
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    const auto t0 = std::chrono::steady_clock::now();
    std::ofstream os(fs::path(opt.out) / "report.json");
    os << j.dump(2) << '\n';
    os.close();
    mccm::RunManifest m;
    m.command = cmdline;
    m.master_seed = opt.seed;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.output_digests["report.json"] = mccm::fnv1a_digest_file(fs::path(opt.out) / "report.json");
    mccm::write_manifest(m, effective_config(opt, spec), fs::path(opt.out) / "manifest.json");
  }
  return 0;
}

int cmd_simulate(const Options& opt, const std::string& cmdline) {
  const mccm::ModelSpec spec{mccm::validate(build_model(opt)), opt.b};
  if (opt.out.empty())
    throw mccm::Error(mccm::ErrorCode::BadConfig, "simulate needs --out DIR");
  fs::create_directories(opt.out);
  const auto t0 = std::chrono::steady_clock::now();
  mccm::RunManifest m;
  m.command = cmdline;
  m.master_seed = opt.seed;
  for (int rep = 0; rep < opt.reps; ++rep) {
    const auto field =
        mccm::sample_field(spec, opt.depth, opt.seed ^ static_cast<std::uint64_t>(rep));
    char name[64];
    if (opt.dump_fields) {
      std::snprintf(name, sizeof name, "field_%04d.%s", rep, opt.format == "bin" ? "bin" : "csv");
      const fs::path p = fs::path(opt.out) / name;
      if (opt.format == "bin")
        mccm::write_field_bin(field, p);
      else
        mccm::write_field_csv(field, p);
      m.output_digests[name] = mccm::fnv1a_digest_file(p);
    }
    const auto sp = mccm::fourier_all(field, opt.kmax);
    const char* ext = opt.format == "bin" ? "bin" : (opt.format == "json" ? "json" : "csv");
    std::snprintf(name, sizeof name, "spectrum_%04d.%s", rep, ext);
    const fs::path p = fs::path(opt.out) / name;
    if (opt.format == "bin")
      mccm::write_spectrum_bin(sp, p);
    else if (opt.format == "json")
      mccm::write_spectrum_json(sp, p);
    else
      mccm::write_spectrum_csv(sp, p);
    m.output_digests[name] = mccm::fnv1a_digest_file(p);
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  mccm::write_manifest(m, effective_config(opt, spec), fs::path(opt.out) / "manifest.json");
  std::cout << "wrote " << m.output_digests.size() << " files + manifest to " << opt.out << '\n';
  return 0;
}

int cmd_estimate(const Options& opt, const std::string& cmdline) {
  if (opt.inputs.empty())
    throw mccm::Error(mccm::ErrorCode::BadConfig, "estimate needs spectrum files as arguments");
  std::vector<mccm::Spectrum> spectra;
  for (const auto& f : opt.inputs) {
    auto sp = mccm::read_spectrum(f);
    if (!spectra.empty()) {
      if (sp.kmax != spectra.front().kmax)
        throw mccm::Error(mccm::ErrorCode::BadConfig, "mixed kmax across spectra: " + f);
      if (sp.depth != 0 && spectra.front().depth != 0 && sp.depth != spectra.front().depth)
        throw mccm::Error(mccm::ErrorCode::BadConfig, "mixed depths across spectra: " + f);
    }
    spectra.push_back(std::move(sp));
  }
  const auto fit = mccm::decay_fit(spectra, opt.b);
  json j;
  j["estimate"] = fit.estimate;
  j["std_err"] = fit.std_err;
  j["n_points"] = fit.n_points;
  j["method"] = fit.method;
  std::cout << j.dump(2) << '\n';
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    std::ofstream os(fs::path(opt.out) / "decay_fit.json");
    os << j.dump(2) << '\n';
    os.close();
    mccm::RunManifest m;
    m.command = cmdline;
    m.master_seed = opt.seed;
    m.output_digests["decay_fit.json"] =
        mccm::fnv1a_digest_file(fs::path(opt.out) / "decay_fit.json");
    json cfg;
    cfg["inputs"] = opt.inputs;
    mccm::write_manifest(m, cfg, fs::path(opt.out) / "manifest.json");
  }
  return 0;
}

int cmd_sweep(const Options& opt, const std::string& cmdline) {
  if (opt.grid < 1) throw mccm::Error(mccm::ErrorCode::BadConfig, "empty sigma grid");
  if (opt.out.empty()) throw mccm::Error(mccm::ErrorCode::BadConfig, "sweep needs --out DIR");
  fs::create_directories(opt.out);
  const double logb = std::log(static_cast<double>(opt.b));
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<double> sig, dh, df, df_est, df_err;
  std::ostringstream csv;
  csv << "sigma,d_h,d_f_analytic,d_f_estimated,stderr\n";
  for (int i = 1; i <= opt.grid; ++i) {
    const double sigma = std::sqrt(2.0 * logb) * i / (opt.grid + 1);
    const mccm::ModelSpec spec{mccm::WeightModel::log_normal(sigma), opt.b};
    sig.push_back(sigma);
    dh.push_back(mccm::hausdorff_dimension(spec));
    df.push_back(mccm::fourier_dimension(spec));
    std::string est = "", err = "";
    if (opt.estimate_sweep) {
      std::vector<mccm::Spectrum> spectra;
      for (int rep = 0; rep < std::max(2, opt.reps); ++rep) {
        const auto field =
            mccm::sample_field(spec, opt.depth, opt.seed ^ static_cast<std::uint64_t>(100 * i + rep));
        spectra.push_back(mccm::fourier_all(field));
      }
      try {
        const auto fit = mccm::decay_fit(spectra, opt.b);
        df_est.push_back(fit.estimate);
        df_err.push_back(fit.std_err);
        est = mccm::format_double(fit.estimate);
        err = mccm::format_double(fit.std_err);
      } catch (const mccm::Error&) {
        // degenerate block maxima; leave the estimate blank
      }
    }
    csv << mccm::format_double(sigma) << ',' << mccm::format_double(dh.back()) << ','
        << mccm::format_double(df.back()) << ',' << est << ',' << err << '\n';
  }
  {
    std::ofstream os(fs::path(opt.out) / "sweep.csv");
    os << csv.str();
  }
  std::vector<mccm::SvgSeries> series;
  series.push_back({"dim_H", "#1f77b4", sig, dh});
  series.push_back({"dim_F", "#d62728", sig, df});
  if (opt.estimate_sweep && df_est.size() == sig.size())
    series.push_back({"dim_F (MC)", "#2ca02c", sig, df_est});
  mccm::write_svg_plot(fs::path(opt.out) / "sweep.svg", "cascade dimensions, b=" + std::to_string(opt.b),
                       "sigma", "dimension", series);

  mccm::RunManifest m;
  m.command = cmdline;
  m.master_seed = opt.seed;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.output_digests["sweep.csv"] = mccm::fnv1a_digest_file(fs::path(opt.out) / "sweep.csv");
  m.output_digests["sweep.svg"] = mccm::fnv1a_digest_file(fs::path(opt.out) / "sweep.svg");
  json cfg;
  cfg["b"] = opt.b;
  cfg["grid"] = opt.grid;
  cfg["seed"] = opt.seed;
  mccm::write_manifest(m, cfg, fs::path(opt.out) / "manifest.json");
  std::cout << "wrote sweep.csv, sweep.svg + manifest to " << opt.out << '\n';
  return 0;
}

int cmd_verify(const Options& opt, const std::string& cmdline) {
  mccm::VerifyOptions vopt;
  vopt.seed = opt.seed;
  vopt.out_dir = opt.out.empty() ? "verify_out" : opt.out;
  vopt.with_reproducibility = !opt.skip_repro;
  vopt.threads = opt.threads > 0 ? opt.threads : 4;
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = mccm::run_acceptance(vopt);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[pass] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name << " ("
              << r.detail << ") [" << mccm::format_double(r.seconds) << " s]\n";
    all = all && r.pass;
  }
  mccm::RunManifest m;
  m.command = cmdline;
  m.master_seed = opt.seed;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const char* f : {"stats.csv", "sweep.csv", "sample_field.bin", "sample_spectrum.bin",
                        "sample_spectrum.csv", "report.csv"})
    if (fs::exists(vopt.out_dir / f))
      m.output_digests[f] = mccm::fnv1a_digest_file(vopt.out_dir / f);
  json cfg;
  cfg["seed"] = opt.seed;
  cfg["threads"] = vopt.threads;
  mccm::write_manifest(m, cfg, vopt.out_dir / "manifest.json");
  std::cout << (all ? "all criteria passed\n" : "ACCEPTANCE FAILURE\n");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  // multi-megabyte field buffers churn mmap/munmap otherwise; keep them on the heap
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, -1);
  CLI::App app{"Mandelbrot canonical cascade measures: analysis, simulation, verification"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON config file (flags override it)");
    sub->add_option("--model", opt.model, "lognormal | twopoint | discrete");
    sub->add_option("--sigma", opt.sigma, "lognormal sigma");
    sub->add_option("--sigma2-over-logb", opt.sigma2_over_logb, "lognormal sigma^2 / log b");
    sub->add_option("--x", opt.x, "twopoint x in (0,1]");
    sub->add_option("--atoms", opt.atoms, "discrete atoms v:p,v:p,...");
    sub->add_option("--b", opt.b, "branching base >= 2");
    sub->add_option("--depth", opt.depth, "cascade depth n");
    sub->add_option("--reps", opt.reps, "replicates");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--kmax", opt.kmax, "max frequency (0: b^depth)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--threads", opt.threads, "thread count (0: library default)");
    sub->add_option("--format", opt.format, "csv | bin");
    return sub;
  };

  auto* analyze = add_common(app.add_subcommand("analyze", "closed-form dimension report"));
  auto* simulate = add_common(app.add_subcommand("simulate", "sample fields and spectra"));
  simulate->add_flag("--dump-fields", opt.dump_fields, "also write field dumps");
  auto* estimate = add_common(app.add_subcommand("estimate", "decay fit from dumped spectra"));
  estimate->add_option("files", opt.inputs, "spectrum dumps");
  auto* sweep = add_common(app.add_subcommand("sweep", "lognormal sigma sweep with SVG plot"));
  sweep->add_option("--grid", opt.grid, "number of sigma grid points");
  sweep->add_flag("--estimate", opt.estimate_sweep, "add MC decay estimates");
  auto* verify = add_common(app.add_subcommand("verify", "run the verification suite"));
  verify->add_flag("--skip-repro", opt.skip_repro, "skip the thread-reproducibility criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config_defaults(*sub, opt);
    if (opt.threads > 0) {
#ifdef _OPENMP
      omp_set_num_threads(opt.threads);
#endif
    }
    const std::string cmdline = join_args(argc, argv);
    if (sub == analyze) return cmd_analyze(opt, cmdline);
    if (sub == simulate) return cmd_simulate(opt, cmdline);
    if (sub == estimate) return cmd_estimate(opt, cmdline);
    if (sub == sweep) return cmd_sweep(opt, cmdline);
    if (sub == verify) return cmd_verify(opt, cmdline);
    return 1;
  } catch (const mccm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case mccm::ErrorCode::BadConfig:
      case mccm::ErrorCode::IOError:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
