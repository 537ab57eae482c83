// pdmskit command-line tool.
//
// Subcommands:
//   check-pd  positivity of Gram sections over one or more windows
//   root      principal root of a window section (report or kernel output)
//   analyze   top-eigenvalue growth, row summability, sparsity, existence
//   hankel    moment-matrix double positivity and rank saturation
//   wz        partial-isometry construction from a psd matrix and a subspace
//   corpus    list or emit the builtin kernels
//
// Exit codes: 0 = success / property holds, 1 = the checked property fails,
// 2 = input or usage error.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdmskit/corpus.hpp"
#include "pdmskit/errors.hpp"
#include "pdmskit/io.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/opfactory.hpp"
#include "pdmskit/pdms.hpp"
#include "pdmskit/rng.hpp"

namespace {

using namespace pdmskit;

// --tol default: the PDMSKIT_DEFAULT_TOL environment variable wins over the
// built-in fallback when set.
double default_tol(double fallback) {
  const char* env = std::getenv("PDMSKIT_DEFAULT_TOL");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0)) {
    throw InputError(
        "PDMSKIT_DEFAULT_TOL must be a positive number, got '" +
        std::string(env) + "'");
  }
  return v;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text_file(out_path, content);
  }
}

Kernel load_kernel(const std::string& path) {
  if (path.empty()) throw InputError("--kernel is required");
  return parse_kernel(read_json_file(path));
}

std::vector<Index> require_windows(const std::vector<Index>& windows) {
  if (windows.empty()) throw InputError("--window is required");
  for (Index w : windows) {
    if (w == 0) throw InputError("--window entries must be >= 1");
  }
  return windows;
}

// Dense Hermitian section of the kernel over its full extent; the operator
// input format of the wz subcommand.
HermitianMatrix load_operator(const std::string& path) {
  const Kernel K = load_kernel(path);
  if (!K.extent()) {
    throw InputError(
        "wz: the operator file must be a finite (dense) kernel");
  }
  return gram(K, Window(*K.extent()));
}

// ---------------------------------------------------------------------------
// check-pd
// ---------------------------------------------------------------------------

struct CheckPdOptions {
  std::string kernel_path;
  std::vector<Index> windows;
  double tol = -1.0;
  std::string out;
};

int run_check_pd(const CheckPdOptions& opt) {
  const double tol = opt.tol >= 0 ? opt.tol : default_tol(kEigTol);
  const Kernel K = load_kernel(opt.kernel_path);
  Json body;
  body["command"] = "check-pd";
  body["tol"] = tol;
  Json windows = Json::array();
  bool all_psd = true;
  for (Index N : require_windows(opt.windows)) {
    const PsdReport r = is_pd(K, Window(N), tol);
    Json w = psd_report_to_json(r);
    w["N"] = N;
    windows.push_back(std::move(w));
    all_psd = all_psd && r.psd;
  }
  body["windows"] = std::move(windows);
  body["all_psd"] = all_psd;
  emit(render_report("check-pd", body), opt.out);
  return all_psd ? 0 : 1;
}

// ---------------------------------------------------------------------------
// root
// ---------------------------------------------------------------------------

struct RootOptions {
  std::string kernel_path;
  std::vector<Index> windows;
  double tol = -1.0;
  std::string format = "report";
  std::string out;
};

int run_root(const RootOptions& opt) {
  const double tol = opt.tol >= 0 ? opt.tol : default_tol(kSqrtTol);
  const Kernel K = load_kernel(opt.kernel_path);
  const std::vector<Index> windows = require_windows(opt.windows);
  if (windows.size() != 1) {
    throw InputError("root: exactly one --window value expected");
  }
  const Window w(windows[0]);
  const RootReport report = root_finite(K, w, tol);
  if (opt.format == "kernel") {
    emit(json_to_string(kernel_to_json(report.root)), opt.out);
    return 0;
  }
  if (opt.format != "report") {
    throw InputError("root: --format must be 'report' or 'kernel'");
  }
  const RootVerification verification = verify_root(K, report.root, w, tol);
  Json body;
  body["command"] = "root";
  body["N"] = windows[0];
  body["tol"] = tol;
  body["gram"] = psd_report_to_json(report.gram_psd);
  body["lambda_min_root"] = report.lambda_min_root;
  body["residual"] = report.residual;
  body["self_adjoint"] = report.self_adjoint;
  Json verify;
  verify["ok"] = verification.ok;
  verify["discrepancy"] = verification.discrepancy;
  verify["max_eval_error"] = verification.max_eval_error;
  verify["max_tail"] = verification.max_tail;
  verify["certified_gap"] = verification.certified_gap;
  body["verification"] = std::move(verify);
  body["root"] = kernel_to_json(report.root);
  emit(render_report("root", body), opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string kernel_path;
  std::vector<Index> windows;
  double tol = -1.0;
  double cap = kDefaultCap;
  std::string format = "report";
  std::string out;
};

int run_analyze(const AnalyzeOptions& opt) {
  const double tol = opt.tol >= 0 ? opt.tol : default_tol(kEigTol);
  const Kernel K = load_kernel(opt.kernel_path);
  const std::vector<Index> windows = require_windows(opt.windows);

  if (opt.format == "csv") {
    const BoundednessCertificate cert = uniqueness_bound(K, windows, opt.cap);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < cert.windows.size(); ++i) {
      rows.push_back({static_cast<double>(cert.windows[i]), cert.bounds[i]});
    }
    emit(render_csv({"N", "lambda_max"}, rows), opt.out);
    return 0;
  }
  if (opt.format != "report") {
    throw InputError("analyze: --format must be 'report' or 'csv'");
  }

  const ExistenceReport existence =
      root_existence_diagnostic(K, windows, opt.cap);
  const BoundednessCertificate& cert = existence.certificate;
  const Window w(cert.windows.back());
  const auto components = sparsity_components(K, w);

  Json body;
  body["command"] = "analyze";
  body["tol"] = tol;
  body["cap"] = cert.cap;
  body["stall_tol"] = cert.stall_tol;
  body["windows"] = cert.windows;
  body["bounds"] = cert.bounds;
  body["verdict"] = cert.verdict;
  body["reason"] = cert.reason;

  Json rows_json;
  rows_json["certified"] = existence.rows.certified;
  rows_json["partial_sums"] = existence.rows.partial_sums;
  Json tails = Json::array();
  for (const auto& t : existence.rows.tails) {
    if (t) {
      tails.push_back(*t);
    } else {
      tails.push_back(nullptr);
    }
  }
  rows_json["tails"] = std::move(tails);
  body["rows"] = std::move(rows_json);

  Json existence_json;
  existence_json["verdict"] = existence.verdict;
  existence_json["basis"] = existence.basis;
  body["existence"] = std::move(existence_json);

  Json envelope = Json::array();
  for (const C0Bracket& b : existence.c0_envelope) {
    Json e;
    e["block_end"] = b.block_end;
    e["sup_abs"] = b.sup_abs;
    envelope.push_back(std::move(e));
  }
  body["c0_envelope"] = std::move(envelope);

  Json decay = Json::array();
  for (const ProbePoint& p : existence.probe_decay) {
    Json e;
    e["prefix"] = p.prefix;
    e["value"] = p.value;
    decay.push_back(std::move(e));
  }
  body["probe_decay"] = std::move(decay);
  body["components"] = components;

  emit(render_report("analyze", body), opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// hankel
// ---------------------------------------------------------------------------

struct HankelOptions {
  std::string measure_path;
  std::string moments_path;
  Index random_atoms = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  std::vector<Index> windows;
  double tol = -1.0;
  std::string out;
};

// Batch mode: random measures, one generator count per trial.
int run_hankel_batch(const HankelOptions& opt, const std::vector<Index>& windows) {
  if (windows.size() != 1) {
    throw InputError("hankel: batch mode expects exactly one --window value");
  }
  const MultiplicityExperimentReport report =
      hankel_multiplicity_experiment(opt.trials, windows[0], opt.seed);
  Json body;
  body["command"] = "hankel";
  body["mode"] = "batch";
  body["trials"] = report.trials;
  body["N"] = report.N;
  body["seed"] = report.seed;
  body["max_atoms"] = report.max_atoms;
  Json per_trial = Json::array();
  for (const HankelTrialResult& t : report.per_trial) {
    Json e;
    e["atoms"] = t.atom_count;
    e["rank"] = t.rank;
    e["generators"] = t.generator_count;
    per_trial.push_back(std::move(e));
  }
  body["per_trial"] = std::move(per_trial);
  body["max_generators"] = report.max_generators;
  const bool within_two = report.max_generators <= 2;
  body["within_two"] = within_two;
  emit(render_report("hankel", body), opt.out);
  return within_two ? 0 : 1;
}

int run_hankel(const HankelOptions& opt) {
  const double tol = opt.tol >= 0 ? opt.tol : default_tol(kEigTol);
  const std::vector<Index> windows = require_windows(opt.windows);
  const Index max_window = *std::max_element(windows.begin(), windows.end());

  const int sources = (!opt.measure_path.empty() ? 1 : 0) +
                      (!opt.moments_path.empty() ? 1 : 0) +
                      (opt.random_atoms > 0 ? 1 : 0) +
                      (opt.trials > 0 ? 1 : 0);
  if (sources != 1) {
    throw InputError(
        "hankel: exactly one of --measure, --moments, --random-atoms, "
        "--trials is required");
  }
  if (opt.trials > 0) return run_hankel_batch(opt, windows);

  std::optional<MeasureSpec> measure;
  std::vector<double> moments;
  if (!opt.moments_path.empty()) {
    moments = parse_moments(read_json_file(opt.moments_path));
  } else {
    if (!opt.measure_path.empty()) {
      measure = parse_measure(read_json_file(opt.measure_path));
    } else {
      Rng rng(opt.seed);
      measure = random_measure(rng, opt.random_atoms);
    }
    moments = moments_from_measure(*measure, 2 * max_window);
  }

  Json body;
  body["command"] = "hankel";
  body["mode"] = "single";
  body["tol"] = tol;
  if (measure) body["measure"] = measure_to_json(*measure);
  body["moments"] = moments;

  Json window_reports = Json::array();
  bool all_pass = true;
  for (Index N : windows) {
    const HankelReport r = hankel_double_positivity(moments, N, tol);
    Json w;
    w["N"] = N;
    w["base"] = psd_report_to_json(r.base);
    w["shifted"] = psd_report_to_json(r.shifted);
    w["doubly_positive"] = r.doubly_positive;
    window_reports.push_back(std::move(w));
    all_pass = all_pass && r.doubly_positive;
  }
  body["windows"] = std::move(window_reports);
  body["all_doubly_positive"] = all_pass;

  const HankelGeneratorReport gen = hankel_generator_count(moments, max_window);
  Json gen_json;
  gen_json["N"] = max_window;
  gen_json["rank"] = gen.rank;
  gen_json["generators"] = gen.generators.count;
  body["range_restriction"] = std::move(gen_json);

  if (measure) {
    const HankelRankReport m = hankel_rank_saturation(*measure, windows);
    Json mj;
    mj["ranks"] = m.ranks;
    mj["saturation_rank"] = m.saturation_rank;
    mj["saturated"] = m.saturated;
    mj["atom_count"] = m.atom_count;
    body["rank_saturation"] = std::move(mj);
  }

  emit(render_report("hankel", body), opt.out);
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// wz
// ---------------------------------------------------------------------------

struct WzOptions {
  std::string kernel_path;
  std::string subspace_path;
  double tol = -1.0;
  std::string out;
};

int run_wz(const WzOptions& opt) {
  const double tol = opt.tol >= 0 ? opt.tol : default_tol(kSqrtTol);
  const HermitianMatrix A = load_operator(opt.kernel_path);
  SubspaceBasis Z = SubspaceBasis::zero(A.n());
  if (!opt.subspace_path.empty()) {
    Z = parse_subspace(read_json_file(opt.subspace_path));
    if (Z.ambient_dim != A.n()) {
      throw InputError("wz: subspace ambient dimension " +
                       std::to_string(Z.ambient_dim) +
                       " does not match the operator size " +
                       std::to_string(A.n()));
    }
  }
  WZOptions wz_opts;
  wz_opts.tol = tol;
  const IsometryReport report = build_WZ(A, Z, wz_opts);
  const bool pass = report.max_residual <= tol;

  Json body;
  body["command"] = "wz";
  body["tol"] = tol;
  Json dims;
  dims["ambient"] = A.n();
  dims["rank_A"] = report.rank_A;
  dims["dim_Z"] = report.dim_Z;
  dims["dim_generated"] = report.dim_generated;
  dims["dim_fixed"] = report.dim_fixed;
  body["dims"] = std::move(dims);
  body["transversality_angle"] = report.transversality_angle;
  Json residuals;
  residuals["av_psd"] = report.av_psd;
  residuals["d_squared_identity"] = report.d_squared_identity;
  residuals["range_identity"] = report.range_identity;
  residuals["partial_isometry_defect"] = report.partial_isometry_defect;
  residuals["complement_fixed"] = report.complement_fixed;
  residuals["solve_residual"] = report.solve_residual;
  residuals["max"] = report.max_residual;
  body["residuals"] = std::move(residuals);
  body["V"] = matrix_to_json(report.V);
  body["D"] = matrix_to_json(report.D.mat());
  body["pass"] = pass;

  emit(render_report("wz", body), opt.out);
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

struct CorpusOptions {
  std::string name;
  double alpha = 1.0;
  Index family_n = 4;
  Index truncation = kHarmonicDefaultTruncation;
  std::string generator_path;
  std::string out;
};

int run_corpus(const CorpusOptions& opt) {
  if (opt.name.empty()) {
    Json body;
    body["command"] = "corpus";
    Json names = Json::array();
    names.push_back("delta");
    names.push_back("diag_n2");
    names.push_back("outer_power");
    names.push_back("uniform_family");
    names.push_back("shift");
    names.push_back("harmonic");
    names.push_back("outer");
    body["builtins"] = std::move(names);
    emit(render_report("corpus", body), opt.out);
    return 0;
  }
  Kernel K = delta_kernel();
  if (opt.name == "delta") {
    K = delta_kernel();
  } else if (opt.name == "diag_n2") {
    K = diag_n2_kernel();
  } else if (opt.name == "outer_power") {
    K = outer_power_kernel(opt.alpha);
  } else if (opt.name == "uniform_family") {
    K = uniform_family_kernel(opt.family_n);
  } else if (opt.name == "harmonic") {
    K = harmonic_kernel(opt.truncation);
  } else if (opt.name == "shift" || opt.name == "outer") {
    if (opt.generator_path.empty()) {
      throw InputError("corpus: --generator is required for '" + opt.name +
                       "'");
    }
    const std::vector<Complex> f = json_to_complex_vector(
        read_json_file(opt.generator_path), "generator");
    K = opt.name == "shift" ? shift_kernel(f) : outer(f);
  } else {
    throw InputError("corpus: unknown builtin '" + opt.name + "'");
  }
  emit(json_to_string(kernel_to_json(K)), opt.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdms kit: kernel positivity, roots, and isometry factory"};
  app.require_subcommand(1);

  CheckPdOptions check_opts;
  CLI::App* check = app.add_subcommand(
      "check-pd", "Check positivity of Gram sections on windows");
  check->add_option("--kernel", check_opts.kernel_path, "kernel file (JSON)");
  check->add_option("--window", check_opts.windows, "window sizes")
      ->delimiter(',');
  check->add_option("--tol", check_opts.tol, "psd tolerance");
  check->add_option("--out", check_opts.out, "output path (default stdout)");

  RootOptions root_opts;
  CLI::App* root_cmd = app.add_subcommand(
      "root", "Principal square root of a window section");
  root_cmd->add_option("--kernel", root_opts.kernel_path, "kernel file");
  root_cmd->add_option("--window", root_opts.windows, "window size")
      ->delimiter(',');
  root_cmd->add_option("--tol", root_opts.tol, "psd/root tolerance");
  root_cmd->add_option("--format", root_opts.format, "report | kernel");
  root_cmd->add_option("--out", root_opts.out, "output path");

  AnalyzeOptions analyze_opts;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Growth, summability, and existence diagnostics");
  analyze->add_option("--kernel", analyze_opts.kernel_path, "kernel file");
  analyze->add_option("--window", analyze_opts.windows, "window ladder")
      ->delimiter(',');
  analyze->add_option("--tol", analyze_opts.tol, "tolerance");
  analyze->add_option("--cap", analyze_opts.cap, "eigenvalue cap");
  analyze->add_option("--format", analyze_opts.format, "report | csv");
  analyze->add_option("--out", analyze_opts.out, "output path");

  HankelOptions hankel_opts;
  CLI::App* hankel = app.add_subcommand(
      "hankel", "Moment-matrix double positivity and rank saturation");
  hankel->add_option("--measure", hankel_opts.measure_path, "measure file");
  hankel->add_option("--moments", hankel_opts.moments_path, "moments file");
  hankel->add_option("--random-atoms", hankel_opts.random_atoms,
                     "draw a random measure with this many atoms");
  hankel->add_option("--trials", hankel_opts.trials,
                     "batch mode: number of random-measure trials");
  hankel->add_option("--seed", hankel_opts.seed, "random seed");
  hankel->add_option("--window", hankel_opts.windows, "Hankel sizes")
      ->delimiter(',');
  hankel->add_option("--tol", hankel_opts.tol, "psd tolerance");
  hankel->add_option("--out", hankel_opts.out, "output path");

  WzOptions wz_opts;
  CLI::App* wz = app.add_subcommand(
      "wz", "Partial isometry from a psd operator and a subspace");
  wz->add_option("--kernel", wz_opts.kernel_path,
                 "dense kernel file holding the psd operator");
  wz->add_option("--subspace", wz_opts.subspace_path,
                 "subspace file (defaults to the zero subspace)");
  wz->add_option("--tol", wz_opts.tol, "residual tolerance");
  wz->add_option("--out", wz_opts.out, "output path");

  CorpusOptions corpus_opts;
  CLI::App* corpus = app.add_subcommand(
      "corpus", "List builtin kernels or emit one as a kernel file");
  corpus->add_option("--name", corpus_opts.name, "builtin name");
  corpus->add_option("--alpha", corpus_opts.alpha, "outer_power exponent");
  corpus->add_option("--family-n", corpus_opts.family_n, "uniform_family n");
  corpus->add_option("--truncation", corpus_opts.truncation,
                     "harmonic generator truncation");
  corpus->add_option("--generator", corpus_opts.generator_path,
                     "generator sequence file (shift / outer)");
  corpus->add_option("--out", corpus_opts.out, "output path");

  int rc = 0;
  check->callback([&] { rc = run_check_pd(check_opts); });
  root_cmd->callback([&] { rc = run_root(root_opts); });
  analyze->callback([&] { rc = run_analyze(analyze_opts); });
  hankel->callback([&] { rc = run_hankel(hankel_opts); });
  wz->callback([&] { rc = run_wz(wz_opts); });
  corpus->callback([&] { rc = run_corpus(corpus_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotPsdError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TailBoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const RangeViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
