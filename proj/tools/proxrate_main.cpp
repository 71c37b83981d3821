#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxrate/acceptance.hpp"
#include "proxrate/analysis.hpp"
#include "proxrate/instances.hpp"
#include "proxrate/pgm.hpp"
#include "proxrate/prox.hpp"
#include "proxrate/solvers.hpp"
#include "proxrate/trace.hpp"

namespace {

using namespace proxrate;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitViolation = 4;
constexpr int kExitNoClaim = 5;  // ran outside the certified step-size range

int thread_cap_from_env() {
  const char* env = std::getenv("PROXRATE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return 0;
  }
}

struct GenArgs {
  std::string kind = "lasso";
  std::string instance_out;
  std::string image_in;
  int m = 50, d = 100, sparsity = 5;
  double noise_sigma = 0.01;
  double lambda = 0.1;
  std::uint64_t seed = 0;
  int height = 64, width = 64;
  std::uint64_t image_seed = 11;
  double kernel_sigma = 2.0;
  double deblur_noise_sigma = 1e-3;
  double deblur_lambda = 1e-6;
  double reference_eps = 0.0;  // > 0: embed an oracle solution
};

int cmd_gen(const GenArgs& a) {
  Instance inst;
  if (a.kind == "lasso") {
    LassoInstance lasso =
        gen_random_lasso(a.m, a.d, a.sparsity, a.noise_sigma, a.lambda, a.seed);
    if (a.reference_eps > 0.0) {
      const CompositeProblem p = make_problem(lasso);
      lasso.reference = solve_reference(p, a.reference_eps);
    }
    std::cout << "lasso instance: m=" << a.m << " d=" << a.d
              << " sparsity=" << a.sparsity << " seed=" << a.seed
              << " L=" << format_double(lasso.L);
    if (lasso.reference)
      std::cout << " phi*=" << format_double(lasso.reference->phi_star)
                << " |G(x*)|=" << format_double(lasso.reference->certified_eps);
    std::cout << '\n';
    inst = std::move(lasso);
  } else {
    Image clean;
    if (!a.image_in.empty())
      clean = load_pgm(a.image_in);
    else
      clean = make_synthetic_image(a.height, a.width, a.image_seed);
    DeblurInstance deblur = gen_deblur(clean, a.kernel_sigma,
                                       a.deblur_noise_sigma, a.deblur_lambda,
                                       a.seed);
    if (a.reference_eps > 0.0) {
      const CompositeProblem p = make_problem(deblur);
      deblur.reference = solve_reference(p, a.reference_eps);
    }
    std::cout << "deblur instance: " << deblur.height << "x" << deblur.width
              << " kernel_sigma=" << format_double(a.kernel_sigma)
              << " seed=" << a.seed << " L=" << format_double(deblur.L)
              << '\n';
    inst = std::move(deblur);
  }
  save_instance(inst, a.instance_out);
  std::cout << "wrote " << a.instance_out << '\n';
  return kExitOk;
}

struct RunArgs {
  std::string instance_in;
  std::string image_in;
  std::string trace_out;
  // Inline Lasso generator (used when no instance/image source is given).
  int m = 50, d = 100, sparsity = 5;
  double noise_sigma = 0.01;
  double lambda = 0.1;
  std::uint64_t seed = 0;
  double kernel_sigma = 2.0;
  double deblur_noise_sigma = 1e-3;
  double deblur_lambda = 1e-6;
  // Solver configuration.
  std::string variant = "ista";
  double step_size = 0.0;           // explicit s; 0 means "use step fraction"
  double step_frac = 1.0;           // s = step_frac / L
  double momentum_r = 2.0;
  long iters = 1000;
  double eps = 0.0;
  double estimate_c = 1.0;
  std::string x0_mode = "auto";  // auto | zero | observed | reference
  bool no_key_ineq = false;
  bool no_lyapunov = false;
  bool no_bounds = false;
  bool force_certificates = false;
  double reference_eps = 1e-10;
};

Variant parse_variant(const std::string& name) {
  static const std::map<std::string, Variant> table = {
      {"ista", Variant::ista},
      {"fista", Variant::fista_canonical},
      {"fista_canonical", Variant::fista_canonical},
      {"fista_gradient_correction", Variant::fista_gradient_correction},
      {"fista_gc", Variant::fista_gradient_correction},
      {"fista_implicit_velocity", Variant::fista_implicit_velocity},
      {"fista_iv", Variant::fista_implicit_velocity},
  };
  const auto it = table.find(name);
  if (it == table.end())
    throw ParameterError("unknown variant '" + name + "'");
  return it->second;
}

int cmd_run(const RunArgs& a, bool generator_args_given) {
  // Exactly one instance source.
  int sources = 0;
  if (!a.instance_in.empty()) ++sources;
  if (!a.image_in.empty()) ++sources;
  if (generator_args_given) ++sources;
  if (sources > 1)
    throw ParameterError(
        "choose one instance source: --instance-in, --image-in, or generator "
        "flags");

  Instance inst;
  if (!a.instance_in.empty()) {
    inst = load_instance(a.instance_in);
  } else if (!a.image_in.empty()) {
    inst = gen_deblur(load_pgm(a.image_in), a.kernel_sigma,
                      a.deblur_noise_sigma, a.deblur_lambda, a.seed);
  } else {
    inst = gen_random_lasso(a.m, a.d, a.sparsity, a.noise_sigma, a.lambda,
                            a.seed);
  }

  const bool is_lasso = std::holds_alternative<LassoInstance>(inst);
  const CompositeProblem problem =
      is_lasso ? make_problem(std::get<LassoInstance>(inst))
               : make_problem(std::get<DeblurInstance>(inst));
  const double L = problem.smooth->lipschitz();

  SolverConfig cfg;
  cfg.variant = parse_variant(a.variant);
  cfg.s = a.step_size > 0.0 ? a.step_size : a.step_frac / L;
  cfg.r = a.momentum_r;
  cfg.max_iters = a.iters;
  cfg.stop_eps = a.eps;
  cfg.validate();
  const bool outside_hypothesis = cfg.s > 1.0 / L;
  if (outside_hypothesis)
    std::cerr << "note: step size " << format_double(cfg.s)
              << " exceeds 1/L = " << format_double(1.0 / L)
              << "; certificates carry no claim on this run\n";

  // Reference minimizer: stored with the instance, or computed on demand for
  // Lasso when a certificate needs it. Deblur runs without a stored
  // reference leave the gap/Lyapunov/bound columns NA.
  std::optional<Reference> ref;
  if (is_lasso)
    ref = std::get<LassoInstance>(inst).reference;
  else
    ref = std::get<DeblurInstance>(inst).reference;
  const bool want_ref = !a.no_lyapunov || !a.no_bounds ||
                        a.x0_mode == "reference";
  if (!ref && want_ref && is_lasso)
    ref = solve_reference(problem, a.reference_eps);

  Vec x0;
  if (a.x0_mode == "zero" || (a.x0_mode == "auto" && is_lasso)) {
    x0 = Vec::Zero(problem.dimension);
  } else if (a.x0_mode == "observed" || (a.x0_mode == "auto" && !is_lasso)) {
    if (is_lasso)
      throw ParameterError("--x0 observed requires a deblur instance");
    x0 = std::get<DeblurInstance>(inst).observed;
  } else if (a.x0_mode == "reference") {
    if (!ref)
      throw ParameterError(
          "--x0 reference needs a stored or computable reference minimizer");
    x0 = ref->x_star;
  } else {
    throw ParameterError("unknown --x0 mode '" + a.x0_mode + "'");
  }

  if (a.eps > 0.0)
    std::cerr << "estimated iterations to reach eps=" << format_double(a.eps)
              << " (C=" << format_double(a.estimate_c)
              << "): " << estimate_iterations(a.eps, a.estimate_c) << '\n';

  std::ofstream file_out;
  if (!a.trace_out.empty()) {
    file_out.open(a.trace_out);
    if (!file_out) throw IoError("cannot open for writing: " + a.trace_out);
  }
  std::ostream& out = a.trace_out.empty() ? std::cout : file_out;
  TraceWriter writer(out);

  const double init_dist_sq = ref ? (x0 - ref->x_star).squaredNorm() : 0.0;
  const bool check_lyap = !a.no_lyapunov && ref.has_value();
  const bool check_bounds = !a.no_bounds && ref.has_value();
  const bool check_key = !a.no_key_ineq;
  const bool enforce = !outside_hypothesis || a.force_certificates;
  const bool is_fista = cfg.variant != Variant::ista;

  long violations = 0;
  bool ref_quality_warned = false;
  double min_gs2 = std::numeric_limits<double>::infinity();
  double e_prev = 0.0;
  double gs2_prev = 0.0;
  const double ulp_gap = ref ? std::ldexp(1.0 + std::abs(ref->phi_star), -52)
                             : 0.0;

  const RecordSink sink = [&](const IterateRecord& rec) {
    TraceRow row;
    row.k = rec.k;
    row.phi = objective(problem, rec.x);
    row.gs_norm_sq = rec.gs_norm_sq;
    min_gs2 = std::min(min_gs2, rec.gs_norm_sq);
    row.min_gs_norm_sq = min_gs2;

    double gap = 0.0;
    if (ref) {
      const ClampedGap cg = clamp_phi_gap(row.phi - ref->phi_star,
                                          ref->phi_star);
      gap = cg.gap;
      row.phi_gap = cg.gap;
      if (cg.reference_failure && !ref_quality_warned) {
        ref_quality_warned = true;
        std::cerr << "warning: objective fell below the stored reference "
                     "value at k="
                  << rec.k << "; reference quality is suspect\n";
      }
    }

    double e = 0.0;
    if (ref) {
      switch (cfg.variant) {
        case Variant::ista:
          e = lyapunov_ista(rec.k, rec.x, ref->x_star, gap, cfg.s);
          break;
        case Variant::fista_canonical:
          e = lyapunov_fista(rec.k, rec.x, rec.y, ref->x_star, gap, cfg.s,
                             cfg.r);
          break;
        default:
          e = lyapunov_fista_phase(cfg.variant,
                                   phase_state_from_record(cfg.variant, rec),
                                   ref->x_star, gap, cfg.s, cfg.r);
      }
      row.lyapunov = e;
    }

    if (check_bounds && rec.k >= 1) {
      if (is_fista) {
        row.obj_bound =
            fista_objective_bound(rec.k, cfg.s, cfg.r, init_dist_sq);
        if (cfg.s * L < 1.0)
          row.gradmin_bound =
              fista_gradmin_bound(rec.k, cfg.s, cfg.r, L, init_dist_sq);
      } else {
        row.obj_bound = ista_objective_bound(rec.k, cfg.s, init_dist_sq);
        row.gradmin_bound = ista_gradmin_bound(rec.k, cfg.s, init_dist_sq);
      }
      const double slack =
          2.0 * ref->certified_eps * (1.0 + std::sqrt(init_dist_sq));
      if (row.obj_bound && gap > *row.obj_bound * (1.0 + 1e-8) + slack)
        ++violations;
      if (row.gradmin_bound &&
          min_gs2 > *row.gradmin_bound * (1.0 + 1e-8) + slack)
        ++violations;
    } else if (check_bounds && rec.k == 0 && is_fista) {
      row.obj_bound = fista_objective_bound(0, cfg.s, cfg.r, init_dist_sq);
      if (cfg.s * L < 1.0)
        row.gradmin_bound =
            fista_gradmin_bound(0, cfg.s, cfg.r, L, init_dist_sq);
    }

    if (check_lyap && rec.k >= 1) {
      const double kd = static_cast<double>(rec.k - 1);
      double bound, noise_slack;
      if (is_fista) {
        bound = fista_decrement_bound(rec.k - 1, cfg.s, cfg.r, L, gs2_prev,
                                      gap);
        noise_slack = cfg.s * kd * (kd + cfg.r) * ulp_gap;
      } else {
        bound =
            ista_decrement_bound_certified(rec.k - 1, cfg.s, L, gs2_prev);
        noise_slack = cfg.s * kd * ulp_gap;
      }
      if (decrement_violates(e_prev, e, bound, 1e-10, noise_slack))
        ++violations;
    }

    if (check_key) {
      const KeyInequalityReport rep =
          check_key_inequality(problem, cfg.s, rec.y, rec.y, 1e-10);
      row.key_ineq_residual = rep.residual;
      if (!rep.holds) ++violations;
    }

    e_prev = e;
    gs2_prev = rec.gs_norm_sq;
    writer.write(row);
  };

  const RunSummary summary = run_solver(problem, cfg, x0, sink);

  std::cerr << "rows=" << summary.rows;
  if (summary.stop_index)
    std::cerr << " stopped_at_k=" << *summary.stop_index;
  if (summary.diverged) std::cerr << " diverged=1";
  if (violations > 0) std::cerr << " certificate_violations=" << violations;
  std::cerr << '\n';

  if (summary.diverged) return kExitDivergence;
  if (outside_hypothesis)
    return (a.force_certificates && violations > 0) ? kExitViolation
                                                    : kExitNoClaim;
  return (enforce && violations > 0) ? kExitViolation : kExitOk;
}

struct RatesArgs {
  std::vector<std::string> traces;
  long k_min = 1000;
  long k_max = 10000;
};

int cmd_rates(const RatesArgs& a) {
  for (const std::string& path : a.traces) {
    const TraceData data = load_trace(path);
    std::vector<long> ks;
    std::vector<double> gap, min_gs2, min_gap;
    ks.reserve(data.rows.size());
    double run_min_gap = std::numeric_limits<double>::infinity();
    bool have_gap = true;
    for (const TraceRow& row : data.rows) {
      ks.push_back(row.k);
      min_gs2.push_back(row.min_gs_norm_sq);
      if (row.phi_gap) {
        gap.push_back(*row.phi_gap);
        run_min_gap = std::min(run_min_gap, *row.phi_gap);
        min_gap.push_back(run_min_gap);
      } else {
        have_gap = false;
      }
    }
    if (ks.size() < 10)
      throw ParameterError(path + ": fewer than 10 rows; rates undefined");

    const auto slope_str = [&](const std::vector<double>& vals) {
      if (vals.size() != ks.size()) return std::string("NA (column absent)");
      try {
        return format_double(loglog_slope(ks, vals, a.k_min, a.k_max));
      } catch (const ParameterError& e) {
        return "undefined (" + std::string(e.what()) + ")";
      }
    };

    // Weighted-tail ratios compare w(k)*running-min at k_max vs k_min.
    const auto tail_ratio = [&](const std::vector<double>& vals,
                                const std::function<double(double)>& w) {
      if (vals.size() != ks.size()) return std::string("NA (column absent)");
      long i_min = -1, i_max = -1;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == a.k_min) i_min = static_cast<long>(i);
        if (ks[i] == a.k_max) i_max = static_cast<long>(i);
      }
      if (i_min < 0 || i_max < 0)
        throw ParameterError(path + ": no rows at k=" +
                             std::to_string(a.k_min) + " and k=" +
                             std::to_string(a.k_max) +
                             "; tail ratio undefined");
      const double lo = w(static_cast<double>(a.k_min)) * vals[i_min];
      const double hi = w(static_cast<double>(a.k_max)) * vals[i_max];
      if (lo == 0.0) return std::string("undefined (zero at k_min)");
      return format_double(hi / lo);
    };

    std::cout << path << ":\n";
    std::cout << "  slope(phi_gap)        = "
              << (have_gap ? slope_str(gap) : "NA (column absent)") << '\n';
    std::cout << "  slope(min_gs_norm_sq) = " << slope_str(min_gs2) << '\n';
    std::cout << "  tail k(k+1)*min|G|^2  = "
              << tail_ratio(min_gs2,
                            [](double k) { return k * (k + 1.0); })
              << '\n';
    std::cout << "  tail k^3*min|G|^2     = "
              << tail_ratio(min_gs2, [](double k) { return k * k * k; })
              << '\n';
    std::cout << "  tail k^2*min_gap      = "
              << (have_gap
                      ? tail_ratio(min_gap, [](double k) { return k * k; })
                      : "NA (column absent)")
              << '\n';
  }
  return kExitOk;
}

int cmd_verify(int threads) {
  if (threads <= 0) threads = thread_cap_from_env();
  const std::vector<CriterionResult> results =
      run_acceptance(std::cout, threads);
  std::vector<int> failed;
  for (const CriterionResult& r : results)
    if (!r.pass) failed.push_back(r.id);
  if (failed.empty()) {
    std::cout << "all " << results.size() << " criteria passed\n";
    return kExitOk;
  }
  std::cout << failed.size() << " criteria failed:";
  for (int id : failed) std::cout << ' ' << id;
  std::cout << '\n';
  return kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "proxrate: proximal-gradient (ISTA/FISTA) experiment harness with "
      "runtime certificates"};
  app.set_config("--config", "",
                 "read options from a `key = value` file (flags win)");

  GenArgs gen;
  CLI::App* cgen = app.add_subcommand(
      "gen", "generate a problem instance and write it to a container file");
  cgen->add_option("--kind", gen.kind, "instance kind")
      ->check(CLI::IsMember({"lasso", "deblur"}));
  cgen->add_option("--instance-out", gen.instance_out, "output path")
      ->required();
  cgen->add_option("--m", gen.m, "rows of the design matrix");
  cgen->add_option("--d", gen.d, "columns of the design matrix");
  cgen->add_option("--sparsity", gen.sparsity, "planted nonzeros");
  cgen->add_option("--noise-sigma", gen.noise_sigma, "observation noise");
  cgen->add_option("--lambda", gen.lambda, "l1 regularization weight");
  cgen->add_option("--seed", gen.seed, "generator seed");
  cgen->add_option("--height", gen.height, "synthetic image height");
  cgen->add_option("--width", gen.width, "synthetic image width");
  cgen->add_option("--image-seed", gen.image_seed, "synthetic image seed");
  cgen->add_option("--image-in", gen.image_in,
                   "clean image (PGM) for a deblur instance");
  cgen->add_option("--kernel-sigma", gen.kernel_sigma, "blur kernel sigma");
  cgen->add_option("--deblur-noise-sigma", gen.deblur_noise_sigma,
                   "deblur observation noise");
  cgen->add_option("--deblur-lambda", gen.deblur_lambda,
                   "deblur l1 regularization weight");
  cgen->add_option("--reference-eps", gen.reference_eps,
                   "embed an oracle minimizer solved to this |G_s| target");

  RunArgs run;
  CLI::App* crun = app.add_subcommand(
      "run", "run a solver and stream a per-iteration CSV trace");
  crun->add_option("--instance-in", run.instance_in, "instance container");
  crun->add_option("--image-in", run.image_in,
                   "clean image (PGM); builds a deblur instance");
  crun->add_option("--trace-out", run.trace_out,
                   "CSV destination (stdout when omitted)");
  auto* om = crun->add_option("--m", run.m, "generator: rows");
  auto* od = crun->add_option("--d", run.d, "generator: columns");
  auto* osp = crun->add_option("--sparsity", run.sparsity,
                               "generator: planted nonzeros");
  auto* ons = crun->add_option("--noise-sigma", run.noise_sigma,
                               "generator: observation noise");
  auto* ol = crun->add_option("--lambda", run.lambda,
                              "generator: l1 weight");
  auto* os = crun->add_option("--seed", run.seed, "generator seed");
  crun->add_option("--kernel-sigma", run.kernel_sigma,
                   "deblur kernel sigma (--image-in only)");
  crun->add_option("--deblur-noise-sigma", run.deblur_noise_sigma,
                   "deblur noise (--image-in only)");
  crun->add_option("--deblur-lambda", run.deblur_lambda,
                   "deblur l1 weight (--image-in only)");
  crun->add_option("--variant", run.variant,
                   "ista | fista_canonical | fista_gradient_correction | "
                   "fista_implicit_velocity");
  auto* oss = crun->add_option("--step-size", run.step_size,
                               "explicit step size s");
  auto* osf = crun->add_option("--step-frac-of-inv-l", run.step_frac,
                               "s as a fraction of 1/L (default 1)");
  osf->excludes(oss);
  crun->add_option("--momentum-r", run.momentum_r,
                   "momentum parameter (FISTA variants, >= 2)");
  crun->add_option("--iters", run.iters, "iteration budget");
  crun->add_option("--eps", run.eps,
                   "early-stop threshold on |G_s| (0 disables)");
  crun->add_option("--estimate-c", run.estimate_c,
                   "calibration constant for the iteration estimate");
  crun->add_option("--x0", run.x0_mode, "auto | zero | observed | reference");
  crun->add_flag("--no-key-ineq", run.no_key_ineq,
                 "skip the per-step descent-inequality certificate");
  crun->add_flag("--no-lyapunov", run.no_lyapunov,
                 "skip the Lyapunov decrement certificate");
  crun->add_flag("--no-bounds", run.no_bounds, "skip the rate-bound checks");
  crun->add_flag("--force-certificates", run.force_certificates,
                 "enforce certificates even outside the certified step range");
  crun->add_option("--reference-eps", run.reference_eps,
                   "|G_s| target when a reference must be computed");

  RatesArgs rates;
  CLI::App* crates = app.add_subcommand(
      "rates", "fit empirical decay rates from trace files");
  crates->add_option("traces", rates.traces, "CSV trace paths")
      ->required()
      ->expected(-1);
  crates->add_option("--k-min", rates.k_min, "window lower end");
  crates->add_option("--k-max", rates.k_max, "window upper end");

  int verify_threads = 0;
  CLI::App* cverify = app.add_subcommand(
      "verify", "run the acceptance suite and print a pass/fail table");
  cverify->add_option("--threads", verify_threads,
                      "worker cap (default: PROXRATE_THREADS or hardware)");

  if (argc <= 1) {
    std::cout << app.help();
    return kExitOk;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cgen->parsed()) return cmd_gen(gen);
    if (crun->parsed()) {
      const bool generator_args_given = om->count() || od->count() ||
                                        osp->count() || ons->count() ||
                                        ol->count() || os->count();
      return cmd_run(run, generator_args_given);
    }
    if (crates->parsed()) return cmd_rates(rates);
    if (cverify->parsed()) return cmd_verify(verify_threads);
    std::cout << app.help();
    return kExitOk;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
