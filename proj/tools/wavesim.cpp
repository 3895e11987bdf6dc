// Command line front end: plan, simulate, verify, constants.
//
// Exit codes: 0 success, 2 config or admissibility rejection, 3 provenance
// mismatch (plan file does not belong to the config), 4 verification failure,
// 1 internal error (quadrature non-convergence, I/O).

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wavesim/coeffs.hpp"
#include "wavesim/planner.hpp"
#include "wavesim/sampler.hpp"
#include "wavesim/serialize.hpp"
#include "wavesim/spectra.hpp"
#include "wavesim/verify.hpp"
#include "wavesim/wavelets.hpp"

namespace {

using namespace wavesim;

constexpr int kExitConfig = 2;
constexpr int kExitProvenance = 3;
constexpr int kExitVerification = 4;

struct VerificationFailure : Error {
    using Error::Error;
};

WaveletTransforms build_wavelet(const WaveletSpec& spec) {
    if (spec.family == WaveletSpec::Family::Meyer) return build_meyer();
    return build_daubechies(spec.order, spec.product_depth);
}

SpectralModel build_model(const std::string& family,
                          const std::map<std::string, double>& params) {
    return make_density(family, params);
}

void require_admissible(const SpectralModel& model,
                        const WaveletTransforms& wt, const char* label) {
    const AdmissibilityReport report = check_admissibility(model, wt);
    if (report.all_finite) return;
    std::string failing;
    for (const auto& cond : report.conditions) {
        if (!cond.finite) {
            if (!failing.empty()) failing += ", ";
            failing += cond.name;
        }
    }
    throw DomainError(std::string(label) +
                      " fails admissibility condition: " + failing);
}

PlanFile make_plan_file(const RunConfig& cfg) {
    PlanFile pf;
    pf.config_hash = config_hash(cfg);
    const SpectralModel model1 =
        build_model(cfg.density_family, cfg.density_params);
    const WaveletTransforms wt1 = build_wavelet(cfg.wavelet);
    if (cfg.process == RunConfig::Process::Product) {
        pf.is_product = true;
        const SpectralModel model2 =
            build_model(cfg.density2_family, cfg.density2_params);
        const WaveletTransforms wt2 = build_wavelet(cfg.wavelet2);
        pf.product = plan_product(cfg.accuracy(), model1, wt1, model2, wt2);
        pf.constants1 = plan_constants(model1, wt1);
        pf.constants2 = plan_constants(model2, wt2);
        pf.R0_1 = pf.constants1.R0;
        pf.R0_2 = pf.constants2.R0;
    } else {
        pf.plan = plan_power(cfg.accuracy(), cfg.s, model1, wt1);
        pf.constants = plan_constants(model1, wt1);
        pf.R0 = pf.constants.R0;
    }
    return pf;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
    const std::size_t dot = path.rfind('.');
    const std::size_t slash = path.find_last_of("/\\");
    if (dot == std::string::npos ||
        (slash != std::string::npos && dot < slash)) {
        return path + tag;
    }
    return path.substr(0, dot) + tag + path.substr(dot);
}

int cmd_plan(const std::string& config_path, const std::string& out_path) {
    const RunConfig cfg = load_config(config_path);
    const PlanFile pf = make_plan_file(cfg);
    save_plan_file(pf, out_path);
    if (pf.is_product) {
        std::printf("plan written: factor1 N0=%lld N=%lld M0=%lld terms=%lld, "
                    "factor2 N0=%lld N=%lld M0=%lld terms=%lld\n",
                    pf.product.plan1.N0, pf.product.plan1.N,
                    pf.product.plan1.M.empty() ? 0 : pf.product.plan1.M[0],
                    pf.product.plan1.total_terms(), pf.product.plan2.N0,
                    pf.product.plan2.N,
                    pf.product.plan2.M.empty() ? 0 : pf.product.plan2.M[0],
                    pf.product.plan2.total_terms());
    } else {
        std::printf("plan written: N0=%lld N=%lld M0=%lld terms=%lld "
                    "budget=%.6g\n",
                    pf.plan.N0, pf.plan.N,
                    pf.plan.M.empty() ? 0 : pf.plan.M[0],
                    pf.plan.total_terms(), pf.plan.variance_budget);
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& plan_path,
                 const std::string& out_path, std::optional<long long> seed_arg,
                 bool emit_base) {
    const RunConfig cfg = load_config(config_path);
    const PlanFile pf = load_plan_file(plan_path, config_hash(cfg));
    const std::uint64_t seed =
        seed_arg ? static_cast<std::uint64_t>(*seed_arg) : cfg.seed;
    const std::uint64_t plan_hash = plan_content_hash(pf);
    const std::vector<double> grid = uniform_grid(cfg.T, cfg.grid_points);

    const SpectralModel model1 =
        build_model(cfg.density_family, cfg.density_params);
    const WaveletTransforms wt1 = build_wavelet(cfg.wavelet);

    if (pf.is_product) {
        const SpectralModel model2 =
            build_model(cfg.density2_family, cfg.density2_params);
        const WaveletTransforms wt2 = build_wavelet(cfg.wavelet2);
        const CoefficientCache cache1 =
            build_cache(pf.product.plan1, model1, wt1, cfg.T);
        const CoefficientCache cache2 =
            build_cache(pf.product.plan2, model2, wt2, cfg.T);
        const SamplePath b1 = evaluate_base(
            draw_coefficients(pf.product.plan1, seed), cache1, grid);
        const SamplePath b2 = evaluate_base(
            draw_coefficients(pf.product.plan2, factor2_seed(seed)), cache2,
            grid);
        const SamplePath z = product_path(b1, b2);
        save_path_csv(z, seed, plan_hash, out_path);
        if (emit_base) {
            save_path_csv(b1, seed, plan_hash, with_suffix(out_path, ".f1"));
            save_path_csv(b2, seed, plan_hash, with_suffix(out_path, ".f2"));
        }
    } else {
        const CoefficientCache cache = build_cache(pf.plan, model1, wt1, cfg.T);
        const SamplePath base =
            evaluate_base(draw_coefficients(pf.plan, seed), cache, grid);
        const SamplePath path = power_path(base, cfg.s);
        save_path_csv(path, seed, plan_hash, out_path);
        if (emit_base) {
            save_path_csv(base, seed, plan_hash,
                          with_suffix(out_path, ".base"));
        }
    }
    std::printf("path written: %s (%d points, seed %llu)\n", out_path.c_str(),
                cfg.grid_points, static_cast<unsigned long long>(seed));
    return 0;
}

std::vector<double> deficit_grid(double T, int n) {
    std::vector<double> ts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ts[static_cast<std::size_t>(i)] =
            T * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return ts;
}

// Covariance and moment diagnostics for one base-process family.  Paths are
// evaluated fresh (the reliability run does not keep its paths).
void base_diagnostics(const TruncationPlan& plan, const CoefficientCache& cache,
                      double R0, double deficit_max, const RunConfig& cfg,
                      std::uint64_t seed, double moment_order,
                      VerificationReport* report,
                      std::map<std::string, double>* extra,
                      std::string* failure) {
    const int n_paths = cfg.replications;
    if (n_paths < 100) return;
    const std::vector<double> grid = uniform_grid(cfg.T, cfg.grid_points);
    std::vector<SamplePath> paths;
    paths.reserve(static_cast<std::size_t>(n_paths));
    for (int r = 0; r < n_paths; ++r) {
        paths.push_back(evaluate_base(
            draw_coefficients(plan, seed, static_cast<std::uint64_t>(r)),
            cache, grid));
    }
    const std::vector<double> lags = {0.0, 0.5 * cfg.T, cfg.T};
    report->covariance_errors = empirical_covariance(paths, lags);

    // Lag 0 must recover the truncated variance R0 - deficit within three
    // standard errors; other lags are bounded by R0 (Cauchy-Schwarz).
    for (const CovarianceEstimate& c : report->covariance_errors) {
        const double slack = 3.0 * c.standard_error;
        if (c.lag == 0.0) {
            if (c.estimate > R0 + slack ||
                c.estimate < R0 - deficit_max - slack) {
                *failure = "covariance(0) outside [R0 - deficit, R0]";
            }
        } else if (std::abs(c.estimate) > R0 + slack) {
            *failure = "covariance exceeds R0 at positive lag";
        }
    }

    // Sub-Gaussian moment check at the grid point nearest T/2.
    const std::size_t mid = grid.size() / 2;
    std::vector<double> samples;
    samples.reserve(paths.size());
    for (const SamplePath& p : paths) samples.push_back(p.values[mid]);
    const MomentCheck mc =
        moment_inequality_check(samples, std::sqrt(R0), moment_order);
    (*extra)["moment_order"] = mc.p;
    (*extra)["moment_empirical"] = mc.empirical;
    (*extra)["moment_bound"] = mc.bound;
    (*extra)["moment_standard_error"] = mc.standard_error;
    if (!mc.pass && failure->empty()) {
        *failure = "sub-Gaussian moment bound exceeded";
    }
}

int cmd_verify(const std::string& config_path, const std::string& plan_path,
               const std::string& out_path) {
    const RunConfig cfg = load_config(config_path);
    const std::uint64_t cfg_hash = config_hash(cfg);
    const PlanFile pf = load_plan_file(plan_path, cfg_hash);
    const bool want_product = cfg.process == RunConfig::Process::Product;
    if (pf.is_product != want_product) {
        throw ProvenanceMismatch("plan process kind does not match config");
    }

    const SpectralModel model1 =
        build_model(cfg.density_family, cfg.density_params);
    const WaveletTransforms wt1 = build_wavelet(cfg.wavelet);
    require_admissible(model1, wt1, "density");

    VerificationReport report;
    std::map<std::string, double> extra;
    std::string failure;
    const std::vector<double> ts = deficit_grid(cfg.T, 64);

    if (pf.is_product) {
        const SpectralModel model2 =
            build_model(cfg.density2_family, cfg.density2_params);
        const WaveletTransforms wt2 = build_wavelet(cfg.wavelet2);
        require_admissible(model2, wt2, "density2");

        const CoefficientCache cache1 =
            build_cache(pf.product.plan1, model1, wt1, cfg.T);
        const CoefficientCache cache2 =
            build_cache(pf.product.plan2, model2, wt2, cfg.T);
        const double d1 = variance_deficit(pf.product.plan1, cache1, model1, ts);
        const double d2 = variance_deficit(pf.product.plan2, cache2, model2, ts);
        extra["deficit1"] = d1;
        extra["deficit2"] = d2;
        extra["delta1_star"] = pf.product.delta1_star;
        extra["delta2_star"] = pf.product.delta2_star;
        report.variance_deficit_max = std::max(d1, d2);
        report.budget =
            std::min(pf.product.delta1_star, pf.product.delta2_star);
        if (d1 > pf.product.delta1_star) {
            failure = "factor 1 variance deficit exceeds its budget";
        } else if (d2 > pf.product.delta2_star) {
            failure = "factor 2 variance deficit exceeds its budget";
        }

        if (cfg.replications > 0 && failure.empty()) {
            const TruncationPlan ref1 = make_reference_plan(pf.product.plan1);
            const TruncationPlan ref2 = make_reference_plan(pf.product.plan2);
            const CoefficientCache rcache1 =
                build_cache(ref1, model1, wt1, cfg.T);
            const CoefficientCache rcache2 =
                build_cache(ref2, model2, wt2, cfg.T);
            ProductTarget target;
            target.plan2 = &pf.product.plan2;
            target.reference_plan2 = &ref2;
            target.cache1 = &cache1;
            target.reference_cache1 = &rcache1;
            target.cache2 = &cache2;
            target.reference_cache2 = &rcache2;
            ReliabilityOptions opts;
            opts.grid_points = cfg.grid_points;
            const VerificationReport rel = empirical_reliability(
                pf.product.plan1, ref1, cfg.accuracy(), target,
                cfg.replications, cfg.seed, opts);
            report.exceedance_count = rel.exceedance_count;
            report.replications = rel.replications;
            report.wilson_upper_95 = rel.wilson_upper_95;
            report.worst_norm = rel.worst_norm;
            report.grid_points_used = rel.grid_points_used;
            if (rel.wilson_upper_95 > cfg.delta) {
                failure = "empirical exceedance above reliability target";
            }
            base_diagnostics(pf.product.plan1, cache1, pf.R0_1, d1, cfg,
                             cfg.seed, std::max(2.0, 2.0 * cfg.p), &report,
                             &extra, &failure);
        }
    } else {
        const CoefficientCache cache = build_cache(pf.plan, model1, wt1, cfg.T);
        report.variance_deficit_max =
            variance_deficit(pf.plan, cache, model1, ts);
        report.budget = pf.plan.variance_budget;
        if (report.variance_deficit_max > report.budget) {
            failure = "variance deficit exceeds budget";
        }

        if (cfg.replications > 0 && failure.empty()) {
            const TruncationPlan ref = make_reference_plan(pf.plan);
            const CoefficientCache rcache = build_cache(ref, model1, wt1, cfg.T);
            PowerTarget target;
            target.s = cfg.s;
            target.cache = &cache;
            target.reference_cache = &rcache;
            ReliabilityOptions opts;
            opts.grid_points = cfg.grid_points;
            const VerificationReport rel =
                empirical_reliability(pf.plan, ref, cfg.accuracy(), target,
                                      cfg.replications, cfg.seed, opts);
            report.exceedance_count = rel.exceedance_count;
            report.replications = rel.replications;
            report.wilson_upper_95 = rel.wilson_upper_95;
            report.worst_norm = rel.worst_norm;
            report.grid_points_used = rel.grid_points_used;
            if (rel.wilson_upper_95 > cfg.delta) {
                failure = "empirical exceedance above reliability target";
            }
            const double q =
                cfg.s >= 2 ? 2.0 * cfg.p * static_cast<double>(cfg.s - 1)
                           : 2.0 * cfg.p;
            base_diagnostics(pf.plan, cache, pf.R0,
                             report.variance_deficit_max, cfg, cfg.seed, q,
                             &report, &extra, &failure);
        }
    }

    extra["deterministic_only"] = cfg.replications > 0 ? 0.0 : 1.0;
    extra["pass"] = failure.empty() ? 1.0 : 0.0;
    save_report_json(report_to_json(report, cfg, cfg_hash, extra), out_path);
    if (!failure.empty()) {
        std::fprintf(stderr, "verification FAILED: %s\n", failure.c_str());
        return kExitVerification;
    }
    std::printf("verification passed: deficit=%.6g budget=%.6g",
                report.variance_deficit_max, report.budget);
    if (cfg.replications > 0) {
        std::printf(" exceedance=%d/%d wilson=%.4g", report.exceedance_count,
                    report.replications, report.wilson_upper_95);
    } else {
        std::printf(" (deterministic checks only)");
    }
    std::printf("\n");
    return 0;
}

void print_constants(const char* label, const SpectralModel& model,
                     const WaveletTransforms& wt) {
    const AdmissibilityReport adm = check_admissibility(model, wt);
    std::printf("%s admissibility:\n", label);
    for (const auto& cond : adm.conditions) {
        std::printf("  %-28s %s", cond.name.c_str(),
                    cond.finite ? "finite" : "DIVERGES");
        if (cond.finite) std::printf("  value=%.10g", cond.value);
        std::printf("\n");
    }
    if (!adm.all_finite) {
        throw DomainError(std::string(label) +
                          " fails an admissibility condition");
    }
    const PlanConstants c = plan_constants(model, wt);
    std::printf("%s constants: A=%.10g B=%.10g A1=%.10g B1=%.10g R0=%.10g\n",
                label, c.A, c.B, c.A1, c.B1, c.R0);
}

int cmd_constants(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const SpectralModel model1 =
        build_model(cfg.density_family, cfg.density_params);
    const WaveletTransforms wt1 = build_wavelet(cfg.wavelet);
    print_constants("density", model1, wt1);
    if (cfg.process == RunConfig::Process::Product) {
        const SpectralModel model2 =
            build_model(cfg.density2_family, cfg.density2_params);
        const WaveletTransforms wt2 = build_wavelet(cfg.wavelet2);
        print_constants("density2", model2, wt2);
    } else {
        const PlanConstants c = plan_constants(model1, wt1);
        const double budget = delta1_for_power(cfg.accuracy(), cfg.s, c.R0);
        std::printf("variance budget delta1 = %.10g\n", budget);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet-based simulation of stationary sub-Gaussian "
                 "processes, their integer powers and products"};
    app.require_subcommand(1);

    std::string config_path, plan_path, out_path;
    std::optional<long long> seed_arg;
    bool emit_base = false;

    CLI::App* plan = app.add_subcommand(
        "plan", "Compute truncation counts for a config and write a plan file");
    plan->add_option("--config", config_path, "Run config JSON")->required();
    plan->add_option("--out", out_path, "Output plan JSON")->required();

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Draw one realization and write its path as CSV");
    simulate->add_option("--config", config_path, "Run config JSON")
        ->required();
    simulate->add_option("--plan", plan_path, "Plan file from 'plan'")
        ->required();
    simulate->add_option("--out", out_path, "Output CSV")->required();
    simulate->add_option("--seed", seed_arg,
                         "Override the config seed for this run");
    simulate->add_flag("--emit-base", emit_base,
                       "Also write the base (pre-power / per-factor) paths");

    CLI::App* verify = app.add_subcommand(
        "verify", "Run deterministic and statistical checks, write a report");
    verify->add_option("--config", config_path, "Run config JSON")->required();
    verify->add_option("--plan", plan_path, "Plan file from 'plan'")
        ->required();
    verify->add_option("--out", out_path, "Output report JSON")->required();

    CLI::App* constants = app.add_subcommand(
        "constants", "Print admissibility report and plan constants");
    constants->add_option("--config", config_path, "Run config JSON")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan->parsed()) return cmd_plan(config_path, out_path);
        if (simulate->parsed()) {
            return cmd_simulate(config_path, plan_path, out_path, seed_arg,
                                emit_base);
        }
        if (verify->parsed()) {
            return cmd_verify(config_path, plan_path, out_path);
        }
        return cmd_constants(config_path);
    } catch (const ProvenanceMismatch& e) {
        std::fprintf(stderr, "provenance error: %s\n", e.what());
        return kExitProvenance;
    } catch (const BudgetTooTight& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const BoundViolation& e) {
        std::fprintf(stderr, "verification error: %s\n", e.what());
        return kExitVerification;
    } catch (const NegativeDeficit& e) {
        std::fprintf(stderr, "verification error: %s\n", e.what());
        return kExitVerification;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
