#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperchoq/choquard.hpp"
#include "hyperchoq/geometry.hpp"
#include "hyperchoq/green_kernel.hpp"
#include "hyperchoq/heat_kernel.hpp"
#include "hyperchoq/io.hpp"
#include "hyperchoq/quadrature.hpp"
#include "hyperchoq/radial_field.hpp"
#include "hyperchoq/solver.hpp"
#include "hyperchoq/symmetry.hpp"
#include "hyperchoq/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace hyperchoq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitQuadrature = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitVerifyFailed = 5;

std::string join_invocation(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

std::string g_invocation;

void write_plot_script(const std::string& script_path, const std::string& csv_path,
                       const std::string& ylabel, bool logscale) {
    std::string s;
    s += "set datafile separator \",\"\n";
    s += "set datafile commentschars \"#\"\n";
    s += "set xlabel \"rho\"\n";
    s += "set ylabel \"" + ylabel + "\"\n";
    if (logscale) s += "set logscale y\n";
    s += "set grid\n";
    s += "plot \"" + csv_path + "\" using 1:2 skip 1 with lines title \"" + ylabel + "\"\n";
    s += "pause -1\n";
    io::write_file_atomic(script_path, s);
}

struct KernelArgs {
    std::string kind = "green";
    int dim = 3;
    double alpha = 2.0;
    double t = 1.0;
    double rho_min = 1e-2;
    double rho_max = 10.0;
    std::size_t points = 200;
    bool log_spacing = false;
    bool derivative = false;
    double tol = 1e-10;
    std::string out;
    std::string plot_script;
};

int cmd_kernel(const KernelArgs& args) {
    if (args.points < 2) throw std::domain_error("kernel table needs at least 2 points");
    if (!(args.rho_min > 0.0) || !(args.rho_max > args.rho_min))
        throw std::domain_error("kernel table needs 0 < rho-min < rho-max");
    HeatEvalOptions opts;
    opts.quad_tolerance = args.tol;
    validate(opts);

    std::vector<double> rho(args.points);
    for (std::size_t i = 0; i < args.points; ++i) {
        double f = static_cast<double>(i) / static_cast<double>(args.points - 1);
        rho[i] = args.log_spacing
                     ? args.rho_min * std::pow(args.rho_max / args.rho_min, f)
                     : args.rho_min + (args.rho_max - args.rho_min) * f;
    }

    io::CsvTable table;
    table.comments.emplace_back("tool", std::string("hyperchoq ") + version_string);
    table.comments.emplace_back("invocation", g_invocation);
    table.columns = {"rho", "value"};
    if (args.derivative) table.columns.push_back("derivative");

    if (args.kind == "heat") {
        if (args.derivative) throw std::domain_error("derivative output is for the green kernel");
        if (!(args.t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
        for (double r : rho)
            table.rows.push_back({r, heat_eval(args.dim, args.t, r, opts)});
    } else if (args.kind == "green") {
        KernelSpec spec{args.dim, args.alpha};
        validate(spec);
        for (double r : rho) {
            std::vector<double> row{r, green_eval(spec, r, opts)};
            if (args.derivative) row.push_back(green_derivative(spec, r, opts));
            table.rows.push_back(std::move(row));
        }
    } else {
        throw std::domain_error("unknown kernel kind: " + args.kind);
    }

    io::write_file_atomic(args.out, io::format_csv(table));
    if (!args.plot_script.empty())
        write_plot_script(args.plot_script, args.out, args.kind + " kernel", true);
    std::printf("wrote %zu rows to %s\n", table.rows.size(), args.out.c_str());
    return kExitOk;
}

struct SolveArgs {
    int dim = 3;
    double alpha = 2.0;
    double p = 2.0;
    double lambda = 0.0;
    double r_max = 40.0;
    std::size_t nodes = 1000;
    double grad_tol = 1e-8;
    std::size_t max_iters = 2000;
    double quad_tol = 1e-10;
    std::string out;
    std::string plot_script;
};

json report_to_json(const SolveArgs& args, const GroundStateReport& report) {
    json j;
    j["tool"] = std::string("hyperchoq ") + version_string;
    j["invocation"] = g_invocation;
    j["dim"] = args.dim;
    j["alpha"] = args.alpha;
    j["p"] = args.p;
    j["lambda"] = args.lambda;
    j["r_max"] = args.r_max;
    j["nodes"] = args.nodes;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["zeta"] = report.zeta;
    j["quotient"] = report.quotient;
    j["nehari_defect"] = report.nehari_defect;
    j["el_residual"] = report.el_residual;
    j["gradient_measure"] = report.gradient_measure;
    j["monotone"] = report.monotone;
    j["decay_slope"] = report.decay_slope;
    j["tail_mass"] = report.tail_mass;
    return j;
}

void write_solution(const SolveArgs& args, const RadialGrid& grid,
                    const GroundStateReport& report, const std::string& suffix) {
    io::CsvTable table;
    table.comments.emplace_back("tool", std::string("hyperchoq ") + version_string);
    table.comments.emplace_back("invocation", g_invocation);
    table.columns = {"rho", "value"};
    for (std::size_t i = 0; i < grid.size(); ++i)
        table.rows.push_back({grid.nodes()[i], report.profile.values[i]});
    io::write_file_atomic(args.out + suffix + ".csv", io::format_csv(table));
    io::write_file_atomic(args.out + suffix + ".json",
                          report_to_json(args, report).dump(2) + "\n");
    if (!args.plot_script.empty())
        write_plot_script(args.plot_script, args.out + suffix + ".csv", "u", true);
}

int cmd_solve(const SolveArgs& args) {
    ProblemSpec spec{args.dim, args.alpha, args.p, args.lambda};
    if (validate_exponents(spec) != ExponentClass::subcritical)
        throw std::domain_error("parameters are not strictly subcritical");
    HeatEvalOptions opts;
    opts.quad_tolerance = args.quad_tol;
    validate(opts);

    RadialGrid grid = RadialGrid::make_default(args.dim, args.r_max, args.nodes);
    ChoquardEnergy energy(grid, spec, opts);
    SolverConfig config;
    config.grad_tolerance = args.grad_tol;
    config.max_iterations = args.max_iters;
    GroundStateReport report = solve_ground_state(energy, config);

    if (!report.converged) {
        write_solution(args, grid, report, ".partial");
        std::fprintf(stderr,
                     "solver stopped without convergence after %zu iterations "
                     "(gradient measure %.3e); partial output written\n",
                     report.iterations, report.gradient_measure);
        return kExitNoConvergence;
    }
    write_solution(args, grid, report, "");
    if (!report.monotone || !(report.nehari_defect < 1e-10)) {
        std::fprintf(stderr,
                     "converged iterate violates an output invariant "
                     "(monotone=%d, nehari defect %.3e); output written\n",
                     int(report.monotone), report.nehari_defect);
        return kExitNoConvergence;
    }
    std::printf("converged in %zu iterations: zeta=%.12g, defect=%.3e, residual=%.3e\n",
                report.iterations, report.zeta, report.nehari_defect, report.el_residual);
    return kExitOk;
}

struct VerifyArgs {
    std::string suite = "all";
    std::uint64_t seed = 12345;
    std::size_t trials = 50;
    std::string out;
};

struct CheckLine {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// Random sum of radial gaussian bumps, nonnegative, vanishing near r_max.
RadialProfile random_bump_profile(const RadialGrid& grid, std::mt19937_64& rng,
                                  double center_max) {
    std::uniform_real_distribution<double> amp(0.1, 2.0), ctr(0.0, center_max), wid(0.3, 2.5);
    int bumps = 1 + static_cast<int>(rng() % 3);
    RadialProfile u;
    u.values.assign(grid.size(), 0.0);
    for (int b = 0; b < bumps; ++b) {
        double a = amp(rng), c = ctr(rng), w = wid(rng);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double d = (grid.nodes()[i] - c) / w;
            u.values[i] += a * std::exp(-d * d);
        }
    }
    return u;
}

void run_hls_suite(const VerifyArgs& args, std::vector<CheckLine>& checks) {
    const int dim = 3;
    const double alpha = 2.0;
    const double s = 2.0 * dim / (dim + alpha);
    const double q = dim * s / (dim - s * alpha);
    HeatEvalOptions opts;
    RadialGrid grid = RadialGrid::make_default(dim, 30.0, 500);
    KernelTable table(KernelSpec{dim, alpha}, 5e-5, 2.0 * grid.r_max() + 10.0, 1e-8, opts);
    ConvolutionOperator conv(grid, table);
    double c_bound = hls_constant(dim, alpha, s, heat_diag_constant(dim, opts));

    std::mt19937_64 rng(args.seed);
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < args.trials; ++t) {
        RadialProfile f = random_bump_profile(grid, rng, 6.0);
        double lhs = lq_norm(grid, conv.apply(f), q);
        double rhs = c_bound * lq_norm(grid, f, s);
        worst_ratio = std::max(worst_ratio, lhs / rhs);
        if (lhs > rhs) ++violations;
    }
    checks.push_back({"hls_violations", static_cast<double>(violations), 0.0, violations == 0});
    checks.push_back({"hls_worst_ratio", worst_ratio, 1.0, worst_ratio <= 1.0});
}

void run_heat_semigroup_suite(const VerifyArgs& args, std::vector<CheckLine>& checks) {
    HeatEvalOptions opts;
    RadialGrid grid3 = RadialGrid::make_default(3, 30.0, 900);
    double worst = 0.0;
    for (double t : {0.1, 1.0, 10.0})
        worst = std::max(worst, semigroup_defect(3, t, grid3, opts));
    checks.push_back({"semigroup_defect_dim3", worst, 1e-6, worst <= 1e-6});
    RadialGrid grid4 = RadialGrid::make_default(4, 30.0, 900);
    double defect4 = semigroup_defect(4, 1.0, grid4, opts);
    checks.push_back({"semigroup_defect_dim4", defect4, 1e-4, defect4 <= 1e-4});
    const auto& poly = OddKernelPolynomial::get(3);
    double worst_cf = 0.0;
    std::mt19937_64 rng(args.seed);
    std::uniform_real_distribution<double> unif(0.01, 12.0);
    for (std::size_t i = 0; i < args.trials; ++i) {
        double rho = unif(rng), t = std::exp(unif(rng) / 4.0 - 1.0);
        double closed = std::pow(4.0 * M_PI * t, -1.5) * std::exp(-t) *
                        (rho / std::sinh(rho)) * std::exp(-rho * rho / (4.0 * t));
        double got = poly.value(t, rho);
        worst_cf = std::max(worst_cf, std::abs(got - closed) / closed);
    }
    checks.push_back({"dim3_closed_form", worst_cf, 1e-12, worst_cf <= 1e-12});
}

void run_monotone_suite(const VerifyArgs& args, std::vector<CheckLine>& checks) {
    HeatEvalOptions opts;
    const KernelSpec specs[] = {{3, 1.5}, {5, 2.0}, {4, 1.0}};
    for (const KernelSpec& spec : specs) {
        std::size_t bad = 0;
        double worst = -HUGE_VAL;
        std::size_t n = std::max<std::size_t>(args.trials, 8);
        for (std::size_t i = 0; i < n; ++i) {
            double f = static_cast<double>(i) / static_cast<double>(n - 1);
            double rho = 0.05 * std::pow(12.0 / 0.05, f);
            double d = green_derivative(spec, rho, opts);
            worst = std::max(worst, d);
            if (!(d < 0.0)) ++bad;
        }
        std::string name = "derivative_negative_" + std::to_string(spec.dim) + "d";
        checks.push_back({name, worst, 0.0, bad == 0});
    }
}

void run_spectrum_suite(const VerifyArgs& args, std::vector<CheckLine>& checks) {
    const int dim = 3;
    RadialGrid grid = RadialGrid::make_default(dim, 40.0, 2000);
    double bottom = spectral_bottom(dim);
    std::mt19937_64 rng(args.seed);
    double q_min = HUGE_VAL;
    for (std::size_t t = 0; t < args.trials; ++t) {
        RadialProfile u = random_bump_profile(grid, rng, 20.0);
        q_min = std::min(q_min, rayleigh_quotient(grid, u));
    }
    checks.push_back({"rayleigh_above_bottom", q_min, 0.99 * bottom, q_min >= 0.99 * bottom});

    // Slowly decaying exponential with a linear ramp to zero at the boundary:
    // the quotient should land just above the spectral bottom.
    RadialProfile trial;
    trial.values.assign(grid.size(), 0.0);
    double r_max = grid.r_max();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double rho = grid.nodes()[i];
        double ramp = std::min(1.0, (r_max - rho) / 8.0);
        trial.values[i] = std::exp(-0.9 * rho) * ramp;
    }
    double q_trial = rayleigh_quotient(grid, trial);
    bool near = q_trial >= 0.99 * bottom && q_trial <= 1.05 * bottom;
    checks.push_back({"exponential_trial_near_bottom", q_trial, 1.05 * bottom, near});
}

void run_polarization_suite(const VerifyArgs& args, std::vector<CheckLine>& checks) {
    KernelSpec spec{3, 2.0};
    KernelTable table(spec, 1e-4, 25.0, 1e-7);
    std::mt19937_64 rng(args.seed);
    std::uniform_real_distribution<double> unif(-0.4, 0.4), amp(0.2, 1.5), rate(0.8, 2.0);

    // Random fields against random hypersurfaces: the gap estimate must never
    // sit significantly below zero.
    std::size_t below = 0;
    double worst_sigma = HUGE_VAL;
    for (std::size_t t = 0; t < std::max<std::size_t>(args.trials / 2, 8); ++t) {
        std::vector<double> a(3), nrm(3);
        double n2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            a[i] = 0.5 * unif(rng);
            nrm[i] = unif(rng) + (i == 0 ? 0.3 : 0.0);
            n2 += nrm[i] * nrm[i];
        }
        for (double& c : nrm) c /= std::sqrt(n2);
        GeodesicHypersurface h{BallPoint(a), nrm};
        BallPoint c1({unif(rng), unif(rng), unif(rng)});
        BallPoint c2({unif(rng), unif(rng), unif(rng)});
        double a1 = amp(rng), a2 = amp(rng), b1 = rate(rng), b2 = rate(rng);
        auto fn = [&](const BallPoint& x) {
            return a1 * std::exp(-b1 * geodesic_distance(x, c1)) +
                   a2 * std::exp(-b2 * geodesic_distance(x, c2));
        };
        SampledField f = sample_pair_closed(h, 250, 6.0, args.seed + 17 * t, fn);
        GapEstimate g = polarization_gap(f, h, table, 2.0);
        double sigmas = g.std_error > 0.0 ? g.value / g.std_error : 0.0;
        worst_sigma = std::min(worst_sigma, sigmas);
        if (sigmas < -3.0) ++below;
    }
    checks.push_back(
        {"random_gap_above_minus_3sigma", worst_sigma, -3.0, below == 0});

    GeodesicHypersurface surface{BallPoint({0.15, 0.0, 0.0}), {1.0, 0.0, 0.0}};
    // Strong bump past the surface plus a weaker one at a non-mirror spot on
    // the origin side. Polarizing a single off-side bump only reflects it and
    // leaves the pair energy unchanged; this mixed field forces a strict
    // increase, so the gap must clear the noise floor.
    auto field_fn = [](const BallPoint& x) {
        BallPoint c1({0.55, 0.25, 0.0});
        BallPoint c2({-0.35, -0.30, 0.0});
        return std::exp(-1.2 * geodesic_distance(x, c1)) +
               0.7 * std::exp(-1.5 * geodesic_distance(x, c2));
    };
    std::size_t pairs = std::max<std::size_t>(args.trials * 20, 500);
    SampledField field = sample_pair_closed(surface, pairs, 2.0, args.seed, field_fn);
    GapEstimate gap = polarization_gap(field, surface, table, 2.0);
    double clear = gap.std_error > 0.0 ? gap.value / gap.std_error : 0.0;
    checks.push_back({"asymmetric_gap_sigmas", clear, 3.0, clear > 3.0});

    SampledField pol = polarize(field, surface);
    GapEstimate fixed = polarization_gap(pol, surface, table, 2.0);
    checks.push_back({"polarized_fixed_point", fixed.value, 0.0, fixed.value == 0.0});
}

int cmd_verify(const VerifyArgs& args) {
    std::vector<CheckLine> checks;
    if (args.suite == "hls") {
        run_hls_suite(args, checks);
    } else if (args.suite == "heat-semigroup") {
        run_heat_semigroup_suite(args, checks);
    } else if (args.suite == "monotone") {
        run_monotone_suite(args, checks);
    } else if (args.suite == "polarization") {
        run_polarization_suite(args, checks);
    } else if (args.suite == "spectrum") {
        run_spectrum_suite(args, checks);
    } else if (args.suite == "all") {
        run_hls_suite(args, checks);
        run_heat_semigroup_suite(args, checks);
        run_monotone_suite(args, checks);
        run_polarization_suite(args, checks);
        run_spectrum_suite(args, checks);
    } else {
        throw std::domain_error("unknown suite: " + args.suite);
    }

    bool all_pass = true;
    json summary;
    summary["tool"] = std::string("hyperchoq ") + version_string;
    summary["invocation"] = g_invocation;
    summary["suite"] = args.suite;
    summary["seed"] = args.seed;
    json items = json::array();
    for (const auto& c : checks) {
        std::printf("%-28s value=%.6e bound=%.6e %s\n", c.name.c_str(), c.value, c.bound,
                    c.pass ? "pass" : "FAIL");
        json item;
        item["check"] = c.name;
        item["value"] = c.value;
        item["bound"] = c.bound;
        item["pass"] = c.pass;
        items.push_back(item);
        all_pass = all_pass && c.pass;
    }
    summary["checks"] = items;
    summary["pass"] = all_pass;
    if (!args.out.empty()) io::write_file_atomic(args.out, summary.dump(2) + "\n");
    if (!all_pass) {
        std::fprintf(stderr, "verification suite '%s' failed\n", args.suite.c_str());
        return kExitVerifyFailed;
    }
    std::printf("suite '%s': all checks passed\n", args.suite.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    g_invocation = join_invocation(argc, argv);
    CLI::App app{"Hyperbolic Choquard toolbox: kernels, ground states, symmetry checks"};
    app.set_version_flag("--version", std::string("hyperchoq ") + version_string);
    app.require_subcommand(1);

    KernelArgs kargs;
    CLI::App* kernel = app.add_subcommand("kernel", "Tabulate heat or resolvent kernels");
    kernel->add_option("--kind", kargs.kind, "heat or green")->capture_default_str();
    kernel->add_option("--dim", kargs.dim, "space dimension")->capture_default_str();
    kernel->add_option("--alpha", kargs.alpha, "kernel order (green)")->capture_default_str();
    kernel->add_option("--t", kargs.t, "diffusion time (heat)")->capture_default_str();
    kernel->add_option("--rho-min", kargs.rho_min, "first radius")->capture_default_str();
    kernel->add_option("--rho-max", kargs.rho_max, "last radius")->capture_default_str();
    kernel->add_option("--points", kargs.points, "row count")->capture_default_str();
    kernel->add_flag("--log-spacing", kargs.log_spacing, "log-spaced radii");
    kernel->add_flag("--derivative", kargs.derivative, "add a kernel derivative column");
    kernel->add_option("--tol", kargs.tol, "quadrature tolerance")->capture_default_str();
    kernel->add_option("--out", kargs.out, "output CSV path")->required();
    kernel->add_option("--plot-script", kargs.plot_script, "write a gnuplot script here");

    SolveArgs sargs;
    CLI::App* solve = app.add_subcommand("solve", "Compute a radial ground state");
    solve->add_option("--dim", sargs.dim, "space dimension")->capture_default_str();
    solve->add_option("--alpha", sargs.alpha, "kernel order")->capture_default_str();
    solve->add_option("--p", sargs.p, "nonlinearity exponent")->capture_default_str();
    solve->add_option("--lambda", sargs.lambda, "spectral shift")->capture_default_str();
    solve->add_option("--r-max", sargs.r_max, "domain radius")->capture_default_str();
    solve->add_option("--nodes", sargs.nodes, "grid size")->capture_default_str();
    solve->add_option("--grad-tol", sargs.grad_tol, "gradient stopping measure")
        ->capture_default_str();
    solve->add_option("--max-iters", sargs.max_iters, "iteration budget")->capture_default_str();
    solve->add_option("--quad-tol", sargs.quad_tol, "kernel quadrature tolerance")
        ->capture_default_str();
    solve->add_option("--out", sargs.out, "output prefix (.csv and .json)")->required();
    solve->add_option("--plot-script", sargs.plot_script, "write a gnuplot script here");

    VerifyArgs vargs;
    CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_option("--suite", vargs.suite,
                       "hls, heat-semigroup, monotone, polarization, spectrum or all")
        ->capture_default_str();
    verify->add_option("--seed", vargs.seed, "random seed")->capture_default_str();
    verify->add_option("--trials", vargs.trials, "sample count")->capture_default_str();
    verify->add_option("--out", vargs.out, "JSON summary path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (kernel->parsed()) return cmd_kernel(kargs);
        if (solve->parsed()) return cmd_solve(sargs);
        if (verify->parsed()) return cmd_verify(vargs);
        std::fprintf(stderr, "no subcommand given\n");
        return kExitUsage;
    } catch (const QuadratureError& e) {
        std::fprintf(stderr, "quadrature failure: %s (achieved tolerance %.3e)\n", e.what(),
                     e.achieved_tolerance);
        return kExitQuadrature;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid parameters: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid parameters: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
