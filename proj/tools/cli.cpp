// Command line front end: percolation simulation, threshold sweeps, the
// quantitative check catalog, branching experiments, and the renormalization
// driver. Every run is fully determined by (seed, flags); outputs are CSV and
// JSON under --out.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "annuperc/branching.hpp"
#include "annuperc/harness.hpp"

using namespace annuperc;
using nlohmann::json;

namespace {

Norm parse_norm(const std::string& s) {
    if (s == "round") return Norm::Round;
    if (s == "square") return Norm::Square;
    throw CLI::ValidationError("--norm must be round or square");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + name + " in " + dir);
    return os;
}

int run_simulate(std::uint64_t seed, std::uint64_t trials, double eps, const std::string& norm_s,
                 double area, double L_over_r, const std::string& out_dir, int threads) {
    const Norm norm = parse_norm(norm_s);
    Annulus a(norm, radius_for_area(norm, eps, area), eps);
    std::vector<SimRow> rows(trials);
    parallel_for_trials(trials, threads, [&](std::uint64_t i) {
        RngStream stream(seed, "simulate", i);
        rows[i] = simulate_one(a, L_over_r, stream.next_u64());
    });
    auto os = open_out(out_dir, "simulate.csv");
    write_sim_csv_header(os);
    std::uint64_t crossings = 0;
    for (const SimRow& r : rows) {
        write_sim_csv_row(os, r);
        crossings += r.crossing_lr;
    }
    WilsonInterval w = wilson_interval(crossings, trials);
    json summary{{"area", area},        {"eps", eps},
                 {"norm", norm_s},      {"L_over_r", L_over_r},
                 {"trials", trials},    {"crossing_frequency", double(crossings) / double(trials)},
                 {"wilson", {w.lo, w.hi}}};
    auto js = open_out(out_dir, "simulate.json");
    js << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_nc_sweep(std::uint64_t seed, std::uint64_t trials, const std::vector<double>& eps_list,
                 const std::string& norm_s, double L_over_r, double lo, double hi, double tol,
                 bool two_size, const std::string& out_dir, int threads) {
    const Norm norm = parse_norm(norm_s);
    json all = json::array();
    for (double eps : eps_list) {
        ThresholdEstimate t =
            estimate_nc(eps, norm, L_over_r, trials, lo, hi, tol, seed, threads, true);
        char name[64];
        std::snprintf(name, sizeof name, "nc_probes_%s_eps%.4g.csv", norm_s.c_str(), eps);
        auto pc = open_out(out_dir, name);
        write_probe_csv(pc, t);
        all.push_back(json::parse(threshold_to_json(t)));
        std::printf("eps=%.4g %s L/r=%g: nc_hat=%.4f ci=[%.4f, %.4f]  (bound %.4f)\n", eps,
                    norm_s.c_str(), L_over_r, t.nc_hat, t.ci_lo, t.ci_hi,
                    norm == Norm::Round ? lower_bound_nc(eps) : 1.014);
        if (two_size) {
            ThresholdEstimate t2 = estimate_nc(eps, norm, 2.0 * L_over_r,
                                               std::max<std::uint64_t>(trials / 4, 20), lo, hi,
                                               tol, seed + 1, threads, true);
            std::printf("  two-size check at L/r=%g: nc_hat=%.4f ci=[%.4f, %.4f]\n",
                        2.0 * L_over_r, t2.nc_hat, t2.ci_lo, t2.ci_hi);
            all.back()["two_size"] = json::parse(threshold_to_json(t2));
        }
    }
    auto os = open_out(out_dir, "nc_sweep.json");
    os << all.dump(2) << "\n";
    return 0;
}

int run_lemma_check(std::uint64_t seed, const std::string& which, double budget,
                    const std::string& out_dir) {
    std::vector<std::string> ids =
        which == "all" ? lemma_check_ids() : std::vector<std::string>{which};
    json reports = json::array();
    bool all_pass = true;
    for (const std::string& id : ids) {
        LemmaReport rep = lemma_check(id, budget, seed);
        all_pass = all_pass && rep.pass;
        std::printf("[%s] %-16s statistic=%.6g bound=%.6g slack=%.3g  %s\n",
                    rep.pass ? "PASS" : "FAIL", rep.id.c_str(), rep.statistic, rep.bound,
                    rep.slack, rep.detail.c_str());
        reports.push_back(json::parse(rep.json));
    }
    auto os = open_out(out_dir, "lemma_reports.json");
    os << reports.dump(2) << "\n";
    return all_pass ? 0 : 1;
}

int run_branching(std::uint64_t seed, std::uint64_t runs, double eta, std::uint64_t cap,
                  std::uint64_t horizon, bool spatial, double eps, double R_over_r,
                  const std::string& out_dir) {
    auto os = open_out(out_dir, spatial ? "spatial_runs.csv" : "gw_runs.csv");
    json summary;
    if (!spatial) {
        os << "run,final_population,survived,hit_target\n";
        std::uint64_t alive = 0, hits = 0;
        GWConfig cfg{eta, cap == 0 ? kNoCap : cap, horizon, true};
        for (std::uint64_t i = 0; i < runs; ++i) {
            RngStream rng(seed, "gw-batch", i);
            GWTrace tr = gw_run(cfg, rng);
            alive += tr.survived;
            hits += tr.hit_target;
            char buf[96];
            std::snprintf(buf, sizeof buf, "%llu,%llu,%d,%d\n", (unsigned long long)i,
                          (unsigned long long)tr.population.back(), tr.survived ? 1 : 0,
                          tr.hit_target ? 1 : 0);
            os << buf;
        }
        const double p = double(alive) / double(runs);
        summary = {{"eta", eta},
                   {"cap", cap},
                   {"horizon", horizon},
                   {"runs", runs},
                   {"survival", p},
                   {"survival_stderr", std::sqrt(p * (1 - p) / double(runs))},
                   {"target_frequency", double(hits) / double(runs)}};
    } else {
        os << "run,survived,landing,ancestors_safe,node_x,node_y\n";
        Annulus a(Norm::Round, 1.0, eps);
        const double R = R_over_r;
        std::uint64_t alive = 0, hits = 0;
        for (std::uint64_t i = 0; i < runs; ++i) {
            RngStream rng(seed, "spatial-batch", i);
            SpatialRunResult res =
                spatial_branching_run(a, eta, cap == 0 ? kNoCap : cap,
                                      (std::uint64_t)(R_over_r * R_over_r), {0, 0}, R, rng);
            alive += res.survived;
            hits += res.event_hit;
            char buf[160];
            std::snprintf(buf, sizeof buf, "%llu,%d,%d,%d,%.17g,%.17g\n", (unsigned long long)i,
                          res.survived ? 1 : 0, res.event_hit ? 1 : 0,
                          res.ancestors_safe ? 1 : 0, res.sampled_node.x, res.sampled_node.y);
            os << buf;
        }
        const double ps = double(alive) / double(runs);
        summary = {{"eta", eta},
                   {"eps", eps},
                   {"cap", cap},
                   {"R_over_r", R_over_r},
                   {"runs", runs},
                   {"survival", ps},
                   {"survival_stderr", std::sqrt(ps * (1 - ps) / double(runs))},
                   {"landing_hits", hits},
                   {"landing_fraction", alive ? double(hits) / double(alive) : 0.0}};
    }
    auto js = open_out(out_dir, spatial ? "spatial_summary.json" : "gw_summary.json");
    js << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_renorm(std::uint64_t seed, const std::string& mode, double eta, double eps, double rr,
               std::uint64_t n, double K, std::uint64_t count, int depth, bool strict,
               double oriented_p, const std::string& out_dir) {
    const double area = 1.0 + eta;
    const double r = radius_for_area(Norm::Round, eps, area);
    ParamOverrides ov;
    ov.R_over_r = rr;
    ov.n = n;
    if (K > 0) ov.K = K;
    RenormParams params = derive_params(eta, r, eps, ov);

    json pj{{"eta", params.eta},
            {"r", params.r},
            {"eps", params.eps},
            {"R", params.R},
            {"n", params.n},
            {"K", params.K},
            {"N", params.N},
            {"T", params.T},
            {"cap", params.cap()},
            {"constraints",
             {{"cap_consistency_residual", params.cap_consistency_residual},
              {"phase1_interference_ok", params.phase1_interference_ok},
              {"growth_interference_ok", params.growth_interference_ok},
              {"growth_reach_ok", params.growth_reach_ok},
              {"success_margin_ok", params.success_margin_ok}}}};
    const bool constraints_ok = params.phase1_interference_ok && params.growth_interference_ok &&
                                params.growth_reach_ok && params.success_margin_ok;
    if (strict && !constraints_ok) {
        std::cerr << "strict mode: parameter constraints do not hold\n" << pj.dump(2) << "\n";
        return 2;
    }

    if (mode == "derive") {
        auto os = open_out(out_dir, "renorm_params.json");
        os << pj.dump(2) << "\n";
        std::cout << pj.dump(2) << "\n";
        return 0;
    }

    if (mode == "oriented") {
        SurvivalFrequency s = oriented_bond_percolation(oriented_p, depth, count, seed);
        json j{{"p", oriented_p}, {"depth", depth}, {"trials", count},
               {"survival", s.frequency}, {"stderr", s.stderr_}};
        auto os = open_out(out_dir, "oriented.json");
        os << j.dump(2) << "\n";
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (mode == "bonds") {
        // isolated-bond Monte Carlo with the full postcondition verifier
        Box fbox = lattice_field_box(1, params.R);
        std::uint64_t open_count = 0, violations = 0, valid_runs = 0;
        auto os = open_out(out_dir, "bond_runs.csv");
        os << "seed,open,seeds_found,q_prime,examined,conditions_ok\n";
        for (std::uint64_t s = 0; s < count; ++s) {
            PointField f = PointField::sample_poisson(fbox, 1.0, params.r, seed * 1000 + s);
            std::vector<Vec2> P = pick_relays(f, {0, 0}, params);
            if (P.size() < params.n) continue;
            ++valid_runs;
            RngStream rng(seed, "bond-mc", s);
            BondOutcome out = bond_explore(f, {0, 0}, {0, 1}, P, {}, params, rng);
            ConditionReport rep = verify_bond(out, {0, 0}, {0, 1}, P, {}, params);
            open_count += out.open;
            violations += rep.all() ? 0 : 1;
            char buf[128];
            std::snprintf(buf, sizeof buf, "%llu,%d,%u,%zu,%llu,%d\n", (unsigned long long)s,
                          out.open ? 1 : 0, out.seeds_found, out.q_prime.size(),
                          (unsigned long long)out.points_examined, rep.all() ? 1 : 0);
            os << buf;
        }
        json j = pj;
        j["bond_runs"] = valid_runs;
        j["open_frequency"] = valid_runs ? double(open_count) / double(valid_runs) : 0.0;
        j["condition_violations"] = violations;
        auto js = open_out(out_dir, "bond_summary.json");
        js << j.dump(2) << "\n";
        std::cout << j.dump(2) << "\n";
        return violations == 0 ? 0 : 1;
    }

    if (mode == "lattice") {
        Box fbox = lattice_field_box(depth, params.R);
        PointField f = PointField::sample_poisson(fbox, 1.0, params.r, seed);
        LatticeTrace trace = lattice_run(f, depth, params, seed);
        auto os = open_out(out_dir, "lattice_trace.jsonl");
        write_lattice_jsonl(os, trace, params);
        std::uint64_t opens = 0, explored = 0;
        bool budgets = true;
        for (const LatticeRecord& rec : trace.records) {
            if (rec.rule == 'b') {
                ++explored;
                opens += rec.open;
            }
            budgets = budgets && rec.budget_ok;
        }
        json j{{"init_ok", trace.init_ok},
               {"bonds", trace.records.size()},
               {"explored", explored},
               {"open", opens},
               {"reached_sites", trace.reached.size()},
               {"budgets_ok", budgets}};
        std::cout << j.dump(2) << "\n";
        return trace.init_ok && budgets ? 0 : 1;
    }

    std::cerr << "unknown renorm mode " << mode << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuum percolation with annulus steps: simulation and checks"};
    app.require_subcommand(1);

    // config file provides defaults; explicit flags win
    std::string config_path;
    ExperimentConfig defaults;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "cannot read config " << config_path << "\n";
            return 2;
        }
        std::stringstream ss;
        ss << is.rdbuf();
        defaults = ExperimentConfig::from_json(ss.str());
    }

    std::uint64_t seed = defaults.seed;
    std::uint64_t trials = defaults.trials;
    std::string out_dir = defaults.out_dir;
    int threads = defaults.threads;
    std::string cfg_dummy;
    app.add_option("--config", cfg_dummy, "JSON config file with flag defaults");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--trials", trials, "trials per estimate");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    double eps = defaults.eps_list.empty() ? 1.0 : defaults.eps_list[0];
    std::vector<double> eps_list = defaults.eps_list;
    std::string norm_s = defaults.norm == Norm::Round ? "round" : "square";
    double area = defaults.area;
    double L_over_r = defaults.L_over_r;

    auto* sim = app.add_subcommand("simulate", "fields, components and crossing statistics");
    sim->fallthrough();
    sim->add_option("--eps", eps, "annulus thinness");
    sim->add_option("--norm", norm_s, "round | square");
    sim->add_option("--area", area, "annulus area |A|");
    sim->add_option("--L-over-r", L_over_r, "box side in units of r");

    auto* sweep = app.add_subcommand("nc-sweep", "critical area estimates by bisection");
    sweep->fallthrough();
    double br_lo = 1.2, br_hi = 6.5, tol = 0.05;
    bool two_size = false;
    sweep->add_option("--eps", eps_list, "thinness values to sweep")->expected(-1);
    sweep->add_option("--norm", norm_s, "round | square");
    sweep->add_option("--L-over-r", L_over_r, "box side in units of r");
    sweep->add_option("--bracket-lo", br_lo, "initial lower bracket on |A|");
    sweep->add_option("--bracket-hi", br_hi, "initial upper bracket on |A|");
    sweep->add_option("--tol", tol, "bisection tolerance on |A|");
    sweep->add_flag("--two-size", two_size, "repeat at 2L to expose finite-size drift");

    auto* check = app.add_subcommand("lemma-check", "quantitative check catalog");
    check->fallthrough();
    std::string which = "all";
    double budget = 1.0;
    check->add_option("--which", which, "check id or 'all'");
    check->add_option("--budget", budget, "sample budget scale (1 = full)");

    auto* branch = app.add_subcommand("branching", "Galton-Watson and spatial branching runs");
    branch->fallthrough();
    double eta = 0.1, rr = 20.0;
    std::uint64_t cap = 0, horizon = 20;
    bool spatial = false;
    branch->add_option("--eta", eta, "offspring mean minus one");
    branch->add_option("--cap", cap, "per-generation cap (0 = none)");
    branch->add_option("--horizon", horizon, "generations");
    branch->add_flag("--spatial", spatial, "spatial walk with the landing event");
    branch->add_option("--eps", eps, "annulus thinness (spatial)");
    branch->add_option("--R-over-r", rr, "block scale over step radius (spatial)");

    auto* ren = app.add_subcommand("renorm", "block renormalization driver");
    ren->fallthrough();
    std::string mode = "derive";
    double ren_eta = 9.0, ren_eps = 0.35, ren_rr = 10.0, ren_K = 60.0, oriented_p = 0.9;
    std::uint64_t ren_n = 3, count = 100;
    int depth = 3;
    bool strict = false;
    ren->add_option("--mode", mode, "derive | bonds | lattice | oriented");
    ren->add_option("--eta", ren_eta, "area excess, |A| = 1 + eta");
    ren->add_option("--eps", ren_eps, "annulus thinness");
    ren->add_option("--R-over-r", ren_rr, "block half-scale over r");
    ren->add_option("--n", ren_n, "relay points per site");
    ren->add_option("--K", ren_K, "cap override (0 = derived)");
    ren->add_option("--count", count, "bond runs / oriented trials");
    ren->add_option("--depth", depth, "lattice l1 depth");
    ren->add_option("--p", oriented_p, "oriented bond probability");
    ren->add_flag("--strict", strict, "refuse to run when constraints fail");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(seed, trials, eps, norm_s, area, L_over_r, out_dir, threads);
        if (*sweep) {
            if (eps_list.empty()) eps_list = {eps};
            return run_nc_sweep(seed, trials, eps_list, norm_s, L_over_r, br_lo, br_hi, tol,
                                two_size, out_dir, threads);
        }
        if (*check) return run_lemma_check(seed, which, budget, out_dir);
        if (*branch)
            return run_branching(seed, trials, eta, cap, horizon, spatial, eps, rr, out_dir);
        if (*ren)
            return run_renorm(seed, mode, ren_eta, ren_eps, ren_rr, ren_n, ren_K, count, depth,
                              strict, oriented_p, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
