#include "annuperc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "annuperc/branching.hpp"

namespace annuperc {

namespace {

using nlohmann::json;

const char* norm_name(Norm n) { return n == Norm::Round ? "round" : "square"; }

Norm norm_from_name(const std::string& s) {
    if (s == "round") return Norm::Round;
    if (s == "square") return Norm::Square;
    throw std::invalid_argument("unknown norm name: " + s);
}

// fitted once and frozen: the round sup-scaled overlap sweep peaks at 0.3210
// (eps = 0.04, grid 4096), and the cluster-overlap fit over 100 admissible
// configurations at eps = 0.05 peaks at 0.107 / (k |A| sqrt(eps)) ~ 0.16
constexpr double kRoundSupScaledBound = 0.35;
constexpr double kClusterOverlapFactor = 0.22;

}  // namespace

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void parallel_for_trials(std::uint64_t count, int threads,
                         const std::function<void(std::uint64_t)>& body) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::uint64_t i = cursor.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

CrossingEstimate crossing_probability(const Annulus& a, double L, std::uint64_t trials,
                                      std::uint64_t seed, std::string_view label,
                                      int threads) {
    if (!(L >= 10.0 * a.r))
        throw std::invalid_argument("crossing_probability: box side must be at least 10 r");
    if (trials == 0) throw std::invalid_argument("crossing_probability: need trials");

    std::vector<std::uint8_t> crossed(trials, 0);
    parallel_for_trials(trials, threads, [&](std::uint64_t i) {
        RngStream stream(seed, label, i);
        Box box{{0.0, 0.0}, L, L, Topology::Hard};
        PointField f = PointField::sample_poisson(box, 1.0, a.r, stream.next_u64());
        PercGraph g(f, a);
        crossed[i] = cluster_stats(g, a.r).crossing_lr ? 1 : 0;
    });
    std::uint64_t hits = 0;
    for (std::uint8_t c : crossed) hits += c;
    CrossingEstimate out;
    out.trials = trials;
    out.frequency = static_cast<double>(hits) / static_cast<double>(trials);
    out.ci = wilson_interval(hits, trials);
    return out;
}

double radius_for_area(Norm norm, double eps, double area) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("radius_for_area: eps in (0,1]");
    if (!(area > 0.0)) throw std::invalid_argument("radius_for_area: area must be positive");
    const double base = eps * (2.0 - eps);
    return norm == Norm::Round ? std::sqrt(area / (std::numbers::pi * base))
                               : std::sqrt(area / (4.0 * base));
}

std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w) {
    // pool adjacent violators
    struct Block {
        double value, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({y[i], w[i], 1});
        while (blocks.size() >= 2 &&
               blocks[blocks.size() - 2].value > blocks[blocks.size() - 1].value) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
            a.weight += b.weight;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks)
        for (std::size_t k = 0; k < b.count; ++k) out.push_back(b.value);
    return out;
}

namespace {

double bootstrap_crossing_point(const std::vector<ProbePoint>& probes, double lo, double hi,
                                RngStream& rng, bool resample) {
    std::vector<double> freq(probes.size()), weight(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        std::uint64_t k = probes[i].successes;
        if (resample) {
            const double p = probes[i].frequency;
            k = 0;
            for (std::uint64_t t = 0; t < probes[i].trials; ++t)
                if (rng.uniform01() < p) ++k;
        }
        freq[i] = static_cast<double>(k) / static_cast<double>(probes[i].trials);
        weight[i] = static_cast<double>(probes[i].trials);
    }
    std::vector<double> fit = isotonic_fit(freq, weight);
    for (std::size_t i = 0; i < fit.size(); ++i) {
        if (fit[i] >= 0.5) {
            if (i == 0) return probes[0].area;
            const double x0 = probes[i - 1].area, x1 = probes[i].area;
            const double y0 = fit[i - 1], y1 = fit[i];
            if (y1 <= y0) return x1;
            return x0 + (0.5 - y0) / (y1 - y0) * (x1 - x0);
        }
    }
    (void)lo;
    return hi;
}

}  // namespace

ThresholdEstimate estimate_nc(double eps, Norm norm, double L_over_r, std::uint64_t trials,
                              double bracket_lo, double bracket_hi, double tol,
                              std::uint64_t seed, int threads, bool auto_expand) {
    if (!(bracket_lo > 0.0) || !(bracket_hi > bracket_lo))
        throw std::invalid_argument("estimate_nc: bracket must satisfy 0 < lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("estimate_nc: tolerance must be positive");

    ThresholdEstimate out;
    out.eps = eps;
    out.norm = norm;
    out.L_over_r = L_over_r;
    out.trials_per_probe = trials;

    std::uint64_t probe_idx = 0;
    auto probe = [&](double area) {
        const double r = radius_for_area(norm, eps, area);
        Annulus a(norm, r, eps);
        char label[64];
        std::snprintf(label, sizeof label, "nc-probe-%llu",
                      static_cast<unsigned long long>(probe_idx++));
        CrossingEstimate ce = crossing_probability(a, L_over_r * r, trials, seed, label, threads);
        ProbePoint pp{area, static_cast<std::uint64_t>(std::llround(ce.frequency *
                                                                    static_cast<double>(trials))),
                      trials, ce.frequency};
        out.probes.push_back(pp);
        return ce.frequency;
    };

    double lo = bracket_lo, hi = bracket_hi;
    double f_lo = probe(lo), f_hi = probe(hi);
    int guard = 0;
    while (auto_expand && f_lo >= 0.5 && guard++ < 8) {
        lo *= 0.7;
        f_lo = probe(lo);
    }
    while (auto_expand && f_hi < 0.5 && guard++ < 16) {
        hi *= 1.35;
        f_hi = probe(hi);
    }
    if (f_lo >= 0.5 || f_hi < 0.5)
        throw std::invalid_argument("estimate_nc: bracket does not straddle frequency 1/2");

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) < 0.5)
            lo = mid;
        else
            hi = mid;
    }
    out.nc_hat = 0.5 * (lo + hi);

    std::sort(out.probes.begin(), out.probes.end(),
              [](const ProbePoint& a, const ProbePoint& b) { return a.area < b.area; });

    RngStream boot(seed, "bootstrap");
    std::vector<double> samples;
    samples.reserve(1000);
    for (int b = 0; b < 1000; ++b)
        samples.push_back(bootstrap_crossing_point(out.probes, lo, hi, boot, true));
    std::sort(samples.begin(), samples.end());
    out.ci_lo = samples[25];
    out.ci_hi = samples[974];
    return out;
}

SimRow simulate_one(const Annulus& a, double L_over_r, std::uint64_t seed) {
    const double L = L_over_r * a.r;
    Box box{{0.0, 0.0}, L, L, Topology::Hard};
    PointField f = PointField::sample_poisson(box, 1.0, a.r, seed);
    PercGraph g(f, a);
    ClusterStats cs = cluster_stats(g, a.r);
    SimRow row;
    row.seed = seed;
    row.area = a.area();
    row.eps = a.eps;
    row.norm = a.norm;
    row.L_over_r = L_over_r;
    row.n_points = f.size();
    row.largest_fraction = cs.largest_fraction;
    row.crossing_lr = cs.crossing_lr;
    row.mean_degree = cs.mean_degree;
    return row;
}

void write_sim_csv_header(std::ostream& os) {
    os << "seed,area,eps,norm,L_over_r,n_points,largest_fraction,crossing_lr,mean_degree\n";
}

void write_sim_csv_row(std::ostream& os, const SimRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%s,%.17g,%llu,%.17g,%d,%.17g\n",
                  static_cast<unsigned long long>(r.seed), r.area, r.eps, norm_name(r.norm),
                  r.L_over_r, static_cast<unsigned long long>(r.n_points), r.largest_fraction,
                  r.crossing_lr ? 1 : 0, r.mean_degree);
    os << buf;
}

std::string threshold_to_json(const ThresholdEstimate& t) {
    json j;
    j["eps"] = t.eps;
    j["norm"] = norm_name(t.norm);
    j["L_over_r"] = t.L_over_r;
    j["trials_per_probe"] = t.trials_per_probe;
    j["nc_hat"] = t.nc_hat;
    j["ci"] = {t.ci_lo, t.ci_hi};
    json probes = json::array();
    for (const ProbePoint& p : t.probes)
        probes.push_back({{"area", p.area}, {"successes", p.successes}, {"trials", p.trials}});
    j["probes"] = probes;
    return j.dump();
}

void write_probe_csv(std::ostream& os, const ThresholdEstimate& t) {
    os << "area,successes,trials,frequency,wilson_lo,wilson_hi\n";
    char buf[256];
    for (const ProbePoint& p : t.probes) {
        WilsonInterval w = wilson_interval(p.successes, p.trials);
        std::snprintf(buf, sizeof buf, "%.17g,%llu,%llu,%.17g,%.17g,%.17g\n", p.area,
                      static_cast<unsigned long long>(p.successes),
                      static_cast<unsigned long long>(p.trials), p.frequency, w.lo, w.hi);
        os << buf;
    }
}

void write_lattice_jsonl(std::ostream& os, const LatticeTrace& trace, const RenormParams& p) {
    json head;
    head["type"] = "params";
    head["eta"] = p.eta;
    head["r"] = p.r;
    head["eps"] = p.eps;
    head["R"] = p.R;
    head["n"] = p.n;
    head["K"] = p.K;
    head["N"] = p.N;
    head["T"] = p.T;
    head["constraints"] = {
        {"cap_consistency_residual", p.cap_consistency_residual},
        {"phase1_interference_ok", p.phase1_interference_ok},
        {"growth_interference_ok", p.growth_interference_ok},
        {"growth_reach_ok", p.growth_reach_ok},
        {"success_margin_ok", p.success_margin_ok},
    };
    head["init_ok"] = trace.init_ok;
    if (!trace.init_ok) head["init_error"] = trace.init_error;
    os << head.dump() << "\n";
    for (const LatticeRecord& r : trace.records) {
        json j;
        j["type"] = "bond";
        j["order"] = r.bond.order_index;
        j["level"] = r.bond.level;
        j["from"] = {r.bond.from.x, r.bond.from.y};
        j["to"] = {r.bond.to.x, r.bond.to.y};
        j["rule"] = std::string(1, r.rule);
        j["open"] = r.open;
        j["p_prime"] = r.p_prime_size;
        j["q_prime"] = r.q_prime_size;
        j["q_in_rect"] = r.q_in_rect;
        j["budget_ok"] = r.budget_ok;
        os << j.dump() << "\n";
    }
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("trials")) c.trials = j["trials"].get<std::uint64_t>();
    if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
    if (j.contains("eps")) c.eps_list = j["eps"].get<std::vector<double>>();
    if (j.contains("norm")) c.norm = norm_from_name(j["norm"].get<std::string>());
    if (j.contains("L_over_r")) c.L_over_r = j["L_over_r"].get<double>();
    if (j.contains("area")) c.area = j["area"].get<double>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    return c;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["trials"] = trials;
    j["mode"] = mode;
    j["eps"] = eps_list;
    j["norm"] = norm_name(norm);
    j["L_over_r"] = L_over_r;
    j["area"] = area;
    j["out"] = out_dir;
    j["threads"] = threads;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// check catalog
// ---------------------------------------------------------------------------

namespace {

LemmaReport make_report(std::string id, bool pass, double statistic, double bound, double slack,
                        std::string detail, json extra = {}) {
    LemmaReport rep;
    rep.id = std::move(id);
    rep.pass = pass;
    rep.statistic = statistic;
    rep.bound = bound;
    rep.slack = slack;
    rep.detail = std::move(detail);
    json j = std::move(extra);
    j["id"] = rep.id;
    j["pass"] = rep.pass;
    j["statistic"] = rep.statistic;
    j["bound"] = rep.bound;
    j["slack"] = rep.slack;
    j["detail"] = rep.detail;
    rep.json = j.dump();
    return rep;
}

// min overlap ratio of joined round annuli stays above eps/(pi sqrt 3)
LemmaReport check_min_overlap_bound(double budget, std::uint64_t) {
    const int grid = std::max(16, static_cast<int>(512 * std::min(1.0, budget)));
    bool pass = true;
    double worst_margin = 1e300, worst_stat = 0.0, worst_bound = 0.0;
    json rows = json::array();
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        Annulus a(Norm::Round, 1.0, eps);
        RatioExtremum m = min_overlap_ratio(a, grid);
        const double bound = overlap_lower_bound_ratio(eps);
        const double margin = m.ratio - bound;
        pass = pass && margin >= -1e-9;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_stat = m.ratio;
            worst_bound = bound;
        }
        rows.push_back({{"eps", eps}, {"min_ratio", m.ratio}, {"at_d", m.d}, {"bound", bound}});
    }
    return make_report("lemma2", pass, worst_stat, worst_bound, worst_margin,
                       "min overlap/area over joined separations vs eps/(pi sqrt3), grid " +
                           std::to_string(grid),
                       {{"cases", rows}});
}

// subcriticality certificate of the square annulus at area 1.014
LemmaReport check_subcritical_certificate(double budget, std::uint64_t seed) {
    const std::uint64_t samples =
        std::max<std::uint64_t>(10000, static_cast<std::uint64_t>(1e6 * budget));
    const double target_area = 1.014;
    const double eps = 0.3;
    Annulus sq(Norm::Square, radius_for_area(Norm::Square, eps, target_area), eps);
    RngStream rng(seed, "subcritical-square");
    McEstimate est = subcritical_certificate(sq, samples, rng);
    const bool sq_ok = est.value + 3.0 * est.stderr_ < 1.0;

    Annulus rd(Norm::Round, radius_for_area(Norm::Round, eps, 1.0), eps);
    RngStream rng2(seed, "subcritical-round");
    McEstimate est2 = subcritical_certificate(rd, samples, rng2);
    const bool rd_ok = est2.value < 1.0;

    return make_report(
        "lemma3", sq_ok && rd_ok, est.value, 1.0, 1.0 - est.value - 3.0 * est.stderr_,
        "square annulus certificate at |A|=1.014 (3 sigma below 1) and round at |A|=1",
        {{"square", {{"value", est.value}, {"stderr", est.stderr_}, {"samples", samples}}},
         {"round", {{"value", est2.value}, {"stderr", est2.stderr_}}}});
}

// interval self-convolution identity (2/3) c^3
LemmaReport check_interval_identity(double, std::uint64_t) {
    bool pass = true;
    double worst = 0.0;
    json rows = json::array();
    for (double c : {0.1, 1.0, 7.0}) {
        IntervalOverlap io = interval_overlap_integral(c);
        const double rel = std::fabs(io.quadrature - io.closed_form) / io.closed_form;
        pass = pass && rel <= 1e-6;
        worst = std::max(worst, rel);
        rows.push_back({{"c", c}, {"closed", io.closed_form}, {"quadrature", io.quadrature}});
    }
    return make_report("lemma4", pass, worst, 1e-6, 1e-6 - worst,
                       "midpoint quadrature vs (2/3) c^3, relative error", {{"cases", rows}});
}

// Galton-Watson moments and the lower tail bound at eta = 0.1, t = 20
LemmaReport check_gw_moments(double budget, std::uint64_t seed) {
    const double eta = 0.1;
    const std::uint64_t horizon = 20;
    const std::uint64_t runs =
        std::max<std::uint64_t>(10000, static_cast<std::uint64_t>(1e5 * budget));
    const double mean_t = std::pow(1.0 + eta, static_cast<double>(horizon));
    const double var_t = mean_t * (mean_t - 1.0) / eta;

    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t at_least = 0;
    GWConfig cfg{eta, kNoCap, horizon, true};
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(seed, "gw-moments", i);
        GWTrace tr = gw_run(cfg, rng);
        const double n = static_cast<double>(tr.population.back());
        sum += n;
        sum_sq += n * n;
        if (tr.hit_target) ++at_least;
    }
    const double nr = static_cast<double>(runs);
    const double mean = sum / nr;
    const double var = sum_sq / nr - mean * mean;
    const double tail = static_cast<double>(at_least) / nr;

    const double mean_tol = 3.0 * std::sqrt(var_t / nr);
    const bool mean_ok = std::fabs(mean - mean_t) <= mean_tol;
    const bool var_ok = std::fabs(var - var_t) <= 0.05 * var_t;
    const double tail_bound = eta * std::exp(-2.0 * (1.0 + eta));
    const double tail_se = std::sqrt(tail * (1.0 - tail) / nr);
    const bool tail_ok = tail >= tail_bound - 3.0 * tail_se;

    return make_report("lemma7", mean_ok && var_ok && tail_ok, tail, tail_bound,
                       tail - tail_bound,
                       "population mean/variance vs closed forms and the tail bound eta e^{-2(1+eta)}",
                       {{"mean", mean},
                        {"mean_target", mean_t},
                        {"variance", var},
                        {"variance_target", var_t},
                        {"tail", tail},
                        {"runs", runs}});
}

// truncated survival bounds at eta = 0.1, K = 100, T = 734
LemmaReport check_truncated_survival(double budget, std::uint64_t seed) {
    const double eta = 0.1;
    const std::uint64_t cap = 100, horizon = 734;
    const std::uint64_t runs =
        std::max<std::uint64_t>(2000, static_cast<std::uint64_t>(1e4 * budget));
    SurvivalEstimate se = truncated_survival(eta, cap, horizon, runs, seed);

    const double lambda = solve_lambda(eta);
    const double residual = std::fabs(-std::expm1(-lambda) * (1.0 + eta) - lambda);
    const double lower = eta / 3.0;
    const bool lower_ok = se.frequency >= lower - 3.0 * se.stderr_;
    const double ext_bound = std::exp(-lambda) +
                             static_cast<double>(horizon) * std::exp(-lambda * static_cast<double>(cap));
    const bool upper_ok = 1.0 - se.frequency <= ext_bound + 3.0 * se.stderr_;
    const bool res_ok = residual < 1e-12;

    return make_report("lemma8", lower_ok && upper_ok && res_ok, se.frequency, lower,
                       se.frequency - lower,
                       "survival >= eta/3 and extinction <= e^{-lambda} + T e^{-lambda K}",
                       {{"survival", se.frequency},
                        {"stderr", se.stderr_},
                        {"lambda", lambda},
                        {"lambda_residual", residual},
                        {"extinction_bound", ext_bound},
                        {"runs", runs}});
}

// spatial branching walk landing event, plus nearer landing diagnostics
LemmaReport check_spatial_landing(double budget, std::uint64_t seed) {
    const double eta = 0.1, eps = 0.5, r = 1.0;
    const std::uint64_t target_survivors =
        std::max<std::uint64_t>(200, static_cast<std::uint64_t>(1e4 * budget));
    struct Row {
        double ratio;
        std::uint64_t survivors = 0;
        std::uint64_t hits = 0, hits_k1 = 0, hits_k2 = 0;
    };
    std::vector<Row> rows{{20.0}, {40.0}};
    for (Row& row : rows) {
        const double R = row.ratio * r;
        Annulus a(Norm::Round, r, eps);
        const std::uint64_t cap = static_cast<std::uint64_t>(
            std::floor(std::log(3.0 * R * R / (eta * r * r)) / eta));
        const std::uint64_t horizon = static_cast<std::uint64_t>(row.ratio * row.ratio);
        const std::uint64_t max_attempts = target_survivors * 50;
        std::uint64_t attempt = 0;
        char label[48];
        std::snprintf(label, sizeof label, "landing-%d", static_cast<int>(row.ratio));
        while (row.survivors < target_survivors && attempt < max_attempts) {
            RngStream rng(seed, label, attempt++);
            SpatialRunResult res = spatial_branching_run(a, eta, cap, horizon, {0.0, 0.0}, R, rng);
            if (!res.survived) continue;
            ++row.survivors;
            if (res.event_hit) ++row.hits;
            if (res.ancestors_safe) {
                const Vec2 p = res.sampled_node;
                if (std::fabs(p.x) <= R && p.y >= 0.0 && p.y <= 2.0 * R) ++row.hits_k1;
                if (std::fabs(p.x) <= R && p.y >= R && p.y <= 3.0 * R) ++row.hits_k2;
            }
        }
    }
    auto frac = [](std::uint64_t h, std::uint64_t n) {
        return n ? static_cast<double>(h) / static_cast<double>(n) : 0.0;
    };
    auto sig = [&](std::uint64_t h, std::uint64_t n) {
        double p = frac(h, n);
        return n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
    };
    const double p1 = frac(rows[0].hits, rows[0].survivors);
    const double p2 = frac(rows[1].hits, rows[1].survivors);
    const double sigma = std::sqrt(sig(rows[0].hits, rows[0].survivors) *
                                       sig(rows[0].hits, rows[0].survivors) +
                                   sig(rows[1].hits, rows[1].survivors) *
                                       sig(rows[1].hits, rows[1].survivors));
    const bool positive = p1 > 0.0 && p2 > 0.0;
    const bool agree = std::fabs(p1 - p2) <= 2.0 * sigma;

    json extra;
    extra["runs"] = json::array();
    for (const Row& row : rows) {
        extra["runs"].push_back({{"R_over_r", row.ratio},
                                 {"survivors", row.survivors},
                                 {"landing_hits", row.hits},
                                 {"landing_fraction", frac(row.hits, row.survivors)},
                                 {"near_landing_1R", frac(row.hits_k1, row.survivors)},
                                 {"near_landing_2R", frac(row.hits_k2, row.survivors)}});
    }
    extra["note"] =
        "the near_landing diagnostics land the sampled node 1R/2R up instead of 6R; "
        "they carry the scale-invariance evidence at measurable probability";
    return make_report("lemma9", positive && agree, p1, 0.0, p1,
                       "landing event frequency conditioned on survival, R/r = 20 vs 40", extra);
}

// round sup-scaled overlap bounded; square grows like eps^{-1/2}
LemmaReport check_overlap_upper_bounds(double budget, std::uint64_t) {
    const int grid = std::max(256, static_cast<int>(4096 * std::min(1.0, budget)));
    json extra;
    bool round_ok = true;
    double round_max = 0.0;
    extra["round"] = json::array();
    for (double eps : {0.04, 0.01, 0.0025}) {
        Annulus a(Norm::Round, 1.0, eps);
        RatioExtremum s = sup_overlap_scaled(a, std::sqrt(eps), grid);
        round_max = std::max(round_max, s.ratio);
        round_ok = round_ok && s.ratio <= kRoundSupScaledBound;
        extra["round"].push_back({{"eps", eps}, {"sup_scaled", s.ratio}, {"at_d", s.d}});
    }
    // regression of log sup-ratio on log eps for the square annulus
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    extra["square"] = json::array();
    for (double eps : {0.04, 0.01, 0.0025}) {
        Annulus a(Norm::Square, 1.0, eps);
        RatioExtremum s = sup_overlap_scaled(a, std::sqrt(eps), grid);
        const double x = std::log(eps), y = std::log(s.ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
        extra["square"].push_back({{"eps", eps}, {"sup_scaled", s.ratio}, {"at_d", s.d}});
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const bool slope_ok = slope >= -0.6 && slope <= -0.4;
    extra["square_slope"] = slope;
    return make_report("lemma10", round_ok && slope_ok, round_max, kRoundSupScaledBound,
                       kRoundSupScaledBound - round_max,
                       "round sup overlap/(|A| sqrt eps) bounded; square slope in [-0.6, -0.4]",
                       extra);
}

// cluster overlap of separated annuli stays below c2 k |A| sqrt(eps)
LemmaReport check_cluster_overlap(double budget, std::uint64_t seed) {
    const double eps = 0.05, r = 1.0;
    const std::size_t k = 10;
    const int configs = 100;
    const std::uint64_t samples =
        std::max<std::uint64_t>(20000, static_cast<std::uint64_t>(1e6 * budget));
    Annulus a(Norm::Round, r, eps);
    const double sep = r * std::sqrt(eps);
    const double bound = kClusterOverlapFactor * static_cast<double>(k) * a.area() *
                         std::sqrt(eps);
    bool pass = true;
    double worst = 0.0;
    RngStream rng(seed, "cluster-overlap");
    for (int c = 0; c < configs; ++c) {
        std::vector<Vec2> centers{{0.0, 0.0}};
        while (centers.size() < k) {
            Vec2 cand{rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2)};
            bool ok = true;
            for (const Vec2& z : centers)
                if (norm2(cand - z) < sep) {
                    ok = false;
                    break;
                }
            if (ok) centers.push_back(cand);
        }
        OverlapReport rep = cluster_overlap_area(a, centers, 0, samples, rng);
        worst = std::max(worst, rep.area);
        pass = pass && rep.area <= bound;
    }
    return make_report("lemma11", pass, worst, bound, bound - worst,
                       "largest cluster overlap over 100 admissible configurations vs the "
                       "frozen linear bound",
                       {{"configs", configs}, {"samples", samples}, {"k", k}, {"eps", eps}});
}

LemmaReport check_square_exact(double, std::uint64_t) {
    SquareCertificateExact c = square_annulus_exact_certificate();
    return make_report("thm5-rigorous", c.holds, static_cast<double>(c.lhs),
                       static_cast<double>(c.rhs), static_cast<double>(c.rhs - c.lhs),
                       "integer arithmetic: 1014^3 * 23 < 24 * 10^9",
                       {{"lhs", c.lhs}, {"rhs", c.rhs}});
}

// pair integral for the square annulus dominates |A|^3 / 24
LemmaReport check_square_pair_integral(double budget, std::uint64_t seed) {
    const std::uint64_t samples =
        std::max<std::uint64_t>(20000, static_cast<std::uint64_t>(2e5 * budget));
    bool pass = true;
    double worst_stat = 0.0, worst_bound = 0.0, worst_margin = 1e300;
    json rows = json::array();
    for (double eps : {0.1, 0.3}) {
        Annulus a(Norm::Square, 1.0, eps);
        RngStream rng(seed, "square-pair-integral", static_cast<std::uint64_t>(eps * 1000));
        McEstimate est = pair_overlap_integral_mc(a, samples, rng);
        const double area = a.area();
        const double bound = area * area * area / 24.0;
        const double margin = est.value + 3.0 * est.stderr_ - bound;
        pass = pass && margin >= 0.0;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_stat = est.value;
            worst_bound = bound;
        }
        rows.push_back({{"eps", eps}, {"integral", est.value}, {"stderr", est.stderr_},
                        {"bound", bound}});
    }
    return make_report("thm5-mc", pass, worst_stat, worst_bound, worst_margin,
                       "square-annulus pair overlap integral vs |A|^3/24 with 3 sigma slack",
                       {{"cases", rows}});
}

// cap/horizon bookkeeping identity e^{eta K} eta / 3 = (R/r)^2
LemmaReport check_cap_consistency(double, std::uint64_t seed) {
    RngStream rng(seed, "cap-consistency");
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double eta = rng.uniform(0.02, 1.0);
        const double ratio = std::floor(rng.uniform(3.0, 80.0));
        ParamOverrides ov;
        ov.R_over_r = ratio;
        RenormParams p = derive_params(eta, 1.0, 0.1, ov);
        worst = std::max(worst, p.cap_consistency_residual);
        pass = pass && p.cap_consistency_residual < 1e-9;
    }
    // worked example: c0 = 0.1, eta = 0.1 forces n = 276310 and R/r >= 257
    const double n_min = min_relay_count(0.1, 0.1);
    const double rr_min = min_scale_ratio(n_min, 0.1);
    const bool example_ok =
        static_cast<long long>(n_min) == 276310 && static_cast<int>(std::ceil(rr_min)) == 257;
    return make_report("eq1-consistency", pass && example_ok, worst, 1e-9, 1e-9 - worst,
                       "cap/horizon identity residual over 20 random parameter draws, plus "
                       "the budget worked example",
                       {{"n_min", n_min}, {"rr_min", rr_min}});
}

using CheckFn = LemmaReport (*)(double, std::uint64_t);

const std::map<std::string, CheckFn>& check_table() {
    static const std::map<std::string, CheckFn> table{
        {"lemma2", check_min_overlap_bound},
        {"lemma3", check_subcritical_certificate},
        {"lemma4", check_interval_identity},
        {"lemma7", check_gw_moments},
        {"lemma8", check_truncated_survival},
        {"lemma9", check_spatial_landing},
        {"lemma10", check_overlap_upper_bounds},
        {"lemma11", check_cluster_overlap},
        {"thm5-rigorous", check_square_exact},
        {"thm5-mc", check_square_pair_integral},
        {"eq1-consistency", check_cap_consistency},
    };
    return table;
}

}  // namespace

LemmaReport lemma_check(std::string_view id, double budget, std::uint64_t seed) {
    auto it = check_table().find(std::string(id));
    if (it == check_table().end())
        throw std::invalid_argument("lemma_check: unknown id '" + std::string(id) + "'");
    return it->second(budget, seed);
}

std::vector<std::string> lemma_check_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, fn] : check_table()) ids.push_back(id);
    return ids;
}

}  // namespace annuperc
