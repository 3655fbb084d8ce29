#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annuperc/graph.hpp"
#include "annuperc/renorm.hpp"

namespace annuperc {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// 95% Wilson score interval for a binomial frequency.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct CrossingEstimate {
    double frequency = 0.0;
    WilsonInterval ci;
    std::uint64_t trials = 0;
};

/// Fraction of independent unit-intensity fields in an L x L hard box whose
/// annulus graph has a left-right crossing (components touching both sides
/// within edge margin r). Requires L >= 10 r. Trials run in parallel; each
/// derives its stream from (seed, label, trial index), so the result does not
/// depend on scheduling.
CrossingEstimate crossing_probability(const Annulus& a, double L, std::uint64_t trials,
                                      std::uint64_t seed, std::string_view label,
                                      int threads = 0);

struct ProbePoint {
    double area = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double frequency = 0.0;
};

struct ThresholdEstimate {
    double eps = 0.0;
    Norm norm = Norm::Round;
    double L_over_r = 0.0;
    std::uint64_t trials_per_probe = 0;
    double nc_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap percentile interval
    std::vector<ProbePoint> probes;
};

/// Outer radius giving area `a` for the chosen norm at thinness eps.
double radius_for_area(Norm norm, double eps, double area);

/// Bisection on |A| for the area whose crossing frequency is 1/2 at fixed
/// L/r, to tolerance tol; bootstrap CI from the probe-level binomials.
/// The bracket must straddle frequency 1/2 (auto_expand widens it if not).
ThresholdEstimate estimate_nc(double eps, Norm norm, double L_over_r, std::uint64_t trials,
                              double bracket_lo, double bracket_hi, double tol,
                              std::uint64_t seed, int threads = 0, bool auto_expand = true);

/// Pool-adjacent-violators isotonic regression (nondecreasing fit).
std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w);

struct LemmaReport {
    std::string id;
    bool pass = false;
    double statistic = 0.0;  // measured quantity (meaning depends on the check)
    double bound = 0.0;      // the bound it is compared against
    double slack = 0.0;      // margin in the passing direction
    std::string detail;
    std::string json;        // machine-readable record of the same content
};

/// Known check ids: lemma2 lemma3 lemma4 lemma7 lemma8 lemma9 lemma10 lemma11
/// thm5-rigorous thm5-mc eq1-consistency. Budget scales the sample counts
/// (1.0 = the full published budgets). Throws on an unknown id.
LemmaReport lemma_check(std::string_view id, double budget, std::uint64_t seed);

std::vector<std::string> lemma_check_ids();

/// One CSV row per simulated field:
/// seed,area,eps,norm,L_over_r,n_points,largest_fraction,crossing_lr,mean_degree
struct SimRow {
    std::uint64_t seed = 0;
    double area = 0.0;
    double eps = 0.0;
    Norm norm = Norm::Round;
    double L_over_r = 0.0;
    std::uint64_t n_points = 0;
    double largest_fraction = 0.0;
    bool crossing_lr = false;
    double mean_degree = 0.0;
};

void write_sim_csv_header(std::ostream& os);
void write_sim_csv_row(std::ostream& os, const SimRow& row);

SimRow simulate_one(const Annulus& a, double L_over_r, std::uint64_t seed);

/// Threshold estimate serialization (summary JSON and probe-curve CSV).
std::string threshold_to_json(const ThresholdEstimate& t);
void write_probe_csv(std::ostream& os, const ThresholdEstimate& t);

/// Lattice trace as JSON lines, one bond per line.
void write_lattice_jsonl(std::ostream& os, const LatticeTrace& trace, const RenormParams& p);

/// Fully-determining experiment configuration mirrored by the CLI flags.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::uint64_t trials = 200;
    std::string mode = "simulate";  // simulate | nc-sweep | lemma-check | branching | renorm
    std::vector<double> eps_list{1.0};
    Norm norm = Norm::Round;
    double L_over_r = 60.0;
    double area = 4.5;
    std::string out_dir = ".";
    int threads = 0;

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
};

/// Deterministic parallel map: results indexed by trial, reduced in order.
void parallel_for_trials(std::uint64_t count, int threads,
                         const std::function<void(std::uint64_t)>& body);

}  // namespace annuperc
