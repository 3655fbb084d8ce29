#include "annuperc/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace annuperc {

namespace {

double norm_of(const Annulus& a, Vec2 v) {
    return a.norm == Norm::Round ? norm2(v) : norm_inf(v);
}

}  // namespace

std::uint64_t RenormParams::cap() const {
    const double k = std::floor(K);
    return k < 1.0 ? 0 : static_cast<std::uint64_t>(k);
}

std::uint64_t RenormParams::horizon() const {
    return static_cast<std::uint64_t>(std::llround(T));
}

std::uint64_t RenormParams::growth_steps() const {
    const double s = std::floor(R / r);
    return s < 1.0 ? 1 : static_cast<std::uint64_t>(s);
}

double RenormParams::separation() const { return r * std::sqrt(eps); }

RenormParams derive_params(double eta, double r, double eps, const ParamOverrides& o) {
    if (!(eta > 0.0)) throw std::invalid_argument("derive_params: eta must be positive");
    if (!(r > 0.0)) throw std::invalid_argument("derive_params: r must be positive");
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("derive_params: eps in (0, 1]");

    RenormParams p;
    p.eta = eta;
    p.r = r;
    p.eps = eps;
    p.c0 = o.c0.value_or(1.0);
    p.c2 = o.c2.value_or(1.0);
    p.c3 = o.c3.value_or(1.0);
    p.c4 = o.c4.value_or(1.0);

    const double ratio =
        o.R_over_r.value_or(std::max(1.0, std::ceil(p.c4 * std::fabs(std::log(eta)) / eta)));
    p.R = ratio * r;
    p.n = o.n.value_or(static_cast<std::uint64_t>(std::max(1.0, std::ceil(p.c3 / (eta * eta)))));
    if (p.n == 0) throw std::invalid_argument("derive_params: n must be positive");

    p.K = o.K.value_or(std::log(3.0 * p.R * p.R / (eta * r * r)) / eta);
    p.T = ratio * ratio;
    p.N = static_cast<double>(p.n) * std::max(0.0, p.K) * p.T +
          static_cast<double>(p.n) * ratio;

    p.cap_consistency_residual =
        std::fabs(std::exp(eta * p.K) * eta / 3.0 - p.T) / p.T;

    const double root_eps = std::sqrt(eps);
    const double nd = static_cast<double>(p.n);
    const double phase1_budget = 3.0 * p.N + nd + nd * std::max(0.0, p.K) * p.T;
    p.phase1_interference_ok = p.T * p.c2 * phase1_budget * root_eps <= p.c0 / 2.0;
    p.growth_interference_ok = p.c2 * (phase1_budget + nd * ratio) * root_eps <= eta / 2.0;
    p.growth_reach_ok = nd <= std::pow(1.0 + eta / 2.0, ratio);
    p.success_margin_ok = p.c0 * nd * eta * eta / 120.0 >= std::log(10.0);
    return p;
}

double min_relay_count(double c0, double eta) {
    if (!(c0 > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("min_relay_count: positive c0 and eta required");
    return 120.0 * std::log(10.0) / (c0 * eta * eta);
}

double min_scale_ratio(double n, double eta) {
    if (!(n > 1.0) || !(eta > 0.0))
        throw std::invalid_argument("min_scale_ratio: need n > 1 and eta > 0");
    return std::log(n) / std::log(1.0 + eta / 2.0);
}

Rect site_box(Site s, double R) {
    return {6.0 * R * s.x - 3.0 * R, 6.0 * R * s.y - 3.0 * R,
            6.0 * R * s.x + 3.0 * R, 6.0 * R * s.y + 3.0 * R};
}

Rect site_core(Site s, double R) {
    return {6.0 * R * s.x - 2.0 * R, 6.0 * R * s.y - 2.0 * R,
            6.0 * R * s.x + 2.0 * R, 6.0 * R * s.y + 2.0 * R};
}

Rect site_center(Site s, double R) {
    return {6.0 * R * s.x - R, 6.0 * R * s.y - R, 6.0 * R * s.x + R, 6.0 * R * s.y + R};
}

std::vector<OrientedBond> bond_order(int depth) {
    if (depth < 0) throw std::invalid_argument("bond_order: depth must be nonnegative");
    std::vector<OrientedBond> bonds;
    std::uint64_t idx = 0;
    for (int k = 0; k < depth; ++k) {
        for (int i = 0; i <= k; ++i) {
            Site s{i, k - i};
            bonds.push_back({s, {i, k - i + 1}, true, k, idx++});
            bonds.push_back({s, {i + 1, k - i}, false, k, idx++});
        }
    }
    return bonds;
}

namespace {

// shared candidate bookkeeping for the two exploration phases
struct BondWorkspace {
    const PointField* field;
    Annulus annulus;
    Rect shrunk;             // bond rectangle pulled in by r; doubles as the safe strip
    TestedRegion q_region;   // annuli + balls around Q
    TestedRegion work;       // annuli + balls around P and committed points
    std::vector<char> consumed;
    std::vector<Vec2> encountered;  // committed points in order
    std::uint64_t examined = 0;

    BondWorkspace(const PointField& f, const Annulus& a, const Rect& shrunk_rect,
                  double separation)
        : field(&f), annulus(a), shrunk(shrunk_rect),
          q_region(a, separation), work(a, separation),
          consumed(f.size(), 0) {}

    struct Candidate {
        std::uint32_t idx;
        Vec2 pos;
        Vec2 parent;
    };

    // admissibility for a child of `parent`; consumption rules keep the
    // outcome a function of the bond's dependence region only
    bool admit(std::uint32_t idx, Vec2 pos, Vec2 parent,
               const std::vector<Candidate>& pending) {
        ++examined;
        if (!shrunk.contains(pos)) return false;                      // stateless
        if (q_region.covered_by_annulus(pos, nullptr)) return false;  // stateless
        if (consumed[idx]) return false;
        if (q_region.covered_by_ball(pos)) {
            consumed[idx] = 1;
            return false;
        }
        if (work.covered_by_ball(pos)) {  // includes the parent's own ball
            consumed[idx] = 1;
            return false;
        }
        if (work.covered_by_annulus(pos, &parent)) {
            consumed[idx] = 1;
            return false;
        }
        for (const Candidate& s : pending) {
            Vec2 d = pos - s.pos;
            double dist = norm_of(annulus, d);
            if (dist <= work.ball_radius() || annulus.contains(d)) {
                consumed[idx] = 1;
                return false;
            }
        }
        consumed[idx] = 1;
        return true;
    }

    void commit(Vec2 pos) {
        work.add(pos);
        encountered.push_back(pos);
    }

    // neighbors of `center` sorted by coordinates: candidate order must not
    // depend on point indices, or replay on a filtered field would diverge
    void sorted_neighbors(Vec2 center, std::vector<std::uint32_t>& buf,
                          std::vector<Candidate>& out) {
        field->annulus_neighbors(center, annulus, buf);
        out.clear();
        for (std::uint32_t i : buf) out.push_back({i, field->point(i), center});
        std::sort(out.begin(), out.end(),
                  [](const Candidate& a, const Candidate& b) { return lex_less(a.pos, b.pos); });
    }
};

}  // namespace

std::vector<Vec2> pick_relays(const PointField& field, Site s, const RenormParams& params) {
    const Annulus annulus(Norm::Round, params.r, params.eps);
    const Rect core = site_core(s, params.R);
    const Vec2 center{0.5 * (core.x0 + core.x1), 0.5 * (core.y0 + core.y1)};
    std::vector<Vec2> in_core;
    for (const Vec2& p : field.points())
        if (core.contains(p)) in_core.push_back(p);
    std::sort(in_core.begin(), in_core.end(), [&](Vec2 a, Vec2 b) {
        const double da = norm2_sq(a - center), db = norm2_sq(b - center);
        return da != db ? da < db : lex_less(a, b);
    });
    std::vector<Vec2> chosen;
    const double sep = params.separation();
    for (const Vec2& p : in_core) {
        bool ok = true;
        for (const Vec2& c : chosen)
            if (norm_of(annulus, p - c) < sep) {
                ok = false;
                break;
            }
        if (ok) {
            chosen.push_back(p);
            if (chosen.size() == params.n) break;
        }
    }
    return chosen;
}

BondOutcome bond_explore(const PointField& field, Site from, Site to,
                         std::span<const Vec2> P, std::span<const Vec2> Q,
                         const RenormParams& params, RngStream& rng) {
    const int dx = to.x - from.x, dy = to.y - from.y;
    if (!((dx == 1 && dy == 0) || (dx == 0 && dy == 1)))
        throw std::invalid_argument("bond_explore: bond must step right or up");

    const Annulus annulus(Norm::Round, params.r, params.eps);
    const double sep = params.separation();
    const Rect rect = Rect::hull(site_box(from, params.R), site_box(to, params.R));
    const Rect core_from = site_core(from, params.R);
    const Rect landing = site_center(to, params.R);

    for (const Vec2& p : P)
        if (!core_from.contains(p))
            throw std::invalid_argument("bond_explore: P must lie in the source core square");
    {
        std::vector<Vec2> all(P.begin(), P.end());
        all.insert(all.end(), Q.begin(), Q.end());
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                if (norm_of(annulus, all[i] - all[j]) < sep)
                    throw std::invalid_argument(
                        "bond_explore: P and Q violate the separation precondition");
    }

    BondWorkspace ws(field, annulus, rect.shrunk(params.r), sep);
    for (const Vec2& q : Q) ws.q_region.add(q);
    for (const Vec2& p : P) ws.work.add(p);

    BondOutcome out;
    const std::uint64_t cap = params.cap();
    const std::uint64_t horizon = params.horizon();

    // phase 1: truncated branching exploration from each relay point; success
    // is a committed point inside the landing square (the shrunk rectangle
    // already enforces the safe strip for the whole ancestor path)
    std::vector<Vec2> seeds;
    std::vector<std::uint32_t> buf;
    std::vector<BondWorkspace::Candidate> cands;
    const std::span<const Vec2> roots = cap == 0 ? std::span<const Vec2>{} : P;
    for (const Vec2& root : roots) {
        std::vector<Vec2> frontier{root};
        std::vector<BondWorkspace::Candidate> pending;
        bool found = false;
        for (std::uint64_t t = 0; t < horizon && !frontier.empty() && !found; ++t) {
            pending.clear();
            for (const Vec2& v : frontier) {
                ws.sorted_neighbors(v, buf, cands);
                for (const auto& c : cands)
                    if (ws.admit(c.idx, c.pos, v, pending)) pending.push_back(c);
            }
            if (pending.size() > cap) {
                rng.partial_shuffle(pending, cap);
                pending.resize(cap);
            }
            frontier.clear();
            for (const auto& node : pending) {
                ws.commit(node.pos);
                if (landing.contains(node.pos)) {
                    seeds.push_back(node.pos);
                    found = true;
                    break;  // this relay's exploration stops at its first success
                }
                frontier.push_back(node.pos);
            }
        }
    }
    out.seeds_found = static_cast<std::uint32_t>(seeds.size());

    // phase 2: grow the seed layer by annulus steps, stopping the moment a
    // layer holds n points; that layer becomes P'
    std::vector<Vec2> layer = seeds;
    const std::uint64_t want = params.n;
    if (!layer.empty() && layer.size() < want) {
        std::vector<BondWorkspace::Candidate> none;
        const std::uint64_t steps = params.growth_steps();
        for (std::uint64_t s = 0; s < steps; ++s) {
            std::vector<Vec2> next;
            bool full = false;
            for (const Vec2& v : layer) {
                ws.sorted_neighbors(v, buf, cands);
                for (const auto& c : cands) {
                    if (!ws.admit(c.idx, c.pos, v, none)) continue;
                    ws.commit(c.pos);
                    next.push_back(c.pos);
                    if (next.size() >= want) {
                        full = true;
                        break;
                    }
                }
                if (full) break;
            }
            ++out.growth_steps_used;
            if (next.empty()) {
                layer.clear();
                break;
            }
            layer = std::move(next);
            if (full) break;
        }
    }

    // P' is the final layer when it reaches n points (lexicographic choice if
    // it ever exceeded n; with the early stop it cannot)
    if (!layer.empty() && layer.size() >= want) {
        std::sort(layer.begin(), layer.end(), lex_less);
        out.p_prime.assign(layer.begin(), layer.begin() + static_cast<std::ptrdiff_t>(want));
        out.open = true;
    }

    // Q' = everything committed except the final layer
    std::vector<Vec2> last_sorted = layer;
    std::sort(last_sorted.begin(), last_sorted.end(), lex_less);
    auto in_last = [&](Vec2 p) {
        auto it = std::lower_bound(last_sorted.begin(), last_sorted.end(), p, lex_less);
        return it != last_sorted.end() && *it == p;
    };
    for (const Vec2& p : ws.encountered)
        if (!in_last(p)) out.q_prime.push_back(p);

    out.points_examined = ws.examined;
    return out;
}

ConditionReport verify_bond(const BondOutcome& out, Site from, Site to,
                            std::span<const Vec2> P, std::span<const Vec2> Q,
                            const RenormParams& params) {
    ConditionReport rep;
    if (out.trivially_open) {  // nothing was tested, nothing to violate
        rep.a = rep.b = rep.c = rep.d = rep.e = true;
        rep.detail = "not explored";
        return rep;
    }
    char msg[160];
    const Annulus annulus(Norm::Round, params.r, params.eps);
    const double sep = params.separation();
    const Rect rect = Rect::hull(site_box(from, params.R), site_box(to, params.R));
    const Rect shrunk = rect.shrunk(params.r);
    const Rect core_to = site_core(to, params.R);

    // (a) P' inside the target core, at most n points, open iff exactly n
    rep.a = out.p_prime.size() <= params.n &&
            (out.open == (out.p_prime.size() == params.n && params.n > 0));
    for (const Vec2& p : out.p_prime)
        if (!core_to.contains(p)) rep.a = false;

    // (b) Q' inside the rectangle, r away from its boundary, within budget
    rep.b = static_cast<double>(out.q_prime.size()) <= params.N;
    for (const Vec2& q : out.q_prime)
        if (!shrunk.contains(q)) rep.b = false;

    // (c) pairwise separation across P, Q, P', Q'
    std::vector<Vec2> all(P.begin(), P.end());
    all.insert(all.end(), Q.begin(), Q.end());
    all.insert(all.end(), out.p_prime.begin(), out.p_prime.end());
    all.insert(all.end(), out.q_prime.begin(), out.q_prime.end());
    rep.c = true;
    for (std::size_t i = 0; i < all.size() && rep.c; ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[i] == all[j] || norm_of(annulus, all[i] - all[j]) < sep) {
                rep.c = false;
                std::snprintf(msg, sizeof msg, "separation violated between #%zu and #%zu; ", i, j);
                rep.detail += msg;
                break;
            }
        }

    // (d) new points avoid every annulus around Q
    rep.d = true;
    for (const Vec2& q : Q) {
        for (const Vec2& p : out.p_prime)
            if (annulus.contains(p - q)) rep.d = false;
        for (const Vec2& p : out.q_prime)
            if (annulus.contains(p - q)) rep.d = false;
    }

    // (e) every P' point reachable from P through Q' by annulus steps
    {
        std::vector<Vec2> nodes(P.begin(), P.end());
        nodes.insert(nodes.end(), out.q_prime.begin(), out.q_prime.end());
        std::vector<char> seen(nodes.size(), 0);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < P.size(); ++i) {
            seen[i] = 1;
            stack.push_back(i);
        }
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < nodes.size(); ++w)
                if (!seen[w] && annulus.contains(nodes[w] - nodes[v])) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        rep.e = true;
        for (const Vec2& p : out.p_prime) {
            bool linked = false;
            for (std::size_t v = 0; v < nodes.size() && !linked; ++v)
                if (seen[v] && annulus.contains(p - nodes[v])) linked = true;
            if (!linked) {
                rep.e = false;
                rep.detail += "a P' point is not linked back to P; ";
                break;
            }
        }
    }

    if (!rep.a) rep.detail += "condition (a) failed; ";
    if (!rep.b) rep.detail += "condition (b) failed; ";
    if (!rep.d) rep.detail += "condition (d) failed; ";
    return rep;
}

std::vector<Vec2> bond_relevant_points(const PointField& field, Site from, Site to,
                                       std::span<const Vec2> P, std::span<const Vec2> Q,
                                       const BondOutcome& out, const RenormParams& params) {
    const Annulus annulus(Norm::Round, params.r, params.eps);
    const Rect rect = Rect::hull(site_box(from, params.R), site_box(to, params.R));
    TestedRegion masked(annulus, 0.0);
    for (const Vec2& q : Q) masked.add(q);

    std::vector<char> in_region(field.size(), 0);
    std::vector<std::uint32_t> nbrs;
    auto mark = [&](Vec2 z) {
        field.annulus_neighbors(z, annulus, nbrs);
        for (std::uint32_t i : nbrs) in_region[i] = 1;
    };
    for (const Vec2& z : P) mark(z);
    for (const Vec2& z : out.q_prime) mark(z);

    std::vector<Vec2> keep;
    for (std::uint32_t i = 0; i < field.size(); ++i) {
        if (!in_region[i]) continue;
        const Vec2 p = field.point(i);
        if (!rect.contains(p)) continue;
        if (masked.covered_by_annulus(p, nullptr)) continue;
        keep.push_back(p);
    }
    return keep;
}

Box lattice_field_box(int depth, double R) {
    const double lo = -3.0 * R;
    const double hi = 6.0 * R * (depth + 1) + 3.0 * R;
    return {{lo, lo}, hi - lo, hi - lo, Topology::Hard};
}

LatticeTrace lattice_run(const PointField& field, int depth, const RenormParams& params,
                         std::uint64_t master_seed) {
    LatticeTrace trace;

    // initial relay set: center-proximate greedy choice so the upward and
    // rightward bonds start from symmetric footing
    {
        std::vector<Vec2> chosen = pick_relays(field, {0, 0}, params);
        if (chosen.size() < params.n) {
            trace.init_ok = false;
            trace.init_error = "initial relay set: not enough separated points in the origin core";
            return trace;
        }
        trace.init_ok = true;
        trace.p_sets[{0, 0}] = std::move(chosen);
    }
    trace.reached.insert({0, 0});

    for (const OrientedBond& bond : bond_order(depth)) {
        LatticeRecord rec;
        rec.bond = bond;
        const bool from_reached = trace.reached.count(bond.from) > 0;
        if (!from_reached) {
            // no directed open path to the source: open by fiat, nothing tested
            rec.rule = 'a';
            rec.open = true;
        } else {
            rec.rule = 'b';
            const Rect rect = Rect::hull(site_box(bond.from, params.R), site_box(bond.to, params.R));
            std::vector<Vec2> q_local;
            for (const Vec2& q : trace.q_cumulative)
                if (rect.contains(q)) q_local.push_back(q);
            rec.q_in_rect = static_cast<std::uint32_t>(q_local.size());
            rec.budget_ok = static_cast<double>(q_local.size()) <= 3.0 * params.N;

            RngStream rng(master_seed, "bond", bond.order_index);
            const std::vector<Vec2>& pset = trace.p_sets.at(bond.from);
            BondOutcome out = bond_explore(field, bond.from, bond.to, pset, q_local, params, rng);
            rec.open = out.open;
            rec.p_prime_size = static_cast<std::uint32_t>(out.p_prime.size());
            rec.q_prime_size = static_cast<std::uint32_t>(out.q_prime.size());
            trace.q_cumulative.insert(trace.q_cumulative.end(), out.q_prime.begin(),
                                      out.q_prime.end());
            if (out.open) {
                trace.reached.insert(bond.to);
                if (!trace.p_sets.count(bond.to)) trace.p_sets[bond.to] = out.p_prime;
            }
        }
        trace.records.push_back(rec);
    }
    return trace;
}

SurvivalFrequency oriented_bond_percolation(double p, int depth, std::uint64_t trials,
                                            std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("oriented_bond_percolation: p in [0,1]");
    if (depth < 1) throw std::invalid_argument("oriented_bond_percolation: depth >= 1");
    if (trials == 0) throw std::invalid_argument("oriented_bond_percolation: need trials");

    std::uint64_t survived = 0;
    std::vector<char> level, next;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(seed, "oriented", t);
        level.assign(1, 1);  // site (0,0)
        for (int k = 0; k < depth && !level.empty(); ++k) {
            next.assign(static_cast<std::size_t>(k) + 2, 0);
            bool any = false;
            for (std::size_t i = 0; i < level.size(); ++i) {
                if (!level[i]) continue;
                // site (i, k - i): up keeps index i, right moves to i + 1
                if (rng.uniform01() < p) {
                    next[i] = 1;
                    any = true;
                }
                if (rng.uniform01() < p) {
                    next[i + 1] = 1;
                    any = true;
                }
            }
            if (!any) next.clear();
            level.swap(next);
        }
        if (!level.empty()) ++survived;
    }
    const double f = static_cast<double>(survived) / static_cast<double>(trials);
    return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(trials)), trials};
}

}  // namespace annuperc
