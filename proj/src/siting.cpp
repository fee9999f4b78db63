#include "railcarb/siting.hpp"

#include "railcarb/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

namespace railcarb {

namespace {

struct Stop {
    double position;
    NodeIndex node;
};

std::vector<Stop> candidate_stops(const Path& path, const std::vector<bool>& candidate)
{
    std::vector<Stop> stops;
    for (std::size_t i = 0; i < path.nodes.size(); ++i)
        if (path.nodes[i] < candidate.size() && candidate[path.nodes[i]])
            stops.push_back({path.cumulative[i], path.nodes[i]});
    return stops;
}

} // namespace

SitingInstance SitingInstance::from_network(const RailNetwork& net, std::vector<Path> paths, double range_miles,
                                            bool require_endpoint_facilities)
{
    SitingInstance inst;
    inst.paths = std::move(paths);
    inst.range_miles = range_miles;
    inst.require_endpoint_facilities = require_endpoint_facilities;
    inst.candidate.resize(net.node_count());
    for (NodeIndex i = 0; i < net.node_count(); ++i) inst.candidate[i] = net.node(i).candidate;
    return inst;
}

bool coverage_predicate(const Path& path, const std::vector<bool>& open, double range_miles,
                        bool require_endpoint_facilities)
{
    auto is_open = [&](NodeIndex n) { return n < open.size() && open[n]; };
    std::vector<double> positions;
    for (std::size_t i = 0; i < path.nodes.size(); ++i)
        if (is_open(path.nodes[i])) positions.push_back(path.cumulative[i]);
    if (positions.empty()) return false;
    if (require_endpoint_facilities && !(is_open(path.origin()) && is_open(path.destination()))) return false;
    const double half = range_miles / 2.0;
    if (!miles_le(positions.front(), half)) return false;
    if (!miles_le(path.miles() - positions.back(), half)) return false;
    for (std::size_t i = 1; i < positions.size(); ++i)
        if (!miles_le(positions[i] - positions[i - 1], range_miles)) return false;
    return true;
}

bool coverage_predicate(const Path& path, const std::vector<NodeIndex>& open, double range_miles,
                        bool require_endpoint_facilities)
{
    NodeIndex top = 0;
    for (NodeIndex n : path.nodes) top = std::max(top, n);
    std::vector<bool> mask(static_cast<std::size_t>(top) + 1, false);
    for (NodeIndex n : open)
        if (n <= top) mask[n] = true;
    return coverage_predicate(path, mask, range_miles, require_endpoint_facilities);
}

namespace siting_detail {

// Each open facility at position p covers [p - range/2, p + range/2]. The
// predicate holds exactly when these intervals cover the whole path, so one
// clause per elementary segment between interval endpoints (plus the two
// path ends) encodes it.
ClauseSet build_clauses(const SitingInstance& inst)
{
    if (!(inst.range_miles > 0.0)) throw DataError("range must be positive");
    ClauseSet out;
    const double half = inst.range_miles / 2.0;
    std::set<std::vector<NodeIndex>> unique;
    for (std::size_t pi = 0; pi < inst.paths.size(); ++pi) {
        const Path& path = inst.paths[pi];
        const double length = path.miles();
        auto stops = candidate_stops(path, inst.candidate);
        auto covering = [&](double x) {
            std::vector<NodeIndex> c;
            for (const auto& s : stops)
                if (miles_le(std::abs(s.position - x), half)) c.push_back(s.node);
            std::sort(c.begin(), c.end());
            return c;
        };
        std::vector<std::vector<NodeIndex>> local;
        if (inst.require_endpoint_facilities) {
            for (NodeIndex end : {path.origin(), path.destination()}) {
                if (end < inst.candidate.size() && inst.candidate[end]) local.push_back({end});
                else local.emplace_back();
            }
        }
        std::vector<double> breaks{0.0, length};
        for (const auto& s : stops)
            for (double b : {s.position - half, s.position + half})
                if (b > 0.0 && b < length) breaks.push_back(b);
        std::sort(breaks.begin(), breaks.end());
        local.push_back(covering(0.0));
        local.push_back(covering(length));
        const double tiny = 1e-9 * std::max(1.0, length);
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            if (breaks[i + 1] - breaks[i] > tiny) local.push_back(covering(0.5 * (breaks[i] + breaks[i + 1])));

        bool bad = false;
        for (auto& c : local) {
            if (c.empty()) bad = true;
            else unique.insert(std::move(c));
        }
        if (bad) out.infeasible.push_back(pi);
    }
    out.clauses.assign(unique.begin(), unique.end());
    return out;
}

} // namespace siting_detail

namespace {

using siting_detail::ClauseSet;

// Clauses re-expressed over local element indices 0..m-1 in ascending node order.
struct Universe {
    std::vector<NodeIndex> elements;
    std::vector<std::vector<std::uint32_t>> clauses;
};

Universe make_universe(const ClauseSet& cs, bool drop_dominated)
{
    std::vector<std::vector<NodeIndex>> source = cs.clauses;
    if (drop_dominated) {
        // A clause containing another clause is implied by it.
        std::stable_sort(source.begin(), source.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
        std::vector<std::vector<NodeIndex>> kept;
        for (auto& c : source) {
            bool dominated = false;
            for (const auto& k : kept)
                if (std::includes(c.begin(), c.end(), k.begin(), k.end())) {
                    dominated = true;
                    break;
                }
            if (!dominated) kept.push_back(std::move(c));
        }
        source = std::move(kept);
    }
    Universe u;
    std::set<NodeIndex> elems;
    for (const auto& c : source) elems.insert(c.begin(), c.end());
    u.elements.assign(elems.begin(), elems.end());
    for (const auto& c : source) {
        std::vector<std::uint32_t> lc;
        for (NodeIndex n : c)
            lc.push_back(static_cast<std::uint32_t>(std::lower_bound(u.elements.begin(), u.elements.end(), n) -
                                                    u.elements.begin()));
        u.clauses.push_back(std::move(lc));
    }
    return u;
}

std::vector<NodeIndex> exhaustive_cover(const Universe& u)
{
    const std::size_t m = u.elements.size();
    std::vector<std::uint64_t> masks;
    for (const auto& c : u.clauses) {
        std::uint64_t bits = 0;
        for (auto e : c) bits |= std::uint64_t{1} << e;
        masks.push_back(bits);
    }
    auto covers = [&](std::uint64_t set) {
        return std::all_of(masks.begin(), masks.end(), [set](std::uint64_t c) { return (c & set) != 0; });
    };
    if (covers(0)) return {};
    for (std::size_t k = 1; k <= m; ++k) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::uint64_t set = 0;
            for (auto i : idx) set |= std::uint64_t{1} << i;
            if (covers(set)) {
                std::vector<NodeIndex> out;
                for (auto i : idx) out.push_back(u.elements[i]);
                return out;
            }
            // next combination in lexicographic order
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    throw Error("siting: no cover found for a feasible instance");
}

// Depth-first search deciding elements in ascending order, include before
// exclude, so the first cover found at a fixed size is the lexicographically
// smallest one of that size.
class BranchAndBound {
public:
    BranchAndBound(const Universe& u, std::size_t node_budget) : u_(u), budget_nodes_(node_budget)
    {
        const std::size_t m = u.elements.size();
        clauses_of_.resize(m);
        for (std::size_t c = 0; c < u.clauses.size(); ++c) {
            for (auto e : u.clauses[c]) clauses_of_[e].push_back(static_cast<std::uint32_t>(c));
            max_elem_.push_back(u.clauses[c].back());
        }
        cover_count_.assign(u.clauses.size(), 0);
    }

    // Lower bound from clauses that pairwise share no element.
    std::size_t disjoint_bound(std::uint32_t next) const
    {
        std::vector<bool> used(u_.elements.size(), false);
        std::size_t count = 0;
        for (std::size_t c = 0; c < u_.clauses.size(); ++c) {
            if (cover_count_[c] > 0) continue;
            bool clash = false;
            for (auto e : u_.clauses[c])
                if (e >= next && used[e]) {
                    clash = true;
                    break;
                }
            if (clash) continue;
            for (auto e : u_.clauses[c])
                if (e >= next) used[e] = true;
            ++count;
        }
        return count;
    }

    std::optional<std::vector<NodeIndex>> search(std::size_t size)
    {
        chosen_.clear();
        uncovered_ = u_.clauses.size();
        std::fill(cover_count_.begin(), cover_count_.end(), 0);
        if (dfs(0, size)) {
            std::vector<NodeIndex> out;
            for (auto e : chosen_) out.push_back(u_.elements[e]);
            return out;
        }
        return std::nullopt;
    }

private:
    bool dfs(std::uint32_t next, std::size_t budget)
    {
        if (uncovered_ == 0) return true;
        if (budget == 0) return false;
        if (++nodes_ > budget_nodes_) throw Error("siting: branch-and-bound node budget exhausted");
        for (std::size_t c = 0; c < u_.clauses.size(); ++c)
            if (cover_count_[c] == 0 && max_elem_[c] < next) return false;
        if (disjoint_bound(next) > budget) return false;

        // Skip elements that satisfy nothing new; a minimum cover never needs them.
        std::uint32_t e = next;
        const auto m = static_cast<std::uint32_t>(u_.elements.size());
        while (e < m && std::none_of(clauses_of_[e].begin(), clauses_of_[e].end(),
                                     [&](std::uint32_t c) { return cover_count_[c] == 0; }))
            ++e;
        if (e >= m) return false;

        for (auto c : clauses_of_[e])
            if (cover_count_[c]++ == 0) --uncovered_;
        chosen_.push_back(e);
        if (dfs(e + 1, budget - 1)) return true;
        chosen_.pop_back();
        for (auto c : clauses_of_[e])
            if (--cover_count_[c] == 0) ++uncovered_;
        return dfs(e + 1, budget);
    }

    const Universe& u_;
    std::size_t budget_nodes_;
    std::size_t nodes_ = 0;
    std::vector<std::vector<std::uint32_t>> clauses_of_;
    std::vector<std::uint32_t> max_elem_;
    std::vector<std::uint32_t> cover_count_;
    std::size_t uncovered_ = 0;
    std::vector<std::uint32_t> chosen_;
};

std::vector<NodeIndex> greedy_cover(const Universe& u)
{
    const std::size_t m = u.elements.size();
    std::vector<std::vector<std::uint32_t>> clauses_of(m);
    for (std::size_t c = 0; c < u.clauses.size(); ++c)
        for (auto e : u.clauses[c]) clauses_of[e].push_back(static_cast<std::uint32_t>(c));
    std::vector<bool> covered(u.clauses.size(), false);
    std::size_t remaining = u.clauses.size();
    std::vector<bool> open(m, false);
    while (remaining > 0) {
        std::size_t best = m, best_gain = 0;
        for (std::size_t e = 0; e < m; ++e) {
            if (open[e]) continue;
            std::size_t gain = 0;
            for (auto c : clauses_of[e]) gain += covered[c] ? 0 : 1;
            if (gain > best_gain) {
                best_gain = gain;
                best = e;
            }
        }
        if (best == m) throw Error("siting: greedy stalled on a feasible instance");
        open[best] = true;
        for (auto c : clauses_of[best])
            if (!covered[c]) {
                covered[c] = true;
                --remaining;
            }
    }
    std::vector<NodeIndex> out;
    for (std::size_t e = 0; e < m; ++e)
        if (open[e]) out.push_back(u.elements[e]);
    return out;
}

FacilitySet finish(const SitingInstance& inst, std::vector<NodeIndex> facilities)
{
    FacilitySet fs;
    std::sort(facilities.begin(), facilities.end());
    fs.facilities = std::move(facilities);
    std::vector<bool> open(inst.candidate.size(), false);
    for (NodeIndex f : fs.facilities)
        if (f < open.size()) open[f] = true;
    for (const auto& p : inst.paths)
        fs.path_feasible.push_back(coverage_predicate(p, open, inst.range_miles, inst.require_endpoint_facilities));
    return fs;
}

void throw_if_infeasible(const ClauseSet& cs)
{
    if (cs.infeasible.empty()) return;
    std::string msg = "siting infeasible: no facility set covers path(s)";
    for (auto p : cs.infeasible) msg += " #" + std::to_string(p);
    throw InfeasibleError(msg, cs.infeasible);
}

} // namespace

std::vector<std::size_t> infeasible_paths(const SitingInstance& inst)
{
    return siting_detail::build_clauses(inst).infeasible;
}

FacilitySet solve_exact(const SitingInstance& inst, const ExactOptions& opts)
{
    auto cs = siting_detail::build_clauses(inst);
    throw_if_infeasible(cs);
    Universe u = make_universe(cs, true);
    if (u.elements.size() <= std::min<std::size_t>(opts.exhaustive_limit, 63))
        return finish(inst, exhaustive_cover(u));

    const std::size_t upper = greedy_cover(make_universe(cs, false)).size();
    BranchAndBound bnb(u, opts.node_budget);
    for (std::size_t k = bnb.disjoint_bound(0); k <= upper; ++k)
        if (auto found = bnb.search(k)) return finish(inst, std::move(*found));
    throw Error("siting: branch and bound found no cover within the greedy bound");
}

FacilitySet solve_greedy(const SitingInstance& inst)
{
    auto cs = siting_detail::build_clauses(inst);
    throw_if_infeasible(cs);
    return finish(inst, greedy_cover(make_universe(cs, false)));
}

} // namespace railcarb
