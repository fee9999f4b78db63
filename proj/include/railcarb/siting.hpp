#pragma once

#include "railcarb/netio.hpp"
#include "railcarb/routing.hpp"

#include <cstddef>
#include <vector>

namespace railcarb {

struct SitingInstance {
    std::vector<Path> paths;
    std::vector<bool> candidate; // indexed by NodeIndex
    double range_miles = 0.0;
    // Stricter variant: both endpoints of every path must host a facility.
    bool require_endpoint_facilities = false;

    static SitingInstance from_network(const RailNetwork& net, std::vector<Path> paths, double range_miles,
                                       bool require_endpoint_facilities = false);
};

struct FacilitySet {
    std::vector<NodeIndex> facilities; // ascending
    std::vector<bool> path_feasible;

    std::size_t size() const { return facilities.size(); }
};

// A path is traversable when the open facilities on it, in path order, start
// within half the range of the origin, end within half the range of the
// destination, and are never more than the range apart.
bool coverage_predicate(const Path& path, const std::vector<bool>& open, double range_miles,
                        bool require_endpoint_facilities = false);
bool coverage_predicate(const Path& path, const std::vector<NodeIndex>& open, double range_miles,
                        bool require_endpoint_facilities = false);

struct ExactOptions {
    // Candidate count up to which subsets are enumerated directly; branch and
    // bound is used above it.
    std::size_t exhaustive_limit = 24;
    std::size_t node_budget = 50'000'000;
};

// Minimum-cardinality facility set; ties go to the lexicographically smallest
// sorted id list. Throws InfeasibleError listing paths that no set can cover.
FacilitySet solve_exact(const SitingInstance& inst, const ExactOptions& opts = {});

// Repeatedly opens the candidate that satisfies the most unmet coverage
// clauses (ties: smallest id).
FacilitySet solve_greedy(const SitingInstance& inst);

// Paths with a gap no facility set can bridge.
std::vector<std::size_t> infeasible_paths(const SitingInstance& inst);

namespace siting_detail {

// Coverage clauses over a fixed universe: a facility set satisfies every
// path iff it intersects every clause. Clauses are sorted node lists; an
// empty clause marks an infeasible path (recorded in `infeasible`).
struct ClauseSet {
    std::vector<std::vector<NodeIndex>> clauses;
    std::vector<std::size_t> infeasible;
};

ClauseSet build_clauses(const SitingInstance& inst);

} // namespace siting_detail

} // namespace railcarb
