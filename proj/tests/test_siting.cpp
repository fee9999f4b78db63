#include "support.hpp"

#include "railcarb/error.hpp"
#include "railcarb/siting.hpp"

#include <doctest.h>

using namespace railcarb;
using namespace testkit;

namespace {

std::set<NodeIndex> as_set(const std::vector<NodeIndex>& v) { return {v.begin(), v.end()}; }

struct Toy {
    RailNetwork net;
    std::vector<Path> paths;
};

// Random network with at most `max_cands` candidates and up to `n_paths`
// shortest paths between distinct candidate endpoints.
Toy random_instance(std::mt19937_64& rng, int n_nodes, int max_cands, int n_paths)
{
    Toy t;
    for (;;) {
        std::uniform_real_distribution<double> share(0.0, 0.5);
        t.net = random_network(rng, n_nodes, n_nodes / 2, 30, 260, share(rng));
        std::vector<NodeIndex> cands;
        for (NodeIndex i = 0; i < t.net.node_count(); ++i)
            if (t.net.node(i).candidate) cands.push_back(i);
        if (cands.size() < 2 || static_cast<int>(cands.size()) > max_cands) continue;
        t.paths.clear();
        std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
        int want = 1 + static_cast<int>(rng() % n_paths);
        while (static_cast<int>(t.paths.size()) < want) {
            NodeIndex o = cands[pick(rng)], d = cands[pick(rng)];
            if (o != d) t.paths.push_back(shortest_path(t.net, o, d));
        }
        return t;
    }
}

} // namespace

TEST_CASE("coverage predicate examples")
{
    SUBCASE("100 mi path with a facility at the origin")
    {
        auto net = make_net({{"O", "D", 100}});
        auto p = shortest_path(net, at(net, "O"), at(net, "D"));
        CHECK(coverage_predicate(p, std::vector<NodeIndex>{at(net, "O")}, 400));
    }
    SUBCASE("O-A-D at 300 + 300")
    {
        auto net = make_net({{"O", "A", 300}, {"A", "D", 300}});
        auto p = shortest_path(net, at(net, "O"), at(net, "D"));
        CHECK_FALSE(coverage_predicate(p, std::vector<NodeIndex>{at(net, "O"), at(net, "D")}, 400));
        CHECK(coverage_predicate(p, std::vector<NodeIndex>{at(net, "O"), at(net, "A"), at(net, "D")}, 400));
    }
    SUBCASE("exactly half the range at each end counts")
    {
        auto net = make_net({{"O", "M", 200}, {"M", "D", 200}});
        auto p = shortest_path(net, at(net, "O"), at(net, "D"));
        CHECK(coverage_predicate(p, std::vector<NodeIndex>{at(net, "M")}, 400));
        CHECK_FALSE(coverage_predicate(p, std::vector<NodeIndex>{at(net, "M")}, 399.99));
        CHECK_FALSE(coverage_predicate(p, std::vector<NodeIndex>{at(net, "M")}, 400, true));
    }
    SUBCASE("no facility on the path")
    {
        auto net = make_net({{"O", "D", 10}, {"D", "X", 10}});
        auto p = shortest_path(net, at(net, "O"), at(net, "D"));
        CHECK_FALSE(coverage_predicate(p, std::vector<NodeIndex>{at(net, "X")}, 400));
    }
}

TEST_CASE("coverage predicate agrees with the reference check and is monotone")
{
    std::mt19937_64 rng(17);
    for (int t = 0; t < 300; ++t) {
        auto toy = random_instance(rng, 9, 9, 1);
        const Path& p = toy.paths[0];
        const double range = 100.0 + static_cast<double>(rng() % 500);
        std::vector<bool> open(toy.net.node_count(), false);
        std::set<NodeIndex> open_set;
        bool prev = false;
        for (NodeIndex n : p.nodes) {
            if (rng() % 2) continue;
            open[n] = true;
            open_set.insert(n);
            for (bool strict : {false, true}) {
                bool got = coverage_predicate(p, open, range, strict);
                CHECK(got == covers(p, open_set, range, strict));
            }
            bool now = coverage_predicate(p, open, range);
            CHECK((!prev || now)); // opening more never breaks coverage
            prev = now;
        }
    }
}

TEST_CASE("exact solver examples")
{
    SUBCASE("O-A-D needs all three")
    {
        auto net = make_net({{"O", "A", 300}, {"A", "D", 300}});
        auto inst = SitingInstance::from_network(net, {shortest_path(net, at(net, "O"), at(net, "D"))}, 400);
        auto s = solve_exact(inst);
        CHECK(s.facilities == std::vector<NodeIndex>{at(net, "A"), at(net, "D"), at(net, "O")});
        CHECK(s.size() == brute_cover(net, inst.paths, 400).size);
        auto g = solve_greedy(inst);
        CHECK(g.size() == 3);
    }
    SUBCASE("single 100 mi path needs one facility, smallest id wins")
    {
        auto net = make_net({{"O", "D", 100}});
        auto inst = SitingInstance::from_network(net, {shortest_path(net, at(net, "O"), at(net, "D"))}, 400);
        auto s = solve_exact(inst);
        auto oracle = brute_cover(net, inst.paths, 400);
        CHECK(s.facilities == oracle.first);
        CHECK(s.facilities == std::vector<NodeIndex>{at(net, "D")});
        CHECK(s.path_feasible == std::vector<bool>{true});
    }
    SUBCASE("unbridgeable 500 mi arc")
    {
        auto net = make_net({{"O", "D", 500}, {"D", "E", 10}});
        auto p = shortest_path(net, at(net, "O"), at(net, "D"));
        auto q = shortest_path(net, at(net, "D"), at(net, "E"));
        auto inst = SitingInstance::from_network(net, {q, p}, 400);
        try {
            solve_exact(inst);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& e) {
            CHECK(e.paths() == std::vector<std::size_t>{1});
        }
        CHECK_THROWS_AS(solve_greedy(inst), InfeasibleError);
        CHECK(infeasible_paths(inst) == std::vector<std::size_t>{1});
    }
    SUBCASE("non-candidate interior node cannot host")
    {
        auto net = make_net({{"O", "A", 300}, {"A", "D", 300}}, "TX", {"A"});
        auto inst = SitingInstance::from_network(net, {shortest_path(net, at(net, "O"), at(net, "D"))}, 400);
        CHECK_THROWS_AS(solve_exact(inst), InfeasibleError);
    }
    SUBCASE("paths share facilities")
    {
        // two spokes through hub H; H alone covers both at range 400
        auto net = make_net({{"A", "H", 150}, {"H", "B", 150}, {"H", "C", 150}});
        auto inst = SitingInstance::from_network(
            net, {shortest_path(net, at(net, "A"), at(net, "B")), shortest_path(net, at(net, "A"), at(net, "C"))}, 400);
        CHECK(solve_exact(inst).facilities == std::vector<NodeIndex>{at(net, "H")});
    }
}

TEST_CASE("exact and greedy against exhaustive enumeration")
{
    std::mt19937_64 rng(29);
    int feasible = 0, infeasible = 0;
    for (int t = 0; t < 400; ++t) {
        auto toy = random_instance(rng, 10, 10, 3);
        const double range = 150.0 + static_cast<double>(rng() % 450);
        const bool strict = t % 5 == 0;
        auto inst = SitingInstance::from_network(toy.net, toy.paths, range, strict);
        auto oracle = brute_cover(toy.net, toy.paths, range, strict);
        CAPTURE(t);
        if (!oracle.feasible) {
            ++infeasible;
            CHECK_THROWS_AS(solve_exact(inst), InfeasibleError);
            CHECK_THROWS_AS(solve_greedy(inst), InfeasibleError);
            continue;
        }
        ++feasible;
        auto exact = solve_exact(inst);
        CHECK(exact.size() == oracle.size);
        CHECK(exact.facilities == oracle.first);
        for (const auto& p : toy.paths) CHECK(covers(p, as_set(exact.facilities), range, strict));
        // local minimality: dropping any facility breaks some path
        for (std::size_t k = 0; k < exact.facilities.size(); ++k) {
            auto fewer = as_set(exact.facilities);
            fewer.erase(exact.facilities[k]);
            bool all = true;
            for (const auto& p : toy.paths) all = all && covers(p, fewer, range, strict);
            CHECK_FALSE(all);
        }
        auto greedy = solve_greedy(inst);
        CHECK(greedy.size() >= exact.size());
        for (const auto& p : toy.paths) CHECK(covers(p, as_set(greedy.facilities), range, strict));
        CHECK(std::is_sorted(greedy.facilities.begin(), greedy.facilities.end()));
    }
    CHECK(feasible > 100);
    CHECK(infeasible > 10);
}

TEST_CASE("branch and bound agrees with subset enumeration")
{
    std::mt19937_64 rng(31);
    ExactOptions bnb;
    bnb.exhaustive_limit = 0;
    for (int t = 0; t < 150; ++t) {
        auto toy = random_instance(rng, 14, 14, 4);
        const double range = 200.0 + static_cast<double>(rng() % 400);
        auto inst = SitingInstance::from_network(toy.net, toy.paths, range);
        if (!infeasible_paths(inst).empty()) continue;
        auto a = solve_exact(inst);
        auto b = solve_exact(inst, bnb);
        CHECK(a.facilities == b.facilities);
    }
}

TEST_CASE("greedy equals exact on forced single paths")
{
    // a line of equally spaced candidates: every gap clause is forced
    for (int n = 2; n <= 8; ++n) {
        std::vector<E> edges;
        for (int i = 1; i < n; ++i) edges.push_back({"s" + std::to_string(i - 1), "s" + std::to_string(i), 300});
        auto net = make_net(edges);
        auto inst = SitingInstance::from_network(
            net, {shortest_path(net, at(net, "s0"), at(net, "s" + std::to_string(n - 1)))}, 400);
        CHECK(solve_greedy(inst).size() == solve_exact(inst).size());
        CHECK(solve_exact(inst).size() == static_cast<std::size_t>(n));
    }
}
