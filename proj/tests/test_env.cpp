#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/rng.hpp"
#include "pomo/env/returns.hpp"
#include "pomo/env/rollout.hpp"
#include "pomo/env/validate.hpp"
#include "pomo/instances/generate.hpp"
#include "pomo/instances/types.hpp"
#include "pomo/oracle/oracle.hpp"

using namespace pomo;

namespace {

std::vector<int> iota_starts(int n, int first = 0) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), first);
    return v;
}

int count_legal(const std::vector<std::uint8_t>& mask, int row, int a) {
    int c = 0;
    for (int j = 0; j < a; ++j) c += mask[row * a + j] ? 1 : 0;
    return c;
}

// Picks a uniformly random legal action for one row of the mask.
int random_legal(const std::vector<std::uint8_t>& mask, int row, int a,
                 Xoshiro256pp& rng) {
    std::vector<int> legal;
    for (int j = 0; j < a; ++j)
        if (mask[row * a + j]) legal.push_back(j);
    REQUIRE(!legal.empty());
    return legal[static_cast<int>(rng.below(static_cast<std::uint64_t>(legal.size())))];
}

// Every action the mask calls legal must step cleanly on a copy; every
// action it calls illegal must be rejected. Applied along a random walk,
// skipping rows that are already done (their pad column stays legal).
template <class Rollout>
void walk_checking_mask(Rollout& r, Xoshiro256pp& rng) {
    const int a = r.action_count();
    while (!r.all_done()) {
        const auto mask = r.legal_mask();
        for (int row = 0; row < r.n(); ++row) {
            if (r.done_flags()[row]) continue;
            for (int j = 0; j < a; ++j) {
                Rollout probe = r;
                std::vector<int> probe_actions(static_cast<size_t>(r.n()));
                for (int k = 0; k < r.n(); ++k)
                    probe_actions[k] = random_legal(mask, k, a, rng);
                probe_actions[row] = j;
                if (mask[row * a + j]) {
                    CHECK_NOTHROW(probe.step(probe_actions));
                } else {
                    CHECK_THROWS_AS(probe.step(probe_actions), ContractViolation);
                }
            }
        }
        std::vector<int> actions(static_cast<size_t>(r.n()));
        for (int k = 0; k < r.n(); ++k) actions[k] = random_legal(mask, k, a, rng);
        r.step(actions);
    }
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("tsp reset marks exactly the start node visited") {
    auto rng = Xoshiro256pp::stream(2, 0);
    TspInstance inst = generate_tsp(20, rng);
    TspRollout r(inst, iota_starts(20));
    CHECK(r.n() == 20);
    CHECK(r.steps_taken() == 1);
    const auto mask = r.legal_mask();
    for (int i = 0; i < 20; ++i) {
        CHECK(count_legal(mask, i, 20) == 19);
        CHECK(mask[i * 20 + i] == 0);
        CHECK(r.current_nodes()[i] == i);
    }
}

TEST_CASE("cvrp reset charges the start customer demand") {
    auto rng = Xoshiro256pp::stream(2, 1);
    CvrpInstance inst = generate_cvrp(8, rng);
    CvrpRollout r(inst, iota_starts(8, 1));
    for (int i = 0; i < 8; ++i) {
        CHECK(r.remaining_capacity()[i] ==
              doctest::Approx(1.0 - inst.demands[i]).epsilon(1e-12));
        CHECK(r.current_nodes()[i] == i + 1);
    }
}

TEST_CASE("kp reset charges the start item weight") {
    KpInstance inst;
    inst.capacity = 12.5;
    inst.items = {{0.4, 0.6}, {0.2, 0.1}};
    KpRollout r(inst, {0});
    CHECK(r.remaining_capacity()[0] == doctest::Approx(12.1).epsilon(1e-12));
}

TEST_CASE("bad start nodes are rejected") {
    auto rng = Xoshiro256pp::stream(2, 2);
    TspInstance inst = generate_tsp(5, rng);
    CHECK_THROWS_AS(TspRollout(inst, {0, 0}), ArgumentError);
    CHECK_THROWS_AS(TspRollout(inst, {5}), ArgumentError);
    CHECK_THROWS_AS(TspRollout(inst, {-1}), ArgumentError);

    CvrpInstance vinst = generate_cvrp(4, rng);
    CHECK_THROWS_AS(CvrpRollout(vinst, {0}), ArgumentError);  // depot not a start
    CHECK_THROWS_AS(CvrpRollout(vinst, {5}), ArgumentError);
    CHECK_THROWS_AS(CvrpRollout(vinst, {1, 1}), ArgumentError);

    KpInstance kinst = generate_kp(4, rng, 10.0);
    CHECK_THROWS_AS(KpRollout(kinst, {4}), ArgumentError);
    CHECK_THROWS_AS(KpRollout(kinst, {2, 2}), ArgumentError);
}

TEST_CASE("tsp mask keeps m minus t actions legal") {
    auto rng = Xoshiro256pp::stream(2, 3);
    TspInstance inst = generate_tsp(9, rng);
    TspRollout r(inst, iota_starts(4));
    int t = 1;
    while (!r.all_done()) {
        const auto mask = r.legal_mask();
        for (int row = 0; row < r.n(); ++row)
            CHECK(count_legal(mask, row, 9) == 9 - t);
        std::vector<int> actions(4);
        for (int row = 0; row < 4; ++row) actions[row] = random_legal(mask, row, 9, rng);
        r.step(actions);
        ++t;
    }
    CHECK(t == 9);
}

TEST_CASE("cvrp mask leaves only the depot when nothing fits") {
    CvrpInstance inst;
    inst.depot = {0.0, 0.0};
    inst.customers = {{0.2, 0.2}, {0.4, 0.4}, {0.6, 0.6}};
    inst.demands = {0.9, 0.1, 0.1};
    CvrpRollout r(inst, {1});  // demand 0.9 leaves capacity 0.1
    {
        const auto mask = r.legal_mask();
        // Customers 2 and 3 (demand 0.1) still fit exactly.
        CHECK(mask[0 * 4 + 2] == 1);
        CHECK(mask[0 * 4 + 3] == 1);
    }
    inst.demands = {0.95, 0.1, 0.1};
    CvrpRollout tight(inst, {1});  // remaining 0.05, all demands >= 0.1
    const auto mask = tight.legal_mask();
    CHECK(mask[0 * 4 + 0] == 1);
    CHECK(mask[0 * 4 + 1] == 0);
    CHECK(mask[0 * 4 + 2] == 0);
    CHECK(mask[0 * 4 + 3] == 0);
}

TEST_CASE("kp mask admits exactly the items that fit") {
    KpInstance inst;
    inst.capacity = 1.0;
    inst.items = {{0.7, 0.9}, {0.2, 0.3}, {0.5, 0.4}};
    KpRollout r(inst, {0});  // remaining 0.3
    const auto mask = r.legal_mask();
    CHECK(mask[0 * 4 + 0] == 0);  // already selected
    CHECK(mask[0 * 4 + 1] == 1);  // weight 0.2 fits
    CHECK(mask[0 * 4 + 2] == 0);  // weight 0.5 does not
    CHECK(mask[0 * 4 + 3] == 0);  // pad only offered once nothing fits
}

TEST_CASE("cvrp depot visit restores full capacity") {
    auto rng = Xoshiro256pp::stream(2, 4);
    CvrpInstance inst = generate_cvrp(5, rng);
    CvrpRollout r(inst, {1});
    r.step({0});
    CHECK(r.remaining_capacity()[0] == doctest::Approx(1.0));
}

TEST_CASE("padding a done trajectory changes nothing") {
    KpInstance inst;
    inst.capacity = 0.5;
    inst.items = {{0.4, 0.9}, {0.3, 0.1}};
    KpRollout r(inst, {0});  // remaining 0.1, nothing fits -> done
    std::vector<double> lp = {-0.25};
    REQUIRE(r.legal_mask()[r.pad_action()] == 1);
    const double before_lp = r.logprob_sums()[0];
    const double before_ret = r.returns()[0];
    r.step({r.pad_action()}, &lp);
    r.step({r.pad_action()}, &lp);
    CHECK(r.logprob_sums()[0] == before_lp);
    CHECK(r.returns()[0] == before_ret);
    CHECK(r.returns()[0] == doctest::Approx(0.9));
}

TEST_CASE("cvrp padding on the depot is free after done") {
    CvrpInstance inst;
    inst.depot = {0.0, 0.0};
    inst.customers = {{0.3, 0.4}};
    inst.demands = {0.5};
    CvrpRollout r(inst, {1});
    r.step({0});
    REQUIRE(r.done_flags()[0] == 1);
    std::vector<double> lp = {-1.0};
    const double before_lp = r.logprob_sums()[0];
    const double before_ret = r.returns()[0];
    r.step({0}, &lp);
    CHECK(r.logprob_sums()[0] == before_lp);
    CHECK(r.returns()[0] == before_ret);
    CHECK(r.returns()[0] == doctest::Approx(-1.0));  // out-and-back 2*0.5
}

TEST_CASE("tsp return of the unit square perimeter is minus four") {
    TspInstance square;
    square.nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    CHECK(tsp_return(square, {0, 1, 2, 3}) == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("two-node tsp return is minus twice the distance") {
    TspInstance pair;
    pair.nodes = {{0.1, 0.2}, {0.7, 0.9}};
    const double d = euclid(pair.nodes[0], pair.nodes[1]);
    CHECK(tsp_return(pair, {1, 0}) == doctest::Approx(-2.0 * d).epsilon(1e-12));
}

TEST_CASE("tsp return matches the exhaustive oracle on optimal tours") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto rng = Xoshiro256pp::stream(40, s);
        TspInstance inst = generate_tsp(7, rng);
        OracleResult opt = brute_force_tsp(inst);
        CHECK(tsp_return(inst, opt.certificate) ==
              doctest::Approx(-opt.score).epsilon(1e-12));
    }
}

TEST_CASE("tsp return rejects non-permutations") {
    TspInstance inst;
    inst.nodes = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0} };
    CHECK_THROWS_AS(tsp_return(inst, {0, 1}), ContractViolation);
    CHECK_THROWS_AS(tsp_return(inst, {0, 1, 1}), ContractViolation);
    CHECK_THROWS_AS(tsp_return(inst, {0, 1, 3}), ContractViolation);
}

TEST_CASE("tsp return is invariant under rotation and reversal") {
    auto rng = Xoshiro256pp::stream(41, 0);
    TspInstance inst = generate_tsp(8, rng);
    std::vector<int> perm = {3, 1, 7, 0, 4, 6, 2, 5};
    const double base = tsp_return(inst, perm);
    for (int k = 1; k < 8; ++k) {
        std::vector<int> rotated(perm);
        std::rotate(rotated.begin(), rotated.begin() + k, rotated.end());
        CHECK(tsp_return(inst, rotated) == doctest::Approx(base).epsilon(1e-12));
    }
    std::vector<int> reversed(perm.rbegin(), perm.rend());
    CHECK(tsp_return(inst, reversed) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cvrp return of one customer is the out-and-back length") {
    CvrpInstance inst;
    inst.depot = {0.0, 0.0};
    inst.customers = {{0.5, 0.5}};
    inst.demands = {0.4};
    CHECK(cvrp_return(inst, {1}) ==
          doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    // The closing depot visit may be explicit or implicit.
    CHECK(cvrp_return(inst, {1, 0}) == cvrp_return(inst, {1}));
}

TEST_CASE("splitting a trip never shortens the route") {
    auto rng = Xoshiro256pp::stream(42, 0);
    for (int rep = 0; rep < 20; ++rep) {
        CvrpInstance inst = generate_cvrp(5, rng, 60);  // low demands, one trip fits
        std::vector<int> route = {1, 2, 3, 4, 5};
        const double whole = cvrp_return(inst, route);
        for (size_t cut = 1; cut < route.size(); ++cut) {
            std::vector<int> split(route);
            split.insert(split.begin() + static_cast<long>(cut), 0);
            CHECK(cvrp_return(inst, split) <= whole + 1e-12);
        }
    }
}

TEST_CASE("cvrp return rejects capacity and coverage violations") {
    CvrpInstance inst;
    inst.depot = {0.0, 0.0};
    inst.customers = {{0.1, 0.1}, {0.2, 0.2}};
    inst.demands = {0.7, 0.7};
    CHECK_THROWS_AS(cvrp_return(inst, {1, 2}), ContractViolation);  // 1.4 > 1
    CHECK_THROWS_AS(cvrp_return(inst, {1}), ContractViolation);     // 2 unvisited
    CHECK_THROWS_AS(cvrp_return(inst, {1, 0, 1, 0, 2}), ContractViolation);
    CHECK(cvrp_return(inst, {1, 0, 2}) < 0.0);
}

TEST_CASE("cvrp rollouts agree with the standalone checker") {
    auto rng = Xoshiro256pp::stream(43, 0);
    for (int rep = 0; rep < 25; ++rep) {
        CvrpInstance inst = generate_cvrp(8, rng, 30);
        CvrpRollout r(inst, {1, 2, 3});
        while (!r.all_done()) {
            const auto mask = r.legal_mask();
            std::vector<int> actions(3);
            for (int row = 0; row < 3; ++row)
                actions[row] = random_legal(mask, row, r.action_count(), rng);
            r.step(actions);
        }
        const auto rets = r.returns();
        for (int row = 0; row < 3; ++row) {
            const auto& acts = r.actions()[row];
            CHECK(!check_cvrp_route(inst, acts).has_value());
            CHECK(cvrp_return(inst, acts) == doctest::Approx(rets[row]).epsilon(1e-12));
            CHECK(acts.size() == r.actions()[0].size());
        }
    }
}

TEST_CASE("kp return sums selected values") {
    KpInstance inst;
    inst.capacity = 1.0;
    inst.items = {{0.3, 0.5}, {0.4, 0.2}};
    CHECK(kp_return(inst, {0, 1}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(kp_return(inst, {0, 1, 2, 2}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK_THROWS_AS(kp_return(inst, {0, 0}), ContractViolation);
}

TEST_CASE("overweight kp selections are rejected") {
    KpInstance inst;
    inst.capacity = 0.5;
    inst.items = {{0.3, 0.5}, {0.4, 0.2}};
    CHECK_THROWS_AS(kp_return(inst, {0, 1}), ContractViolation);
}

TEST_CASE("kp rollout returns match the exact oracle on its certificate") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto rng = Xoshiro256pp::stream(44, s);
        KpInstance inst = generate_kp(12, rng, 2.0);
        OracleResult opt = kp_exact(inst);
        CHECK(kp_return(inst, opt.certificate) ==
              doctest::Approx(opt.score).epsilon(1e-12));
    }
}

TEST_CASE("mask soundness holds along random tsp walks") {
    auto rng = Xoshiro256pp::stream(45, 0);
    for (int rep = 0; rep < 4; ++rep) {
        TspInstance inst = generate_tsp(6, rng);
        TspRollout r(inst, {0, 3});
        walk_checking_mask(r, rng);
    }
}

TEST_CASE("mask soundness holds along random cvrp walks") {
    auto rng = Xoshiro256pp::stream(45, 1);
    for (int rep = 0; rep < 4; ++rep) {
        CvrpInstance inst = generate_cvrp(5, rng, 20);
        CvrpRollout r(inst, {1, 2});
        walk_checking_mask(r, rng);
    }
}

TEST_CASE("mask soundness holds along random kp walks") {
    auto rng = Xoshiro256pp::stream(45, 2);
    for (int rep = 0; rep < 4; ++rep) {
        KpInstance inst = generate_kp(6, rng, 1.2);
        KpRollout r(inst, {0, 1});
        walk_checking_mask(r, rng);
    }
}

TEST_CASE("cvrp capacity is conserved within every segment") {
    auto rng = Xoshiro256pp::stream(46, 0);
    for (int rep = 0; rep < 10; ++rep) {
        CvrpInstance inst = generate_cvrp(10, rng);
        CvrpRollout r(inst, {1, 4});
        while (!r.all_done()) {
            const auto mask = r.legal_mask();
            std::vector<int> actions(2);
            for (int row = 0; row < 2; ++row)
                actions[row] = random_legal(mask, row, r.action_count(), rng);
            r.step(actions);
            for (double cap : r.remaining_capacity()) CHECK(cap >= -kCapacityEps);
        }
        for (int row = 0; row < 2; ++row) {
            double served = 0.0;
            for (int a : r.actions()[row]) {
                if (a == 0) {
                    served = 0.0;
                } else {
                    served += inst.demands[static_cast<size_t>(a - 1)];
                    CHECK(served <= 1.0 + kCapacityEps);
                }
            }
        }
    }
}

TEST_CASE("all trajectories in a batch finish with equal action counts") {
    auto rng = Xoshiro256pp::stream(47, 0);
    KpInstance inst = generate_kp(9, rng, 1.5);
    KpRollout r(inst, {0, 1, 2, 3});
    while (!r.all_done()) {
        const auto mask = r.legal_mask();
        std::vector<int> actions(4);
        for (int row = 0; row < 4; ++row)
            actions[row] = random_legal(mask, row, r.action_count(), rng);
        r.step(actions);
    }
    const size_t len = r.actions()[0].size();
    for (const auto& acts : r.actions()) CHECK(acts.size() == len);
}

TEST_CASE("tsp rollout returns agree with the scorer") {
    auto rng = Xoshiro256pp::stream(48, 0);
    TspInstance inst = generate_tsp(11, rng);
    TspRollout r(inst, iota_starts(11));
    while (!r.all_done()) {
        const auto mask = r.legal_mask();
        std::vector<int> actions(11);
        for (int row = 0; row < 11; ++row)
            actions[row] = random_legal(mask, row, 11, rng);
        r.step(actions);
    }
    const auto rets = r.returns();
    for (int row = 0; row < 11; ++row) {
        CHECK(!check_tsp_tour(inst, r.actions()[row]).has_value());
        CHECK(tsp_return(inst, r.actions()[row]) == doctest::Approx(rets[row]));
        CHECK(r.actions()[row][0] == row);
    }
}

TEST_CASE("trajectory dump line format") {
    CHECK(trajectory_line(3, {2, 0, 1}, -1.5) == "3; 2; 2,0,1; -1.5");
}

}  // TEST_SUITE
