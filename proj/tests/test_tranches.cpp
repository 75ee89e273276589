#include <doctest.h>

#include <random>

#include "gclaim/tranches.hpp"
#include "support/fixtures.hpp"

using namespace gclaim;
using namespace gclaim::testing;

namespace {

/// Active-set search over all 2^m candidate supports, the independent oracle
/// for the water-filling projection.
template <typename N>
std::vector<N> simplex_by_active_sets(const std::vector<N>& point,
                                      const std::vector<N>& bounds, const N& total) {
    const std::size_t m = point.size();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<bool> at_bound(m);
        std::size_t free_count = 0;
        N fixed_sum{0}, free_sum{0};
        for (std::size_t i = 0; i < m; ++i) {
            at_bound[i] = (mask >> i) & 1u;
            if (at_bound[i])
                fixed_sum += bounds[i];
            else {
                ++free_count;
                free_sum += point[i];
            }
        }
        if (free_count == 0) {
            if (fixed_sum == total) return bounds;
            continue;
        }
        N lambda = (free_sum + fixed_sum - total) / N(static_cast<int>(free_count));
        bool ok = true;
        std::vector<N> x(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (at_bound[i]) {
                x[i] = bounds[i];
                if (point[i] - bounds[i] > lambda) ok = false; // KKT multiplier sign
            } else {
                x[i] = point[i] - lambda;
                if (x[i] < bounds[i]) ok = false;
            }
        }
        if (ok) return x;
    }
    throw std::logic_error("no feasible active set");
}

/// The worked two-player contract: call K=4 and put K=4 on S: 4 -> {8,2} ->
/// {16,4,1}, zero rate, one put date at 1 with amounts (1, 0).
TrancheContract<Rational> worked_contract() {
    TrancheContract<Rational> c;
    c.players = 2;
    c.decision_dates = {1};
    TrancheLeg<Rational> call;
    call.kind = TrancheLeg<Rational>::Kind::Call;
    call.style = TrancheLeg<Rational>::Style::European;
    call.strike = 4;
    TrancheLeg<Rational> put;
    put.kind = TrancheLeg<Rational>::Kind::Put;
    put.style = TrancheLeg<Rational>::Style::European;
    put.strike = 4;
    c.legs = {call, put};
    c.put_payoffs = {{{Rational(1), Rational(1)}}, {{Rational(0), Rational(0)}}};
    return c;
}

} // namespace

TEST_CASE("hyperplane projection pins fixed coordinates and shifts the rest") {
    using V = std::vector<Rational>;
    CHECK(project_hyperplane<Rational>({1, 1}, {0}, {0, 0}, 2) == V{0, 2});

    // a point already on the hyperplane is unchanged
    CHECK(project_hyperplane<Rational>({1, 1}, {}, {0, 0}, 2) == V{1, 1});

    CHECK(project_hyperplane<Rational>({3, 1, 2}, {2}, {0, 0, 2}, 6) == V{3, 1, 2});
    CHECK(project_hyperplane<Rational>({3, 1, 2}, {2}, {0, 0, 2}, 7) ==
          V{Rational(7) / 2, Rational(3) / 2, 2});

    CHECK_THROWS_AS(project_hyperplane<Rational>({1, 1}, {0, 1}, {0, 0}, 2),
                    DegenerateHyperplane);
    CHECK(project_hyperplane<Rational>({9, 9}, {0, 1}, {1, 1}, 2) == V{1, 1});
}

TEST_CASE("simplex projection worked examples") {
    using V = std::vector<Rational>;
    CHECK(project_simplex<Rational>({1, 1}, {0, 0}, 2) == V{1, 1});
    CHECK(project_simplex<Rational>({3, 1}, {0, 0}, 2) == V{2, 0});
    CHECK(project_simplex<Rational>({2, -1, 1}, {0, 0, 0}, 1) == V{1, 0, 0});
    CHECK_THROWS_AS(project_simplex<Rational>({1, 1}, {2, 2}, 2), EmptySimplex);
}

TEST_CASE("simplex projection equals the active-set oracle on random input") {
    std::mt19937 rng(515151);
    std::uniform_int_distribution<int> mdist(1, 6);
    std::uniform_int_distribution<int> num(-20, 20);
    for (int trial = 0; trial < 400; ++trial) {
        int m = mdist(rng);
        std::vector<Rational> p(m), x(m);
        Rational xs{0};
        for (int i = 0; i < m; ++i) {
            p[i] = Rational(num(rng)) / 4;
            x[i] = Rational(num(rng)) / 4;
            xs += x[i];
        }
        Rational c = xs + Rational(std::abs(num(rng))) / 4;
        auto fast = project_simplex(p, x, c);
        auto slow = simplex_by_active_sets(p, x, c);
        CHECK(fast == slow);

        // feasibility and idempotence
        Rational sum{0};
        for (int i = 0; i < m; ++i) {
            sum += fast[i];
            CHECK(fast[i] >= x[i]);
        }
        CHECK(sum == c);
        CHECK(project_simplex(fast, x, c) == fast);

        // KKT: the pullback p_i - x_i is one constant on the free support
        std::optional<Rational> mu;
        for (int i = 0; i < m; ++i) {
            if (fast[i] > x[i]) {
                if (!mu) mu = p[i] - fast[i];
                CHECK(p[i] - fast[i] == *mu);
            }
        }
    }
}

TEST_CASE("simplex projection is monotone in the bounds at active coordinates") {
    std::mt19937 rng(626262);
    std::uniform_int_distribution<int> num(-12, 12);
    std::uniform_int_distribution<int> bump(0, 6);
    for (int trial = 0; trial < 200; ++trial) {
        int m = 4;
        std::vector<Rational> p(m), x(m), hx(m);
        for (int i = 0; i < m; ++i) {
            p[i] = Rational(num(rng)) / 2;
            x[i] = Rational(num(rng)) / 2 - 6;
            hx[i] = x[i] + Rational(bump(rng)) / 2;
        }
        Rational c{10};
        Rational hs{0};
        for (int i = 0; i < m; ++i) hs += hx[i];
        if (hs > c) continue;
        auto base = project_simplex(p, x, c);
        auto raised = project_simplex(p, hx, c);
        for (int i = 0; i < m; ++i)
            if (base[i] == x[i]) CHECK(raised[i] >= base[i]);
    }
}

TEST_CASE("put sets from the projection boundary") {
    using I = std::vector<int>;
    CHECK(put_set<Rational>({2, -1}, {0, 0}, 1) == I{1});
    CHECK(put_set<Rational>({3, 1}, {0, 0}, 4) == I{});       // strictly interior
    CHECK(put_set<Rational>({0, 0}, {0, 0}, 0) == I{0, 1});   // everyone at the bound
    CHECK_THROWS_AS(put_set<Rational>({1, 1}, {3, 3}, 2), EmptySimplex);
}

TEST_CASE("two-date contract valuation: continuation vectors, put sets, values") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    auto val = value_tranches(contract, lat, q);

    // hand rollback: P(up) = (4, 0), P(down) = (0, 2)
    const auto& dn = val.at_date[0][0];
    const auto& up = val.at_date[0][1];
    CHECK(up.continuation == std::vector<Rational>{4, 0});
    CHECK(dn.continuation == std::vector<Rational>{0, 2});
    CHECK(up.continuation_sum == Rational(4));
    CHECK(dn.continuation_sum == Rational(2));

    CHECK(up.value == std::vector<Rational>{4, 0});
    CHECK(up.putters == std::vector<int>{1});
    CHECK(dn.value == std::vector<Rational>{1, 1});
    CHECK(dn.putters == std::vector<int>{0});

    // total value is conserved at every node
    CHECK(up.value[0] + up.value[1] == up.continuation_sum);
    CHECK(dn.value[0] + dn.value[1] == dn.continuation_sum);

    CHECK(val.root_value == std::vector<Rational>{2, Rational(2) / 3});
}

TEST_CASE("single-putter example via custom terminal tables") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    TrancheContract<Rational> c;
    c.players = 2;
    c.decision_dates = {1};
    TrancheLeg<Rational> first;
    first.kind = TrancheLeg<Rational>::Kind::Custom;
    first.custom_terminal = {2, 2, 2};
    TrancheLeg<Rational> second;
    second.kind = TrancheLeg<Rational>::Kind::Custom;
    second.custom_terminal = {-1, -1, -1};
    c.legs = {first, second};
    c.put_payoffs = {{{Rational(0), Rational(0)}}, {{Rational(0), Rational(0)}}};
    auto val = value_tranches(c, lat, q);
    for (int j = 0; j <= 1; ++j) {
        CHECK(val.at_date[0][j].continuation == std::vector<Rational>{2, -1});
        CHECK(val.at_date[0][j].value == std::vector<Rational>{1, 0});
        CHECK(val.at_date[0][j].putters == std::vector<int>{1});
        CHECK(val.at_date[0][j].continuation_sum == Rational(1));
    }
    CHECK(val.root_value == std::vector<Rational>{1, 0});
}

TEST_CASE("very negative put amounts reduce to independent option prices") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    contract.put_payoffs = {{{Rational(-100), Rational(-100)}},
                            {{Rational(-100), Rational(-100)}}};
    auto val = value_tranches(contract, lat, q);
    for (int j = 0; j <= 1; ++j) {
        CHECK(val.at_date[0][j].putters.empty());
        CHECK(val.at_date[0][j].value == val.at_date[0][j].continuation);
    }
    CHECK(val.root_value == std::vector<Rational>{Rational(4) / 3, Rational(4) / 3});
}

TEST_CASE("zero-sum condition violations abort with the offending node") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    contract.put_payoffs = {{{Rational(3), Rational(3)}}, {{Rational(3), Rational(3)}}};
    try {
        value_tranches(contract, lat, q);
        FAIL("expected ZeroSumViolation");
    } catch (const ZeroSumViolation& e) {
        CHECK(e.date_index == 0);
        CHECK(e.node == 0); // the down node only supports a total of 2
    }
}

TEST_CASE("all-put boundary is admitted and flagged") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    contract.put_payoffs = {{{Rational(1), Rational(1)}}, {{Rational(1), Rational(1)}}};
    auto val = value_tranches(contract, lat, q);
    const auto& dn = val.at_date[0][0];
    CHECK(dn.all_put_boundary);
    CHECK(dn.value == std::vector<Rational>{1, 1});
    CHECK(dn.putters == std::vector<int>{0, 1});
    CHECK_FALSE(val.at_date[0][1].all_put_boundary);
}

TEST_CASE("american legs enter through their early-exercise value") {
    auto lat = build_lattice<Rational>(Rational(4), Rational(2), Rational(1) / 2,
                                       Rational(5) / 4, 2);
    auto q = martingale_measure(lat);
    CHECK(q.up_probability == Rational(1) / 2);
    TrancheLeg<Rational> amer;
    amer.kind = TrancheLeg<Rational>::Kind::Put;
    amer.style = TrancheLeg<Rational>::Style::American;
    amer.strike = 4;
    // hand values: continuation at the down node is (1/2)(48/25) = 24/25,
    // intrinsic 2/(5/4) = 8/5 dominates; the up node is worthless
    auto values = leg_values_at(amer, 1, lat, q);
    CHECK(values[0] == Rational(8) / 5);
    CHECK(values[1] == Rational(0));
    TrancheLeg<Rational> euro = amer;
    euro.style = TrancheLeg<Rational>::Style::European;
    CHECK(leg_values_at(euro, 1, lat, q)[0] == Rational(24) / 25);
}

TEST_CASE("single tranche degenerates to the plain option rollback") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    TrancheContract<Rational> c;
    c.players = 1;
    c.decision_dates = {1};
    TrancheLeg<Rational> call;
    call.kind = TrancheLeg<Rational>::Kind::Call;
    call.strike = 4;
    c.legs = {call};
    c.put_payoffs = {{{Rational(-10), Rational(-10)}}};
    auto val = value_tranches(c, lat, q);
    CHECK(val.root_value == std::vector<Rational>{Rational(4) / 3});
}

TEST_CASE("equilibrium profile payoff reproduces the value process") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    auto val = value_tranches(contract, lat, q);
    auto star = equilibrium_profile(contract, lat, val);
    auto pay = payoff_of_profile(contract, star, lat, q, val);
    CHECK(pay.root == val.root_value);
    for (const auto& [state, vec] : pay.at_state)
        CHECK(vec == val.at_date[state.level][state.node].value);
}

TEST_CASE("all-hold profile collects the pure option values") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    auto val = value_tranches(contract, lat, q);
    TrancheProfile hold(2);
    for (const TrancheState& s : tranche_states(contract, lat)) {
        hold[0].put[s] = false;
        hold[1].put[s] = false;
    }
    auto pay = payoff_of_profile(contract, hold, lat, q, val);
    CHECK(pay.root == std::vector<Rational>{Rational(4) / 3, Rational(4) / 3});
}

TEST_CASE("unilateral deviations never beat the equilibrium value") {
    auto lat = two_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto contract = worked_contract();
    auto val = value_tranches(contract, lat, q);
    auto rep = verify_optimal_equilibrium(contract, lat, q, val);
    CHECK(rep.value_matches);
    CHECK(rep.nash_ok);
    CHECK(rep.guaranteed_ok);
}

TEST_CASE("contract validation catches malformed inputs") {
    auto lat = two_step_market<Rational>();
    auto contract = worked_contract();
    contract.decision_dates = {2};
    CHECK_THROWS_AS(validate_contract(contract, lat), HorizonError);
    contract.decision_dates = {1, 1};
    CHECK_THROWS_AS(validate_contract(contract, lat), SchemaError);
    contract = worked_contract();
    contract.put_payoffs[0][0] = {Rational(1)};
    CHECK_THROWS_AS(validate_contract(contract, lat), ShapeError);
}
