#include <doctest.h>

#include <random>
#include <set>

#include "gclaim/equilibrium.hpp"
#include "support/fixtures.hpp"
#include "support/random_games.hpp"

using namespace gclaim;
using namespace gclaim::testing;

namespace {

/// Payoff matrix of a one-date deterministic 2x2 game, the hand oracle for
/// the equilibrium checks.
template <typename N>
std::vector<std::vector<std::vector<N>>> payoff_matrix(const GameSpec<N>& game) {
    std::vector<std::vector<std::vector<N>>> m(2, std::vector<std::vector<N>>(2));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            m[a][b] = game.payoff(root_state(), JointAction{a, b});
    return m;
}

} // namespace

TEST_CASE("dilemma: mutual defection is Nash, mutual cooperation is not") {
    auto game = prisoners_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);

    auto defect = constant_profile<Rational>(game, lat, {1, 1});
    auto res = is_nash(defect, game, lat, q);
    CHECK(res.is_nash);
    CHECK(res.payoffs == std::vector<Rational>{Rational(0), Rational(0)});

    auto cooperate = constant_profile<Rational>(game, lat, {0, 0});
    auto res2 = is_nash(cooperate, game, lat, q);
    CHECK_FALSE(res2.is_nash);
    REQUIRE(res2.deviating_player.has_value());
    // the defector collects 2 against the remaining cooperator's 1
    CHECK(res2.payoffs[*res2.deviating_player] == Rational(1));
    CHECK(res2.best_responses[*res2.deviating_player] == Rational(2));
    REQUIRE(res2.better_strategy.has_value());
    CHECK(res2.better_strategy->at(root_state()) == JointAction{1});
}

TEST_CASE("any profile of a constant game is Nash and optimal") {
    auto game = constant_game<Rational>({Rational(4), Rational(-1)}, 2);
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            auto profile = constant_profile<Rational>(game, lat, {a, b});
            CHECK(is_nash(profile, game, lat, q).is_nash);
            CHECK(is_optimal_equilibrium(profile, game, lat, q).is_optimal);
        }
}

TEST_CASE("dilemma: mutual defection is an optimal equilibrium") {
    auto game = prisoners_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto defect = constant_profile<Rational>(game, lat, {1, 1});
    auto res = is_optimal_equilibrium(defect, game, lat, q);
    CHECK(res.is_optimal);
    CHECK(res.guarantees == res.payoffs);
}

TEST_CASE("a coordination game has a Nash profile that is not optimal") {
    // (0,0) pays (2,2), (1,1) pays (1,1), mixed choices pay nothing
    GameSpec<Rational> game;
    game.players = 2;
    game.action_counts = {2, 2};
    game.horizon = 0;
    game.payoff = [](const GameState&, const JointAction& a) {
        if (a[0] == a[1]) {
            Rational v = a[0] == 0 ? Rational(2) : Rational(1);
            return std::vector<Rational>{v, v};
        }
        return std::vector<Rational>{Rational(0), Rational(0)};
    };
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);

    // oracle: verify with the payoff matrix by hand before asserting
    auto m = payoff_matrix(game);
    CHECK(m[1][1][0] >= m[0][1][0]); // player 1 cannot gain by leaving (1,1)
    CHECK(m[1][1][1] >= m[1][0][1]);
    CHECK(m[1][0][0] < m[1][1][0]);  // but the payoff is not guaranteed

    auto inferior = constant_profile<Rational>(game, lat, {1, 1});
    CHECK(is_nash(inferior, game, lat, q).is_nash);
    CHECK_FALSE(is_optimal_equilibrium(inferior, game, lat, q).is_optimal);
}

TEST_CASE("dilemma maximin and minimax are zero for each player") {
    auto game = prisoners_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    for (int k = 0; k < 2; ++k) {
        auto lo = maximin(Coalition{{k}}, game, lat, q);
        auto hi = minimax(Coalition{{k}}, game, lat, q);
        CHECK(lo.value == Rational(0));
        CHECK(hi.value == Rational(0));
        CHECK(game_value(Coalition{{k}}, game, lat, q) == Rational(0));
    }
}

TEST_CASE("matching pennies has a strict maximin/minimax gap and no value") {
    auto game = matching_pennies<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    Coalition one{{0}};

    // oracle: enumerate the 2x2 matrix extrema by hand
    auto m = payoff_matrix(game);
    Rational sup_inf = std::max(std::min(m[0][0][0], m[0][1][0]),
                                std::min(m[1][0][0], m[1][1][0]));
    Rational inf_sup = std::min(std::max(m[0][0][0], m[1][0][0]),
                                std::max(m[0][1][0], m[1][1][0]));
    CHECK(sup_inf == Rational(-1));
    CHECK(inf_sup == Rational(1));

    CHECK(maximin(one, game, lat, q).value == sup_inf);
    CHECK(minimax(one, game, lat, q).value == inf_sup);
    CHECK_FALSE(game_value(one, game, lat, q).has_value());
}

TEST_CASE("constant game value is the constant") {
    auto game = constant_game<Rational>({Rational(9), Rational(1)}, 2);
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    CHECK(game_value(Coalition{{0}}, game, lat, q) == Rational(9));
    CHECK(game_value(Coalition{{0, 1}}, game, lat, q) == Rational(10));
}

TEST_CASE("dilemma additivity fails exactly on the grand coalition") {
    auto game = prisoners_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto star = constant_profile<Rational>(game, lat, {1, 1});
    auto rep = coalition_additivity(star, game, lat, q);
    CHECK(rep.profile_is_optimal);
    CHECK_FALSE(rep.zero_sum);
    CHECK(rep.profile_total == Rational(0));
    CHECK(rep.planner_max == Rational(2));
    CHECK_FALSE(rep.sum_condition);
    CHECK_FALSE(rep.hypothesis_holds);
    CHECK_FALSE(rep.additivity_ok);
    for (const auto& ca : rep.coalitions) {
        if (ca.who.size() == 2) {
            CHECK_FALSE(ca.additive);
            CHECK(ca.value == Rational(2));
            CHECK(ca.member_sum == Rational(0));
        } else {
            CHECK(ca.additive);
        }
    }
}

TEST_CASE("zero-sum games with an optimal equilibrium are additive everywhere") {
    auto game = zero_sum_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    CHECK(is_zero_sum(game, lat));
    auto star = find_optimal_equilibrium(game, lat, q);
    auto rep = coalition_additivity(star, game, lat, q);
    CHECK(rep.profile_is_optimal);
    CHECK(rep.zero_sum);
    CHECK(rep.hypothesis_holds);
    CHECK(rep.additivity_ok);
    for (const auto& ca : rep.coalitions) CHECK(ca.additive);
}

TEST_CASE("appendix properties hold on random games, brute-force checked") {
    std::mt19937 rng(808);
    RandomGameParams params;
    params.max_profile_pairs = 1u << 10;
    for (int trial = 0; trial < 12; ++trial) {
        auto rg = random_game<Rational>(rng, params);
        const int m = rg.game.players;

        std::vector<Rational> lower(m), upper(m);
        for (int k = 0; k < m; ++k) {
            lower[k] = lower_price(Coalition{{k}}, rg.game, rg.lattice, rg.measure);
            upper[k] = upper_price(Coalition{{k}}, rg.game, rg.lattice, rg.measure);
            CHECK(lower[k] <= upper[k]);
        }

        std::set<std::vector<Rational>> optimal_values;
        for_each_profile<Rational>(
            rg.game, rg.lattice,
            [&](const StrategyProfile& profile) {
                auto opt =
                    is_optimal_equilibrium(profile, rg.game, rg.lattice, rg.measure);
                if (opt.is_nash)
                    for (int k = 0; k < m; ++k) CHECK(opt.payoffs[k] >= upper[k]);
                for (int k = 0; k < m; ++k) {
                    // guaranteed payoffs never exceed the maximin value
                    CHECK(opt.guarantees[k] <= lower[k]);
                }
                if (opt.is_optimal) {
                    for (int k = 0; k < m; ++k) {
                        CHECK(opt.payoffs[k] == lower[k]);
                        CHECK(opt.payoffs[k] == upper[k]);
                    }
                    optimal_values.insert(opt.payoffs);
                }
                return true;
            },
            root_state(), 1u << 10);
        CHECK(optimal_values.size() <= 1);
    }
}

TEST_CASE("equilibrium pricing reproduces the dilemma report") {
    auto game = prisoners_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto pricing = price_by_equilibrium(game, lat, q);
    CHECK(pricing.tranche_prices == std::vector<Rational>{Rational(0), Rational(0)});
    CHECK_FALSE(pricing.condition_holds);
    for (const auto& cp : pricing.coalitions) {
        if (cp.who.size() == 2) {
            CHECK_FALSE(cp.additive);
            CHECK(cp.lower == Rational(2));
            CHECK(cp.upper == Rational(2));
        } else {
            CHECK(cp.additive);
            CHECK(cp.price == Rational(0));
        }
    }
}

TEST_CASE("equilibrium pricing of the zero-sum variant is additive") {
    auto game = zero_sum_dilemma<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto pricing = price_by_equilibrium(game, lat, q);
    CHECK(pricing.condition_holds);
    CHECK(pricing.tranche_prices == std::vector<Rational>{Rational(0), Rational(0)});
    for (const auto& cp : pricing.coalitions) {
        CHECK(cp.additive);
        REQUIRE(cp.price.has_value());
        Rational sum{0};
        for (int i : cp.who.members) sum += pricing.tranche_prices[i];
        CHECK(*cp.price == sum);
    }
}

TEST_CASE("constant game prices every tranche at its constant") {
    auto game = constant_game<Rational>({Rational(3), Rational(5)}, 2);
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    auto pricing = price_by_equilibrium(game, lat, q);
    CHECK(pricing.tranche_prices == std::vector<Rational>{Rational(3), Rational(5)});
    CHECK(pricing.condition_holds);
    for (const auto& cp : pricing.coalitions) CHECK(cp.additive);
}

TEST_CASE("games without optimal equilibria report the failure") {
    auto game = matching_pennies<Rational>();
    auto lat = one_step_market<Rational>();
    auto q = martingale_measure(lat);
    CHECK_THROWS_AS(find_optimal_equilibrium(game, lat, q), NoEquilibriumFound);
    CHECK_THROWS_AS(price_by_equilibrium(game, lat, q), NoEquilibriumFound);
}

TEST_CASE("lower prices are super-additive over partitions") {
    std::mt19937 rng(909);
    for (int trial = 0; trial < 15; ++trial) {
        auto rg = random_game<Rational>(rng);
        if (rg.game.players < 2) continue;
        Rational whole =
            lower_price(Coalition{{0, 1}}, rg.game, rg.lattice, rg.measure);
        Rational parts =
            lower_price(Coalition{{0}}, rg.game, rg.lattice, rg.measure) +
            lower_price(Coalition{{1}}, rg.game, rg.lattice, rg.measure);
        CHECK(parts <= whole);
    }
}
