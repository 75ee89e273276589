#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gclaim/valuation.hpp"

namespace gclaim {

/// All nonempty subsets of {0..players-1}, ordered by (size, lexicographic
/// members). The ordering is part of the reporting contract.
inline std::vector<Coalition> all_coalitions(int players) {
    std::vector<Coalition> out;
    for (unsigned mask = 1; mask < (1u << players); ++mask) {
        std::vector<int> members;
        for (int i = 0; i < players; ++i)
            if (mask & (1u << i)) members.push_back(i);
        out.emplace_back(std::move(members));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// True iff every reachable settlement pays out a zero total.
template <typename N>
bool is_zero_sum(const GameSpec<N>& game, const MarketLattice<N>& lattice) {
    validate_game(game, lattice);
    Coalition everyone = Coalition::all(game.players);
    bool zero = true;
    std::function<void(const GameState&)> walk = [&](const GameState& s) {
        if (!zero) return;
        detail::for_each_action_tuple(
            game.action_counts, everyone.members, [&](const JointAction& a) {
                if (!zero) return;
                if (game.settles(s, a)) {
                    std::vector<N> v = game.settlement_payoff(s, a);
                    N sum{0};
                    for (const N& x : v) sum += x;
                    if (!num_eq(sum, N(0))) zero = false;
                    return;
                }
                GameState child{s.date + 1, s.node, s.history};
                child.history.push_back(a);
                walk(child);
                child.node += 1;
                walk(child);
            });
    };
    walk(root_state());
    return zero;
}

/// The best value player k can reach once the rest of the profile is fixed.
template <typename N>
N best_response_value(int player, const StrategyProfile& profile,
                      const GameSpec<N>& game, const MarketLattice<N>& lattice,
                      const MartingaleMeasure<N>& measure,
                      const GameState& at_state = root_state()) {
    Coalition me{{player}};
    Coalition rest = me.complement(game.players);
    CoalitionStrategy others = restrict_profile(profile, rest, game, lattice, at_state);
    return snell_envelope(me, others, game, lattice, measure, at_state).at(at_state);
}

/// The payoff player k can guarantee by committing to the profile's own
/// strategy while everyone else deviates adversarially.
template <typename N>
N guaranteed_value(int player, const StrategyProfile& profile, const GameSpec<N>& game,
                   const MarketLattice<N>& lattice, const MartingaleMeasure<N>& measure,
                   const GameState& at_state = root_state()) {
    Coalition me{{player}};
    Coalition rest = me.complement(game.players);
    CoalitionStrategy mine = restrict_profile(profile, me, game, lattice, at_state);
    ValueTable<N> adversary = snell_envelope_against<N>(
        game, lattice, measure, rest, mine,
        [&](const GameState& s, const JointAction& a) {
            return -game.settlement_payoff(s, a)[player];
        },
        at_state);
    return -adversary.at(at_state);
}

template <typename N>
struct NashResult {
    bool is_nash = true;
    std::vector<N> payoffs;
    std::vector<N> best_responses;
    std::optional<int> deviating_player;
    std::optional<CoalitionStrategy> better_strategy;
};

/// Tests whether no player gains from a unilateral change, by best-response
/// backward induction with the rest of the profile fixed.
template <typename N>
NashResult<N> is_nash(const StrategyProfile& profile, const GameSpec<N>& game,
                      const MarketLattice<N>& lattice, const MartingaleMeasure<N>& measure,
                      const GameState& at_state = root_state()) {
    NashResult<N> res;
    res.payoffs = expected_discounted_payoffs(profile, game, lattice, measure, at_state);
    res.best_responses.resize(game.players);
    for (int k = 0; k < game.players; ++k) {
        Coalition me{{k}};
        Coalition rest = me.complement(game.players);
        CoalitionStrategy others =
            restrict_profile(profile, rest, game, lattice, at_state);
        ValueTable<N> table =
            snell_envelope(me, others, game, lattice, measure, at_state);
        res.best_responses[k] = table.at(at_state);
        if (res.is_nash && num_lt(res.payoffs[k], res.best_responses[k])) {
            res.is_nash = false;
            res.deviating_player = k;
            // off the fixed opponents' play the table is silent and the choice
            // is payoff-irrelevant; default to the first action there
            res.better_strategy = make_strategy<N>(
                game, lattice, me,
                [&](const GameState& s) {
                    auto it = table.best.find(s);
                    return it != table.best.end() ? it->second : JointAction{0};
                },
                at_state);
        }
    }
    return res;
}

template <typename N>
struct OptimalityResult {
    bool is_nash = false;
    bool is_optimal = false;
    std::vector<N> payoffs;
    std::vector<N> guarantees;
};

/// Saddle check in both directions: Nash plus every player's payoff being
/// guaranteed against arbitrary opponent-coalition deviations.
template <typename N>
OptimalityResult<N> is_optimal_equilibrium(const StrategyProfile& profile,
                                           const GameSpec<N>& game,
                                           const MarketLattice<N>& lattice,
                                           const MartingaleMeasure<N>& measure,
                                           const GameState& at_state = root_state()) {
    OptimalityResult<N> res;
    NashResult<N> nash = is_nash(profile, game, lattice, measure, at_state);
    res.is_nash = nash.is_nash;
    res.payoffs = nash.payoffs;
    res.guarantees.resize(game.players);
    bool guaranteed = true;
    for (int k = 0; k < game.players; ++k) {
        res.guarantees[k] = guaranteed_value(k, profile, game, lattice, measure, at_state);
        if (num_lt(res.guarantees[k], res.payoffs[k])) guaranteed = false;
    }
    res.is_optimal = res.is_nash && guaranteed;
    return res;
}

/// Maximin: what the coalition can guarantee (the lower price of its combined
/// tranche). The witness realises the supremum.
template <typename N>
struct ExtremeValue {
    N value;
    CoalitionStrategy witness;
};

template <typename N>
ExtremeValue<N> maximin(const Coalition& who, const GameSpec<N>& game,
                        const MarketLattice<N>& lattice,
                        const MartingaleMeasure<N>& measure,
                        const GameState& at_state = root_state()) {
    return ExtremeValue<N>{lower_price(who, game, lattice, measure, at_state),
                           maximin_own_strategy(who, game, lattice, measure, at_state)};
}

/// Minimax: the worst the complement can force on the coalition (the upper
/// price). The witness is the punishing opponent mapping.
template <typename N>
ExtremeValue<N> minimax(const Coalition& who, const GameSpec<N>& game,
                        const MarketLattice<N>& lattice,
                        const MartingaleMeasure<N>& measure,
                        const GameState& at_state = root_state()) {
    return ExtremeValue<N>{upper_price(who, game, lattice, measure, at_state),
                           minimax_opponent_strategy(who, game, lattice, measure, at_state)};
}

/// Present only when maximin and minimax agree.
template <typename N>
std::optional<N> game_value(const Coalition& who, const GameSpec<N>& game,
                            const MarketLattice<N>& lattice,
                            const MartingaleMeasure<N>& measure,
                            const GameState& at_state = root_state()) {
    N lo = lower_price(who, game, lattice, measure, at_state);
    N hi = upper_price(who, game, lattice, measure, at_state);
    if (num_eq(lo, hi)) return lo;
    return std::nullopt;
}

/// Enumerates full profiles in lexicographic per-player order.
template <typename N>
void for_each_profile(const GameSpec<N>& game, const MarketLattice<N>& lattice,
                      const std::function<bool(const StrategyProfile&)>& visit,
                      const GameState& from = root_state(),
                      std::uint64_t budget = kDefaultEnumerationBudget) {
    std::vector<std::vector<CoalitionStrategy>> per_player;
    std::uint64_t combos = 1;
    for (int i = 0; i < game.players; ++i) {
        per_player.push_back(
            enumerate_strategies(game, lattice, Coalition{{i}}, from, budget));
        combos *= per_player.back().size();
        if (combos > budget) throw BudgetExceeded("profile space exceeds budget");
    }
    std::vector<std::size_t> pick(game.players, 0);
    while (true) {
        StrategyProfile profile;
        for (int i = 0; i < game.players; ++i) profile.push_back(per_player[i][pick[i]]);
        if (!visit(profile)) return;
        int k = game.players - 1;
        while (k >= 0) {
            if (++pick[k] < per_player[k].size()) break;
            pick[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
}

/// Exhaustive search for an optimal equilibrium, first hit in deterministic
/// order. Throws NoEquilibriumFound when the space is exhausted.
template <typename N>
StrategyProfile find_optimal_equilibrium(const GameSpec<N>& game,
                                         const MarketLattice<N>& lattice,
                                         const MartingaleMeasure<N>& measure,
                                         const GameState& at_state = root_state(),
                                         std::uint64_t budget = kDefaultEnumerationBudget) {
    std::optional<StrategyProfile> found;
    for_each_profile<N>(
        game, lattice,
        [&](const StrategyProfile& profile) {
            OptimalityResult<N> r =
                is_optimal_equilibrium(profile, game, lattice, measure, at_state);
            if (r.is_optimal) {
                found = profile;
                return false;
            }
            return true;
        },
        at_state, budget);
    if (!found) throw NoEquilibriumFound("no optimal equilibrium in the profile space");
    return *found;
}

template <typename N>
struct CoalitionAdditivity {
    Coalition who;
    N lower;
    N upper;
    std::optional<N> value; // present iff lower == upper
    N member_sum;           // sum of the equilibrium values over the coalition
    bool additive = false;  // lower == upper == member_sum
};

template <typename N>
struct AdditivityReport {
    bool profile_is_optimal = false;
    bool zero_sum = false;
    bool sum_condition = false; // equilibrium total attains the planner maximum
    N planner_max{};
    N profile_total{};
    std::vector<N> player_values;
    std::vector<CoalitionAdditivity<N>> coalitions;
    bool hypothesis_holds = false;
    bool additivity_ok = false;
};

/// Checks the additivity hypothesis (zero-sum, or the equilibrium attaining
/// the single-planner maximum) and verifies coalition-by-coalition whether
/// the coalition value exists and equals the sum of member values.
template <typename N>
AdditivityReport<N> coalition_additivity(const StrategyProfile& equilibrium,
                                         const GameSpec<N>& game,
                                         const MarketLattice<N>& lattice,
                                         const MartingaleMeasure<N>& measure,
                                         const GameState& at_state = root_state()) {
    AdditivityReport<N> rep;
    OptimalityResult<N> opt =
        is_optimal_equilibrium(equilibrium, game, lattice, measure, at_state);
    rep.profile_is_optimal = opt.is_optimal;
    rep.player_values = opt.payoffs;
    rep.zero_sum = is_zero_sum(game, lattice);
    rep.planner_max =
        upper_price(Coalition::all(game.players), game, lattice, measure, at_state);
    rep.profile_total = N(0);
    for (const N& v : rep.player_values) rep.profile_total += v;
    rep.sum_condition = num_eq(rep.profile_total, rep.planner_max);
    rep.hypothesis_holds = rep.zero_sum || rep.sum_condition;

    rep.additivity_ok = true;
    for (const Coalition& a : all_coalitions(game.players)) {
        CoalitionAdditivity<N> ca;
        ca.who = a;
        ca.lower = lower_price(a, game, lattice, measure, at_state);
        ca.upper = upper_price(a, game, lattice, measure, at_state);
        if (num_eq(ca.lower, ca.upper)) ca.value = ca.lower;
        ca.member_sum = N(0);
        for (int i : a.members) ca.member_sum += rep.player_values[i];
        ca.additive = ca.value && num_eq(*ca.value, ca.member_sum);
        if (!ca.additive) rep.additivity_ok = false;
        rep.coalitions.push_back(std::move(ca));
    }
    return rep;
}

template <typename N>
struct CoalitionPrice {
    Coalition who;
    bool additive = false;
    N lower{};
    N upper{};
    std::optional<N> price; // the unique price when additive
};

template <typename N>
struct EquilibriumPricing {
    StrategyProfile profile;
    std::vector<N> tranche_prices;
    bool condition_holds = false; // sum of values attains the planner maximum
    N planner_max{};
    std::vector<CoalitionPrice<N>> coalitions;
};

/// Prices every tranche at the equilibrium value vector; combined tranches
/// are priced additively when the planner condition holds and otherwise fall
/// back to their no-arbitrage interval with a flag.
template <typename N>
EquilibriumPricing<N> price_by_equilibrium(
    const GameSpec<N>& game, const MarketLattice<N>& lattice,
    const MartingaleMeasure<N>& measure, const GameState& at_state = root_state(),
    std::uint64_t budget = kDefaultEnumerationBudget,
    const std::optional<StrategyProfile>& supplied = std::nullopt) {
    EquilibriumPricing<N> out;
    if (supplied) {
        OptimalityResult<N> r =
            is_optimal_equilibrium(*supplied, game, lattice, measure, at_state);
        if (!r.is_optimal)
            throw NoEquilibriumFound("supplied profile is not an optimal equilibrium");
        out.profile = *supplied;
    } else {
        out.profile = find_optimal_equilibrium(game, lattice, measure, at_state, budget);
    }
    out.tranche_prices =
        expected_discounted_payoffs(out.profile, game, lattice, measure, at_state);
    out.planner_max =
        upper_price(Coalition::all(game.players), game, lattice, measure, at_state);
    N total{0};
    for (const N& v : out.tranche_prices) total += v;
    out.condition_holds = num_eq(total, out.planner_max);
    for (const Coalition& a : all_coalitions(game.players)) {
        CoalitionPrice<N> cp;
        cp.who = a;
        N sum{0};
        for (int i : a.members) sum += out.tranche_prices[i];
        if (out.condition_holds) {
            cp.additive = true;
            cp.price = sum;
            cp.lower = cp.upper = sum;
        } else {
            cp.lower = lower_price(a, game, lattice, measure, at_state);
            cp.upper = upper_price(a, game, lattice, measure, at_state);
            cp.additive = num_eq(cp.lower, cp.upper) && num_eq(cp.lower, sum);
            if (cp.additive) cp.price = sum;
        }
        out.coalitions.push_back(std::move(cp));
    }
    return out;
}

} // namespace gclaim
