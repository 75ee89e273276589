#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gclaim/gamecore.hpp"

namespace gclaim {

/// Discounted state values for one optimizing coalition, together with the
/// optimizer's maximising action tuple at every state.
template <typename N>
struct ValueTable {
    Coalition optimizer;
    std::map<GameState, N> value;
    std::map<GameState, JointAction> best;

    const N& at(const GameState& s) const {
        auto it = value.find(s);
        if (it == value.end()) throw DomainError("state not covered by value table");
        return it->second;
    }
};

/// Discounted coalition payoff at a settlement point.
template <typename N>
N discounted_coalition_payoff(const GameSpec<N>& game, const MarketLattice<N>& lattice,
                              const Coalition& who, const GameState& s,
                              const JointAction& a) {
    std::vector<N> v = game.settlement_payoff(s, a);
    N sum{0};
    for (int i : who.members) sum += v[i];
    return sum / lattice.numeraire(s.date);
}

/// Backward recursion for the envelope of best replies: the optimizer's
/// coalition maximises the scalar payoff while the complement plays the fixed
/// strategy. `payoff_fn` returns currency at the settlement date; values are
/// stored discounted. Ties resolve to the first action tuple in declared
/// order.
template <typename N>
ValueTable<N> snell_envelope_against(
    const GameSpec<N>& game, const MarketLattice<N>& lattice,
    const MartingaleMeasure<N>& measure, const Coalition& optimizer,
    const CoalitionStrategy& fixed,
    const std::function<N(const GameState&, const JointAction&)>& payoff_fn,
    const GameState& from = root_state()) {
    validate_game(game, lattice);
    ValueTable<N> table;
    table.optimizer = optimizer;
    const Coalition& fixed_side = fixed.members;
    const N q = measure.up_probability;
    const N p = measure.down_probability();

    std::function<N(const GameState&)> solve = [&](const GameState& s) -> N {
        auto hit = table.value.find(s);
        if (hit != table.value.end()) return hit->second;
        const JointAction& fa = fixed.at(s);
        std::optional<N> best;
        JointAction best_tuple;
        detail::for_each_action_tuple(
            game.action_counts, optimizer.members, [&](const JointAction& ca) {
                JointAction joint =
                    detail::weave(game.players, optimizer, ca, fixed_side, fa);
                N v;
                if (game.settles(s, joint)) {
                    v = payoff_fn(s, joint) / lattice.numeraire(s.date);
                } else {
                    GameState child{s.date + 1, s.node, s.history};
                    child.history.push_back(joint);
                    N dn = solve(child);
                    child.node += 1;
                    N up = solve(child);
                    v = q * up + p * dn;
                }
                if (!best || v > *best) {
                    best = v;
                    best_tuple = ca;
                }
            });
        table.value[s] = *best;
        table.best[s] = best_tuple;
        return *best;
    };
    solve(from);
    return table;
}

/// Envelope of the coalition's expected discounted payoff against a fixed
/// opponent strategy: the maximal value the coalition can still achieve from
/// each state once the opponent's mapping is committed.
template <typename N>
ValueTable<N> snell_envelope(const Coalition& coalition,
                             const CoalitionStrategy& opponent_strategy,
                             const GameSpec<N>& game, const MarketLattice<N>& lattice,
                             const MartingaleMeasure<N>& measure,
                             const GameState& from = root_state()) {
    return snell_envelope_against<N>(
        game, lattice, measure, coalition, opponent_strategy,
        [&](const GameState& s, const JointAction& a) {
            std::vector<N> v = game.settlement_payoff(s, a);
            N sum{0};
            for (int i : coalition.members) sum += v[i];
            return sum;
        },
        from);
}

/// Stage-wise minimax values over the full game tree. For `upper`, the
/// opponents commit first at every state and the coalition best-responds; for
/// `lower` the roles swap. Both argmin/argmax mappings are recorded so the
/// attaining strategies can be materialised as witnesses.
template <typename N>
struct StageValues {
    Coalition coalition;
    bool upper = true;
    std::map<GameState, N> value;
    std::map<GameState, JointAction> own_choice; // coalition tuple per state
    std::map<GameState, JointAction> opp_choice; // complement tuple per state

    const N& at(const GameState& s) const {
        auto it = value.find(s);
        if (it == value.end()) throw DomainError("state not covered by stage values");
        return it->second;
    }
};

template <typename N>
StageValues<N> stage_values(const Coalition& coalition, bool upper,
                            const GameSpec<N>& game, const MarketLattice<N>& lattice,
                            const MartingaleMeasure<N>& measure,
                            const GameState& from = root_state()) {
    validate_game(game, lattice);
    StageValues<N> table;
    table.coalition = coalition;
    table.upper = upper;
    Coalition opponents = coalition.complement(game.players);
    const N q = measure.up_probability;
    const N p = measure.down_probability();

    std::function<N(const GameState&)> solve = [&](const GameState& s) -> N {
        auto hit = table.value.find(s);
        if (hit != table.value.end()) return hit->second;
        std::optional<N> outer;
        JointAction outer_own, outer_opp;
        detail::for_each_action_tuple(
            game.action_counts, (upper ? opponents : coalition).members,
            [&](const JointAction& first_tuple) {
                std::optional<N> inner;
                JointAction inner_tuple;
                detail::for_each_action_tuple(
                    game.action_counts, (upper ? coalition : opponents).members,
                    [&](const JointAction& second_tuple) {
                        const JointAction& ca = upper ? second_tuple : first_tuple;
                        const JointAction& oa = upper ? first_tuple : second_tuple;
                        JointAction joint =
                            detail::weave(game.players, coalition, ca, opponents, oa);
                        N v;
                        if (game.settles(s, joint)) {
                            v = discounted_coalition_payoff(game, lattice, coalition, s,
                                                            joint);
                        } else {
                            GameState child{s.date + 1, s.node, s.history};
                            child.history.push_back(joint);
                            N dn = solve(child);
                            child.node += 1;
                            N up = solve(child);
                            v = q * up + p * dn;
                        }
                        // inner: best reply of the side moving second
                        bool better = !inner || (upper ? v > *inner : v < *inner);
                        if (better) {
                            inner = v;
                            inner_tuple = second_tuple;
                        }
                    });
                bool better = !outer || (upper ? *inner < *outer : *inner > *outer);
                if (better) {
                    outer = *inner;
                    if (upper) {
                        outer_opp = first_tuple;
                        outer_own = inner_tuple;
                    } else {
                        outer_own = first_tuple;
                        outer_opp = inner_tuple;
                    }
                }
            });
        table.value[s] = *outer;
        table.own_choice[s] = outer_own;
        table.opp_choice[s] = outer_opp;
        return *outer;
    };
    solve(from);
    return table;
}

template <typename N>
N upper_price(const Coalition& coalition, const GameSpec<N>& game,
              const MarketLattice<N>& lattice, const MartingaleMeasure<N>& measure,
              const GameState& at_state = root_state()) {
    return stage_values(coalition, true, game, lattice, measure, at_state).at(at_state);
}

template <typename N>
N lower_price(const Coalition& coalition, const GameSpec<N>& game,
              const MarketLattice<N>& lattice, const MartingaleMeasure<N>& measure,
              const GameState& at_state = root_state()) {
    return stage_values(coalition, false, game, lattice, measure, at_state).at(at_state);
}

/// Coalition no-arbitrage interval in discounted units.
template <typename N>
struct PriceInterval {
    Coalition coalition;
    N lower;
    N upper;

    bool contains(const N& quote) const {
        return num_le(lower, quote) && num_le(quote, upper);
    }
};

template <typename N>
PriceInterval<N> price_interval(const Coalition& coalition, const GameSpec<N>& game,
                                const MarketLattice<N>& lattice,
                                const MartingaleMeasure<N>& measure,
                                const GameState& at_state = root_state()) {
    return PriceInterval<N>{coalition,
                            lower_price(coalition, game, lattice, measure, at_state),
                            upper_price(coalition, game, lattice, measure, at_state)};
}

/// Materialises the opponents' minimising mapping of the upper-price
/// recursion as a full strategy (the issuer-side witness).
template <typename N>
CoalitionStrategy minimax_opponent_strategy(const Coalition& coalition,
                                            const GameSpec<N>& game,
                                            const MarketLattice<N>& lattice,
                                            const MartingaleMeasure<N>& measure,
                                            const GameState& from = root_state()) {
    StageValues<N> t = stage_values(coalition, true, game, lattice, measure, from);
    Coalition opponents = coalition.complement(game.players);
    return make_strategy<N>(
        game, lattice, opponents,
        [&](const GameState& s) { return t.opp_choice.at(s); }, from);
}

/// Materialises the coalition's maximin mapping of the lower-price recursion.
template <typename N>
CoalitionStrategy maximin_own_strategy(const Coalition& coalition,
                                       const GameSpec<N>& game,
                                       const MarketLattice<N>& lattice,
                                       const MartingaleMeasure<N>& measure,
                                       const GameState& from = root_state()) {
    StageValues<N> t = stage_values(coalition, false, game, lattice, measure, from);
    return make_strategy<N>(
        game, lattice, coalition,
        [&](const GameState& s) { return t.own_choice.at(s); }, from);
}

// ---------------------------------------------------------------------------
// Super-hedging
// ---------------------------------------------------------------------------

template <typename N>
struct HedgeNode;

/// One joint action branch out of a live state: either the claim settles, or
/// holdings carry the wealth to both market children.
template <typename N>
struct HedgeBranch {
    JointAction action;
    bool settles = false;
    N payoff{};      // discounted target payoff when settling
    N bond_units{};  // units of the numeraire asset held over (t, t+1]
    N stock_units{}; // units of stock held over (t, t+1]
    std::unique_ptr<HedgeNode<N>> down;
    std::unique_ptr<HedgeNode<N>> up;
};

template <typename N>
struct HedgeNode {
    GameState state;
    N wealth{}; // discounted wealth carried into the state
    N target{}; // envelope value the wealth must dominate
    std::vector<HedgeBranch<N>> branches;
};

/// Self-financing portfolio plan whose discounted wealth is a one-step
/// martingale and dominates the envelope value along every play against the
/// fixed strategy.
template <typename N>
struct HedgePortfolio {
    Coalition free_side;  // the side whose deviations the hedge must survive
    CoalitionStrategy fixed; // the strategy the hedge is built against
    N initial_wealth{};
    std::unique_ptr<HedgeNode<N>> root;
};

template <typename N>
HedgePortfolio<N> build_hedge(
    const GameSpec<N>& game, const MarketLattice<N>& lattice,
    const MartingaleMeasure<N>& measure, const Coalition& free_side,
    const CoalitionStrategy& fixed,
    const std::function<N(const GameState&, const JointAction&)>& payoff_fn,
    const GameState& from = root_state()) {
    ValueTable<N> envelope = snell_envelope_against<N>(game, lattice, measure, free_side,
                                                       fixed, payoff_fn, from);
    const N q = measure.up_probability;
    const N p = measure.down_probability();

    std::function<std::unique_ptr<HedgeNode<N>>(const GameState&, const N&)> grow =
        [&](const GameState& s, const N& wealth) {
            auto node = std::make_unique<HedgeNode<N>>();
            node->state = s;
            node->wealth = wealth;
            node->target = envelope.at(s);
            const JointAction& fa = fixed.at(s);
            detail::for_each_action_tuple(
                game.action_counts, free_side.members, [&](const JointAction& ca) {
                    HedgeBranch<N> br;
                    br.action = detail::weave(game.players, free_side, ca,
                                              fixed.members, fa);
                    if (game.settles(s, br.action)) {
                        br.settles = true;
                        br.payoff = payoff_fn(s, br.action) / lattice.numeraire(s.date);
                    } else {
                        GameState dn{s.date + 1, s.node, s.history};
                        dn.history.push_back(br.action);
                        GameState up = dn;
                        up.node += 1;
                        const N vu = envelope.at(up);
                        const N vd = envelope.at(dn);
                        const N carry = wealth - (q * vu + p * vd);
                        const N tu = vu + carry;
                        const N td = vd + carry;
                        const N su = lattice.discounted_price(up.date, up.node);
                        const N sd = lattice.discounted_price(dn.date, dn.node);
                        if (!(su > sd))
                            throw SingularReplication("coincident child prices");
                        br.stock_units = (tu - td) / (su - sd);
                        br.bond_units = tu - br.stock_units * su;
                        br.up = grow(up, tu);
                        br.down = grow(dn, td);
                    }
                    node->branches.push_back(std::move(br));
                });
            return node;
        };

    HedgePortfolio<N> plan;
    plan.free_side = free_side;
    plan.fixed = fixed;
    plan.initial_wealth = envelope.at(from);
    plan.root = grow(from, plan.initial_wealth);
    return plan;
}

/// Issuer-side super-hedge against a committed opponent strategy: starts at
/// the envelope value and dominates the coalition's discounted payoff at
/// settlement, whatever the coalition plays.
template <typename N>
HedgePortfolio<N> superhedge_issuer(const Coalition& coalition,
                                    const CoalitionStrategy& opponent_strategy,
                                    const GameSpec<N>& game,
                                    const MarketLattice<N>& lattice,
                                    const MartingaleMeasure<N>& measure,
                                    const GameState& from = root_state()) {
    return build_hedge<N>(
        game, lattice, measure, coalition, opponent_strategy,
        [&](const GameState& s, const JointAction& a) {
            std::vector<N> v = game.settlement_payoff(s, a);
            N sum{0};
            for (int i : coalition.members) sum += v[i];
            return sum;
        },
        from);
}

/// Holder-side super-hedge for a committed own strategy: dominates the
/// negative of the coalition payoff against every opponent deviation.
template <typename N>
HedgePortfolio<N> superhedge_holder(const Coalition& coalition,
                                    const CoalitionStrategy& own_strategy,
                                    const GameSpec<N>& game,
                                    const MarketLattice<N>& lattice,
                                    const MartingaleMeasure<N>& measure,
                                    const GameState& from = root_state()) {
    Coalition opponents = coalition.complement(game.players);
    return build_hedge<N>(
        game, lattice, measure, opponents, own_strategy,
        [&](const GameState& s, const JointAction& a) {
            std::vector<N> v = game.settlement_payoff(s, a);
            N sum{0};
            for (int i : coalition.members) sum += v[i];
            return -sum;
        },
        from);
}

/// Walks every play of the hedge tree and reports whether settlement wealth
/// dominates the settlement payoff on all of them, with the worst margin.
template <typename N>
struct HedgeDominationReport {
    bool dominates = true;
    N worst_margin{};
    bool any_settlement = false;
};

template <typename N>
void hedge_domination_walk(const HedgeNode<N>& node, HedgeDominationReport<N>& rep) {
    for (const HedgeBranch<N>& br : node.branches) {
        if (br.settles) {
            N margin = node.wealth - br.payoff;
            if (!rep.any_settlement || margin < rep.worst_margin)
                rep.worst_margin = margin;
            rep.any_settlement = true;
            if (num_lt(margin, N(0))) rep.dominates = false;
        } else {
            hedge_domination_walk(*br.up, rep);
            hedge_domination_walk(*br.down, rep);
        }
    }
}

template <typename N>
HedgeDominationReport<N> verify_hedge_domination(const HedgePortfolio<N>& plan) {
    HedgeDominationReport<N> rep;
    hedge_domination_walk(*plan.root, rep);
    return rep;
}

/// Initial-wealth bound check: every issuer hedge starts at or above the
/// upper price; every holder hedge starts at or above the negated lower
/// price. The minima over committed strategies are reported so equality with
/// the interval endpoints can be asserted.
template <typename N>
struct SuperhedgeBoundsReport {
    N lower;
    N upper;
    N cheapest_issuer_initial;
    N cheapest_holder_initial;
    bool issuer_side_ok = true;
    bool holder_side_ok = true;
};

template <typename N>
SuperhedgeBoundsReport<N> superhedge_bounds_check(
    const Coalition& coalition, const GameSpec<N>& game, const MarketLattice<N>& lattice,
    const MartingaleMeasure<N>& measure, const GameState& at_state = root_state(),
    std::uint64_t budget = kDefaultEnumerationBudget) {
    SuperhedgeBoundsReport<N> rep{lower_price(coalition, game, lattice, measure, at_state),
                                  upper_price(coalition, game, lattice, measure, at_state),
                                  N(0), N(0)};
    Coalition opponents = coalition.complement(game.players);
    bool first = true;
    for_each_coalition_strategy<N>(
        game, lattice, opponents,
        [&](const CoalitionStrategy& sigma) {
            N w = snell_envelope(coalition, sigma, game, lattice, measure, at_state)
                      .at(at_state);
            if (num_lt(w, rep.upper)) rep.issuer_side_ok = false;
            if (first || w < rep.cheapest_issuer_initial) rep.cheapest_issuer_initial = w;
            first = false;
        },
        at_state, budget);
    first = true;
    for_each_coalition_strategy<N>(
        game, lattice, coalition,
        [&](const CoalitionStrategy& tau) {
            N w = superhedge_holder(coalition, tau, game, lattice, measure, at_state)
                      .initial_wealth;
            if (num_lt(w, -rep.lower)) rep.holder_side_ok = false;
            if (first || w < rep.cheapest_holder_initial) rep.cheapest_holder_initial = w;
            first = false;
        },
        at_state, budget);
    return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration oracle
// ---------------------------------------------------------------------------

template <typename N>
struct BruteForceValues {
    N sup_inf; // lower value: coalition commits, opponents punish
    N inf_sup; // upper value: opponents commit, coalition best-responds
};

/// Definitional extrema of the expected discounted coalition payoff, by full
/// enumeration of both sides' strategies. Exact; intended for desk-scale
/// cross-checks of the stage-wise recursions.
template <typename N>
BruteForceValues<N> brute_force_values(const Coalition& coalition,
                                       const GameSpec<N>& game,
                                       const MarketLattice<N>& lattice,
                                       const MartingaleMeasure<N>& measure,
                                       const GameState& at_state = root_state(),
                                       std::uint64_t budget = kDefaultEnumerationBudget) {
    Coalition opponents = coalition.complement(game.players);
    std::vector<CoalitionStrategy> own =
        enumerate_strategies(game, lattice, coalition, at_state, budget);
    std::vector<CoalitionStrategy> opp =
        enumerate_strategies(game, lattice, opponents, at_state, budget);
    if (own.size() * opp.size() > budget)
        throw BudgetExceeded("strategy pair space exceeds budget");

    std::vector<std::vector<N>> table(own.size(), std::vector<N>(opp.size()));
    for (std::size_t i = 0; i < own.size(); ++i)
        for (std::size_t j = 0; j < opp.size(); ++j)
            table[i][j] = expected_discounted_coalition_payoff(
                StrategyProfile{own[i], opp[j]}, coalition, game, lattice, measure,
                at_state);

    std::optional<N> sup_inf, inf_sup;
    for (std::size_t i = 0; i < own.size(); ++i) {
        std::optional<N> row_min;
        for (std::size_t j = 0; j < opp.size(); ++j)
            if (!row_min || table[i][j] < *row_min) row_min = table[i][j];
        if (!sup_inf || *row_min > *sup_inf) sup_inf = *row_min;
    }
    for (std::size_t j = 0; j < opp.size(); ++j) {
        std::optional<N> col_max;
        for (std::size_t i = 0; i < own.size(); ++i)
            if (!col_max || table[i][j] > *col_max) col_max = table[i][j];
        if (!inf_sup || *col_max < *inf_sup) inf_sup = *col_max;
    }
    return BruteForceValues<N>{*sup_inf, *inf_sup};
}

} // namespace gclaim
