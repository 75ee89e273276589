#pragma once

// Shared hand-built games for the unit and acceptance suites.

#include <memory>

#include "gclaim/gamecore.hpp"

namespace gclaim::testing {

/// Deterministic one-date game, action 0 = cooperate, 1 = defect. Defecting
/// against a cooperator pays 2 and leaves the cooperator with -1; mutual
/// cooperation pays (1,1); mutual defection (0,0).
template <typename N>
GameSpec<N> prisoners_dilemma() {
    GameSpec<N> g;
    g.players = 2;
    g.action_counts = {2, 2};
    g.action_labels = {{"cooperate", "defect"}, {"cooperate", "defect"}};
    g.horizon = 0;
    g.terminates = nullptr;
    g.payoff = [](const GameState&, const JointAction& a) {
        auto one = [](int mine, int theirs) -> int {
            if (mine == 0 && theirs == 0) return 1;
            if (mine == 1 && theirs == 0) return 2;
            if (mine == 0 && theirs == 1) return -1;
            return 0;
        };
        return std::vector<N>{N(one(a[0], a[1])), N(one(a[1], a[0]))};
    };
    return g;
}

/// Same stakes for player 1, but player 2's payoff mirrors to the negative,
/// so the game is zero-sum with a saddle at (defect, defect).
template <typename N>
GameSpec<N> zero_sum_dilemma() {
    GameSpec<N> g = prisoners_dilemma<N>();
    auto base = g.payoff;
    g.payoff = [base](const GameState& s, const JointAction& a) {
        std::vector<N> v = base(s, a);
        v[1] = -v[0];
        return v;
    };
    return g;
}

/// Pure matching pennies: player 1 wins on a match. No pure saddle, so the
/// maximin/minimax gap is strict.
template <typename N>
GameSpec<N> matching_pennies() {
    GameSpec<N> g;
    g.players = 2;
    g.action_counts = {2, 2};
    g.horizon = 0;
    g.payoff = [](const GameState&, const JointAction& a) {
        N win = (a[0] == a[1]) ? N(1) : N(-1);
        return std::vector<N>{win, -win};
    };
    return g;
}

/// Constant payoff, settlement forced immediately.
template <typename N>
GameSpec<N> constant_game(std::vector<N> payout, int players) {
    GameSpec<N> g;
    g.players = players;
    g.action_counts.assign(players, 2);
    g.horizon = 0;
    g.payoff = [payout](const GameState&, const JointAction&) { return payout; };
    return g;
}

/// One player, two actions at the terminal date of a 1-step lattice: action 0
/// pays 3 only on the up node, action 1 pays 3 only on the down node. The
/// player decides at date 1 and therefore sees the node.
template <typename N>
GameSpec<N> node_pick_game() {
    GameSpec<N> g;
    g.players = 1;
    g.action_counts = {2};
    g.horizon = 1;
    g.terminates = nullptr;
    g.payoff = [](const GameState& s, const JointAction& a) {
        if (s.date == 0) return std::vector<N>{N(0)};
        bool up = s.node == 1;
        N pay = ((a[0] == 0) == up) ? N(3) : N(0);
        return std::vector<N>{pay};
    };
    return g;
}

/// Standard 1-step test market: S 4 -> {8, 2}, zero rate, q = 1/3.
template <typename N>
MarketLattice<N> one_step_market() {
    return build_lattice<N>(N(4), N(2), N(1) / N(2), N(1), 1);
}

template <typename N>
MarketLattice<N> two_step_market() {
    return build_lattice<N>(N(4), N(2), N(1) / N(2), N(1), 2);
}

/// Builds a profile from per-player choosers over the whole game.
template <typename N>
StrategyProfile make_profile(const GameSpec<N>& game, const MarketLattice<N>& lattice,
                             const std::function<int(int, const GameState&)>& choose) {
    StrategyProfile parts;
    for (int i = 0; i < game.players; ++i) {
        parts.push_back(make_strategy<N>(
            game, lattice, Coalition{{i}},
            [&, i](const GameState& s) { return JointAction{choose(i, s)}; }));
    }
    return parts;
}

/// Profile playing one fixed action per player everywhere.
template <typename N>
StrategyProfile constant_profile(const GameSpec<N>& game, const MarketLattice<N>& lattice,
                                 const std::vector<int>& actions) {
    return make_profile<N>(game, lattice,
                           [&](int player, const GameState&) { return actions[player]; });
}

} // namespace gclaim::testing
