#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclaim/gamecore.hpp"
#include "gclaim/tranches.hpp"

namespace gclaim {

/// Parsed but untyped contract description (schema version 1). Numeric fields
/// stay as strings so both numeric modes can consume them exactly.
struct LatticeConfig {
    std::string initial_price;
    std::string up;
    std::string down;
    std::string accrual;
    int steps = 0;
};

/// Matches a settlement point: all present fields must agree; `history`
/// compares against the actions up to and including the settlement date.
struct StateMatcher {
    std::optional<int> date;
    std::optional<int> node;
    std::optional<std::vector<std::vector<int>>> history;
};

struct PayoffRule {
    StateMatcher match;
    std::vector<std::string> values;
};

struct GameConfig {
    int players = 0;
    std::vector<int> actions;
    std::vector<std::vector<std::string>> action_labels;
    int horizon = 0;
    std::vector<StateMatcher> terminal; // extra settlement triggers before the horizon
    std::vector<PayoffRule> payoffs;
    std::optional<std::vector<std::string>> default_payoff;
};

struct LegConfig {
    std::string kind;  // call | put | custom
    std::string style; // european | american
    std::optional<std::string> strike;
    std::optional<std::vector<std::string>> terminal; // node-indexed (custom)
};

struct PutSchedule {
    int date = 0;
    std::vector<std::string> values; // one entry = constant across nodes
};

struct TrancheConfig {
    std::vector<int> decision_dates;
    std::vector<LegConfig> legs;
    std::vector<std::vector<PutSchedule>> put_payoffs; // [tranche][schedule]
};

struct ContractConfig {
    int version = 1;
    std::string numeric = "float"; // float | rational
    std::uint64_t budget = kDefaultEnumerationBudget;
    LatticeConfig lattice;
    std::string mode; // game | tranches
    std::optional<GameConfig> game;
    std::optional<TrancheConfig> tranches;
};

/// Loads and schema-validates a config file. Throws ParseError on unreadable
/// input, SchemaError on structural problems (with field diagnostics) and
/// HorizonError when referenced dates fall outside the lattice.
ContractConfig load_config(const std::string& path);

/// Same, from an in-memory document (used by the loader and by tests).
ContractConfig parse_config(const std::string& text, const std::string& origin);

template <typename N>
MarketLattice<N> lattice_from_config(const ContractConfig& cfg) {
    return build_lattice<N>(num_from_string<N>(cfg.lattice.initial_price),
                            num_from_string<N>(cfg.lattice.up),
                            num_from_string<N>(cfg.lattice.down),
                            num_from_string<N>(cfg.lattice.accrual), cfg.lattice.steps);
}

namespace detail_cfg {

inline bool matcher_hits(const StateMatcher& m, const GameState& s,
                         const JointAction& a) {
    if (m.date && *m.date != s.date) return false;
    if (m.node && *m.node != s.node) return false;
    if (m.history) {
        if (m.history->size() != s.history.size() + 1) return false;
        for (std::size_t t = 0; t < s.history.size(); ++t)
            if ((*m.history)[t] != s.history[t]) return false;
        if (m.history->back() != a) return false;
    }
    return true;
}

} // namespace detail_cfg

template <typename N>
GameSpec<N> game_from_config(const ContractConfig& cfg, const MarketLattice<N>& lattice) {
    if (!cfg.game) throw SchemaError("config has no game block");
    const GameConfig& gc = *cfg.game;
    GameSpec<N> game;
    game.players = gc.players;
    game.action_counts = gc.actions;
    game.action_labels = gc.action_labels;
    game.horizon = gc.horizon;

    auto terminal_rules = gc.terminal;
    game.terminates = [terminal_rules](const GameState& s, const JointAction& a) {
        for (const StateMatcher& m : terminal_rules)
            if (detail_cfg::matcher_hits(m, s, a)) return true;
        return false;
    };

    std::vector<PayoffRule> rules = gc.payoffs;
    std::optional<std::vector<std::string>> fallback = gc.default_payoff;
    int players = gc.players;
    game.payoff = [rules, fallback, players](const GameState& s,
                                             const JointAction& a) -> std::vector<N> {
        const std::vector<std::string>* chosen = nullptr;
        for (const PayoffRule& r : rules) {
            if (detail_cfg::matcher_hits(r.match, s, a)) {
                chosen = &r.values;
                break;
            }
        }
        if (!chosen && fallback) chosen = &*fallback;
        if (!chosen)
            throw SchemaError("payoff table misses a terminal state at date " +
                              std::to_string(s.date) + ", node " + std::to_string(s.node));
        if (static_cast<int>(chosen->size()) != players)
            throw SchemaError("payoff entry has wrong arity");
        std::vector<N> out(players);
        for (int i = 0; i < players; ++i) out[i] = num_from_string<N>((*chosen)[i]);
        return out;
    };
    validate_game(game, lattice);
    return game;
}

template <typename N>
TrancheContract<N> contract_from_config(const ContractConfig& cfg,
                                        const MarketLattice<N>& lattice) {
    if (!cfg.tranches) throw SchemaError("config has no tranches block");
    const TrancheConfig& tc = *cfg.tranches;
    TrancheContract<N> contract;
    contract.players = static_cast<int>(tc.legs.size());
    contract.decision_dates = tc.decision_dates;
    for (const LegConfig& lc : tc.legs) {
        TrancheLeg<N> leg;
        if (lc.kind == "call")
            leg.kind = TrancheLeg<N>::Kind::Call;
        else if (lc.kind == "put")
            leg.kind = TrancheLeg<N>::Kind::Put;
        else if (lc.kind == "custom")
            leg.kind = TrancheLeg<N>::Kind::Custom;
        else
            throw SchemaError("unknown leg kind: " + lc.kind);
        if (lc.style == "european")
            leg.style = TrancheLeg<N>::Style::European;
        else if (lc.style == "american")
            leg.style = TrancheLeg<N>::Style::American;
        else
            throw SchemaError("unknown leg style: " + lc.style);
        if (leg.kind == TrancheLeg<N>::Kind::Custom) {
            if (!lc.terminal) throw SchemaError("custom leg needs a terminal table");
            for (const std::string& v : *lc.terminal)
                leg.custom_terminal.push_back(num_from_string<N>(v));
        } else {
            if (!lc.strike) throw SchemaError("call/put leg needs a strike");
            leg.strike = num_from_string<N>(*lc.strike);
        }
        contract.legs.push_back(std::move(leg));
    }
    contract.put_payoffs.resize(contract.players);
    for (int i = 0; i < contract.players; ++i) {
        contract.put_payoffs[i].resize(tc.decision_dates.size());
        for (std::size_t l = 0; l < tc.decision_dates.size(); ++l) {
            const int date = tc.decision_dates[l];
            const PutSchedule* sched = nullptr;
            for (const PutSchedule& ps : tc.put_payoffs[i])
                if (ps.date == date) sched = &ps;
            if (!sched)
                throw SchemaError("tranche " + std::to_string(i + 1) +
                                  " lacks put payoffs for date " + std::to_string(date));
            std::vector<N>& row = contract.put_payoffs[i][l];
            if (sched->values.size() == 1) {
                row.assign(date + 1, num_from_string<N>(sched->values[0]));
            } else {
                if (static_cast<int>(sched->values.size()) != date + 1)
                    throw ShapeError("put payoff table misses a node at date " +
                                     std::to_string(date));
                for (const std::string& v : sched->values)
                    row.push_back(num_from_string<N>(v));
            }
        }
    }
    validate_contract(contract, lattice);
    return contract;
}

} // namespace gclaim
