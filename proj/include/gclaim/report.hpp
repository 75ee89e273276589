#pragma once

// Structured-output serialisation (format version 1). Values print through
// num_to_string so rational mode stays exact; field order is alphabetical by
// nlohmann's object ordering, list order is the deterministic order of the
// underlying containers.

#include <json.hpp>

#include "gclaim/equilibrium.hpp"
#include "gclaim/feasibility.hpp"
#include "gclaim/tranches.hpp"
#include "gclaim/valuation.hpp"

namespace gclaim {

inline constexpr int kReportVersion = 1;

inline nlohmann::json to_json(const Coalition& who) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i : who.members) arr.push_back(i + 1);
    return arr;
}

inline nlohmann::json to_json(const GameState& s) {
    nlohmann::json j;
    j["date"] = s.date;
    j["node"] = s.node;
    j["history"] = s.history;
    return j;
}

template <typename N>
nlohmann::json to_json(const PriceInterval<N>& pi) {
    nlohmann::json j;
    j["coalition"] = to_json(pi.coalition);
    j["lower"] = num_to_string(pi.lower);
    j["upper"] = num_to_string(pi.upper);
    return j;
}

inline nlohmann::json to_json(const CoalitionStrategy& strat) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [state, action] : strat.choice) {
        nlohmann::json row = to_json(state);
        row["action"] = action;
        rows.push_back(std::move(row));
    }
    nlohmann::json j;
    j["members"] = to_json(strat.members);
    j["choices"] = std::move(rows);
    return j;
}

inline nlohmann::json to_json(const StrategyProfile& profile) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CoalitionStrategy& part : profile) arr.push_back(to_json(part));
    return arr;
}

template <typename N>
nlohmann::json to_json(const EquilibriumPricing<N>& pricing) {
    nlohmann::json j;
    nlohmann::json prices = nlohmann::json::array();
    for (const N& v : pricing.tranche_prices) prices.push_back(num_to_string(v));
    j["tranche_prices"] = std::move(prices);
    j["planner_max"] = num_to_string(pricing.planner_max);
    j["sum_condition"] = pricing.condition_holds;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& cp : pricing.coalitions) {
        nlohmann::json row;
        row["coalition"] = to_json(cp.who);
        row["additive"] = cp.additive;
        if (cp.price) row["price"] = num_to_string(*cp.price);
        row["lower"] = num_to_string(cp.lower);
        row["upper"] = num_to_string(cp.upper);
        rows.push_back(std::move(row));
    }
    j["coalitions"] = std::move(rows);
    j["profile"] = to_json(pricing.profile);
    return j;
}

template <typename N>
nlohmann::json to_json(const AdditivityReport<N>& rep) {
    nlohmann::json j;
    j["profile_is_optimal"] = rep.profile_is_optimal;
    j["zero_sum"] = rep.zero_sum;
    j["sum_condition"] = rep.sum_condition;
    j["hypothesis_holds"] = rep.hypothesis_holds;
    j["additivity_ok"] = rep.additivity_ok;
    j["planner_max"] = num_to_string(rep.planner_max);
    j["profile_total"] = num_to_string(rep.profile_total);
    nlohmann::json values = nlohmann::json::array();
    for (const N& v : rep.player_values) values.push_back(num_to_string(v));
    j["player_values"] = std::move(values);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& ca : rep.coalitions) {
        nlohmann::json row;
        row["coalition"] = to_json(ca.who);
        row["lower"] = num_to_string(ca.lower);
        row["upper"] = num_to_string(ca.upper);
        if (ca.value) row["value"] = num_to_string(*ca.value);
        row["member_sum"] = num_to_string(ca.member_sum);
        row["additive"] = ca.additive;
        rows.push_back(std::move(row));
    }
    j["coalitions"] = std::move(rows);
    return j;
}

template <typename N>
nlohmann::json to_json(const HedgeNode<N>& node) {
    nlohmann::json j;
    j["state"] = to_json(node.state);
    j["wealth"] = num_to_string(node.wealth);
    j["target"] = num_to_string(node.target);
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& br : node.branches) {
        nlohmann::json b;
        b["action"] = br.action;
        if (br.settles) {
            b["settles"] = true;
            b["payoff"] = num_to_string(br.payoff);
        } else {
            b["settles"] = false;
            b["bond_units"] = num_to_string(br.bond_units);
            b["stock_units"] = num_to_string(br.stock_units);
            b["down"] = to_json(*br.down);
            b["up"] = to_json(*br.up);
        }
        branches.push_back(std::move(b));
    }
    j["branches"] = std::move(branches);
    return j;
}

template <typename N>
nlohmann::json to_json(const HedgePortfolio<N>& plan) {
    nlohmann::json j;
    j["free_side"] = to_json(plan.free_side);
    j["fixed_strategy"] = to_json(plan.fixed);
    j["initial_wealth"] = num_to_string(plan.initial_wealth);
    j["plan"] = to_json(*plan.root);
    return j;
}

template <typename N>
nlohmann::json to_json(const TrancheContract<N>& contract,
                       const TrancheValuation<N>& val) {
    nlohmann::json j;
    nlohmann::json dates = nlohmann::json::array();
    for (std::size_t l = 0; l < val.at_date.size(); ++l) {
        nlohmann::json nodes = nlohmann::json::array();
        for (std::size_t node = 0; node < val.at_date[l].size(); ++node) {
            const auto& rep = val.at_date[l][node];
            nlohmann::json row;
            row["node"] = node;
            nlohmann::json cont = nlohmann::json::array();
            for (const N& v : rep.continuation) cont.push_back(num_to_string(v));
            row["continuation"] = std::move(cont);
            row["continuation_sum"] = num_to_string(rep.continuation_sum);
            nlohmann::json value = nlohmann::json::array();
            for (const N& v : rep.value) value.push_back(num_to_string(v));
            row["value"] = std::move(value);
            nlohmann::json putters = nlohmann::json::array();
            for (int i : rep.putters) putters.push_back(i + 1);
            row["put_set"] = std::move(putters);
            row["all_put_boundary"] = rep.all_put_boundary;
            nodes.push_back(std::move(row));
        }
        nlohmann::json d;
        d["date"] = contract.decision_dates[l];
        d["nodes"] = std::move(nodes);
        dates.push_back(std::move(d));
    }
    j["decision_dates"] = std::move(dates);
    nlohmann::json root = nlohmann::json::array();
    for (const N& v : val.root_value) root.push_back(num_to_string(v));
    j["root_value"] = std::move(root);
    return j;
}

struct ArbitrageCheckReport {
    std::vector<CoalitionBounds> bounds;
    FmOutcome verdict;
    std::optional<QuoteClassification> quotes;
};

inline nlohmann::json to_json(const ArbitrageCheckReport& rep) {
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& cb : rep.bounds) {
        nlohmann::json row;
        row["coalition"] = to_json(cb.who);
        row["lower"] = num_to_string(cb.lower);
        row["upper"] = num_to_string(cb.upper);
        rows.push_back(std::move(row));
    }
    j["intervals"] = std::move(rows);
    j["feasible"] = rep.verdict.feasible;
    if (rep.verdict.feasible) {
        nlohmann::json w = nlohmann::json::array();
        for (const Rational& v : rep.verdict.witness) w.push_back(num_to_string(v));
        j["witness"] = std::move(w);
        j["binding"] = rep.verdict.binding;
    } else {
        j["conflict"] = std::vector<std::string>(rep.verdict.conflict.begin(),
                                                 rep.verdict.conflict.end());
    }
    if (rep.quotes) {
        nlohmann::json violations = nlohmann::json::array();
        for (const auto& v : rep.quotes->interval_violations) {
            nlohmann::json row;
            row["coalition"] = to_json(v.who);
            row["quoted_total"] = num_to_string(v.quoted_total);
            row["lower"] = num_to_string(v.lower);
            row["upper"] = num_to_string(v.upper);
            row["issuer_arbitrage"] = v.issuer_side;
            row["holder_arbitrage"] = v.holder_side;
            violations.push_back(std::move(row));
        }
        j["interval_violations"] = std::move(violations);
        nlohmann::json resells = nlohmann::json::array();
        for (const auto& v : rep.quotes->reselling_violations) {
            nlohmann::json row;
            row["coalition"] = to_json(v.who);
            row["coalition_quote"] = num_to_string(v.coalition_quote);
            row["member_sum"] = num_to_string(v.member_sum);
            resells.push_back(std::move(row));
        }
        j["reselling_violations"] = std::move(resells);
        j["arbitrage_free"] = rep.quotes->arbitrage_free();
    }
    return j;
}

/// Top-level envelope every command prints in structured mode.
inline nlohmann::json wrap_report(const std::string& command, const std::string& mode,
                                  nlohmann::json payload) {
    nlohmann::json j;
    j["version"] = kReportVersion;
    j["command"] = command;
    j["numeric"] = mode;
    j["result"] = std::move(payload);
    return j;
}

} // namespace gclaim
