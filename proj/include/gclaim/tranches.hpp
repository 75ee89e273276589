#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gclaim/lattice.hpp"
#include "gclaim/numeric.hpp"

namespace gclaim {

// ---------------------------------------------------------------------------
// Constrained Euclidean projections
// ---------------------------------------------------------------------------

/// Orthogonal projection of P onto {x : sum x = c, x_i = X_i for i in fixed}:
/// fixed coordinates are pinned, the remainder shifts uniformly so the total
/// lands on c exactly.
template <typename N>
std::vector<N> project_hyperplane(const std::vector<N>& point,
                                  const std::vector<int>& fixed_set,
                                  const std::vector<N>& bounds, const N& total) {
    const std::size_t m = point.size();
    std::vector<bool> fixed(m, false);
    for (int i : fixed_set) {
        if (i < 0 || static_cast<std::size_t>(i) >= m)
            throw DomainError("fixed index out of range");
        fixed[i] = true;
    }
    std::size_t free_count = 0;
    N fixed_sum{0}, free_sum{0};
    for (std::size_t i = 0; i < m; ++i) {
        if (fixed[i]) {
            fixed_sum += bounds[i];
        } else {
            ++free_count;
            free_sum += point[i];
        }
    }
    std::vector<N> out(m);
    if (free_count == 0) {
        if (!num_eq(fixed_sum, total))
            throw DegenerateHyperplane("every coordinate fixed but totals disagree");
        for (std::size_t i = 0; i < m; ++i) out[i] = bounds[i];
        return out;
    }
    N shift = (total - fixed_sum - free_sum) / N(static_cast<int>(free_count));
    for (std::size_t i = 0; i < m; ++i)
        out[i] = fixed[i] ? bounds[i] : point[i] + shift;
    return out;
}

/// Euclidean projection of P onto {x : sum x = c, x >= X}, by sort-based
/// water-filling: x_i = max(X_i, P_i - lambda) with the unique lambda that
/// restores the total.
template <typename N>
std::vector<N> project_simplex(const std::vector<N>& point, const std::vector<N>& bounds,
                               const N& total) {
    const std::size_t m = point.size();
    if (bounds.size() != m) throw ShapeError("bounds arity mismatch");
    N slack = total;
    for (const N& b : bounds) slack -= b;
    if (num_lt(slack, N(0))) throw EmptySimplex("sum of bounds exceeds the total");

    // Work on y = P - X projected onto {z >= 0, sum z = slack}.
    std::vector<N> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = point[i] - bounds[i];
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });

    N prefix{0};
    N lambda = -slack; // support of size m falls out of the loop below
    std::size_t support = m;
    for (std::size_t k = 0; k < m; ++k) {
        prefix += y[order[k]];
        N candidate = (prefix - slack) / N(static_cast<int>(k + 1));
        bool keep_next = k + 1 < m && y[order[k + 1]] > candidate;
        if (!keep_next) {
            lambda = candidate;
            support = k + 1;
            break;
        }
    }
    (void)support;
    std::vector<N> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        N z = y[i] - lambda;
        out[i] = (z > N(0)) ? bounds[i] + z : bounds[i];
    }
    return out;
}

/// The holders whose simplex projection sits on its lower bound; in float
/// mode the bound test uses the relative tolerance 1e-9 * (1 + |X_i|).
template <typename N>
std::vector<int> put_set(const std::vector<N>& continuation, const std::vector<N>& bounds,
                         const N& total) {
    std::vector<N> proj = project_simplex(continuation, bounds, total);
    std::vector<int> who;
    for (std::size_t i = 0; i < proj.size(); ++i) {
        if constexpr (NumTraits<N>::exact) {
            if (proj[i] == bounds[i]) who.push_back(static_cast<int>(i));
        } else {
            double gap = num_to_double(proj[i] - bounds[i]);
            double scale = 1.0 + std::fabs(num_to_double(bounds[i]));
            if (gap <= 1e-9 * scale) who.push_back(static_cast<int>(i));
        }
    }
    return who;
}

// ---------------------------------------------------------------------------
// Contract with puttable tranches
// ---------------------------------------------------------------------------

/// One tranche's option leg, settling at the lattice maturity; American legs
/// may be exercised from the last decision date onwards and enter the put
/// game through their continuation value at that date.
template <typename N>
struct TrancheLeg {
    enum class Kind { Call, Put, Custom };
    enum class Style { European, American };
    Kind kind = Kind::Call;
    Style style = Style::European;
    N strike{};
    std::vector<N> custom_terminal; // node-indexed payoff at maturity (Custom)

    N terminal_payoff(const N& spot, int node) const {
        switch (kind) {
            case Kind::Call: return std::max(spot - strike, N(0));
            case Kind::Put: return std::max(strike - spot, N(0));
            case Kind::Custom: return custom_terminal.at(node);
        }
        throw DomainError("unknown leg kind");
    }
};

/// Put amounts are given in currency of their decision date, one value per
/// market node.
template <typename N>
struct TrancheContract {
    int players = 0;
    std::vector<int> decision_dates; // strictly increasing, within (0, maturity)
    std::vector<TrancheLeg<N>> legs; // one per tranche
    std::vector<std::vector<std::vector<N>>> put_payoffs; // [tranche][date idx][node]
};

template <typename N>
void validate_contract(const TrancheContract<N>& c, const MarketLattice<N>& lattice) {
    if (c.players < 1) throw DomainError("contract needs at least one tranche");
    if (static_cast<int>(c.legs.size()) != c.players)
        throw SchemaError("one option leg per tranche required");
    if (c.decision_dates.empty()) throw SchemaError("no decision dates");
    int prev = 0;
    for (int d : c.decision_dates) {
        if (d <= prev) throw SchemaError("decision dates must be strictly increasing");
        if (d >= lattice.steps)
            throw HorizonError("decision date " + std::to_string(d) +
                               " not before maturity " + std::to_string(lattice.steps));
        prev = d;
    }
    if (static_cast<int>(c.put_payoffs.size()) != c.players)
        throw SchemaError("one put-payoff schedule per tranche required");
    for (int i = 0; i < c.players; ++i) {
        if (c.put_payoffs[i].size() != c.decision_dates.size())
            throw SchemaError("put payoffs must cover every decision date");
        for (std::size_t l = 0; l < c.decision_dates.size(); ++l)
            if (static_cast<int>(c.put_payoffs[i][l].size()) !=
                c.decision_dates[l] + 1)
                throw ShapeError("put payoff table misses a node");
        if (c.legs[i].kind == TrancheLeg<N>::Kind::Custom &&
            static_cast<int>(c.legs[i].custom_terminal.size()) != lattice.steps + 1)
            throw ShapeError("custom terminal table misses a node");
    }
}

/// Discounted value of one leg at every node of `date`, by plain rollback
/// (European/Custom) or early-exercise rollback from maturity (American).
template <typename N>
std::vector<N> leg_values_at(const TrancheLeg<N>& leg, int date,
                             const MarketLattice<N>& lattice,
                             const MartingaleMeasure<N>& measure) {
    std::vector<N> values(lattice.steps + 1);
    const N bT = lattice.numeraire(lattice.steps);
    for (int j = 0; j <= lattice.steps; ++j)
        values[j] = leg.terminal_payoff(lattice.price(lattice.steps, j), j) / bT;
    for (int t = lattice.steps - 1; t >= date; --t) {
        values = conditional_expectation(values, measure);
        if (leg.style == TrancheLeg<N>::Style::American) {
            const N bt = lattice.numeraire(t);
            for (int j = 0; j <= t; ++j) {
                N intrinsic = leg.terminal_payoff(lattice.price(t, j), j) / bt;
                if (intrinsic > values[j]) values[j] = intrinsic;
            }
        }
    }
    return values;
}

/// Everything the valuation derives at one (decision date, node): the
/// continuation vector, its total, the projected value vector and who puts.
template <typename N>
struct TrancheNodeReport {
    std::vector<N> continuation; // P, discounted
    N continuation_sum{};        // p
    std::vector<N> value;        // V*, discounted
    std::vector<int> putters;    // E
    bool all_put_boundary = false; // sum X == p exactly: everyone putting is legal
};

template <typename N>
struct TrancheValuation {
    std::vector<std::vector<TrancheNodeReport<N>>> at_date; // [date idx][node]
    std::vector<N> root_value;                              // V* at time 0
};

/// Backward induction of the put game: leg prices seed the last decision
/// date, each date projects the continuation vector onto the put simplex, and
/// expectations carry the value to the previous date. Aborts when the sum of
/// put amounts exceeds the total continuation value at some node.
template <typename N>
TrancheValuation<N> value_tranches(const TrancheContract<N>& contract,
                                   const MarketLattice<N>& lattice,
                                   const MartingaleMeasure<N>& measure) {
    validate_contract(contract, lattice);
    const int n = static_cast<int>(contract.decision_dates.size());
    TrancheValuation<N> out;
    out.at_date.resize(n);

    // Per-tranche discounted values at the current working date, node-indexed.
    std::vector<std::vector<N>> carried(contract.players);
    for (int l = n - 1; l >= 0; --l) {
        const int date = contract.decision_dates[l];
        if (l == n - 1) {
            for (int i = 0; i < contract.players; ++i) {
                std::vector<N> full =
                    leg_values_at(contract.legs[i], date, lattice, measure);
                carried[i].assign(full.begin(), full.begin() + date + 1);
            }
        } else {
            const int next_date = contract.decision_dates[l + 1];
            for (int i = 0; i < contract.players; ++i) {
                std::vector<N> v = carried[i];
                for (int t = next_date - 1; t >= date; --t)
                    v = conditional_expectation(v, measure);
                carried[i] = std::move(v);
            }
        }
        const N b = lattice.numeraire(date);
        out.at_date[l].resize(date + 1);
        for (int j = 0; j <= date; ++j) {
            TrancheNodeReport<N>& rep = out.at_date[l][j];
            rep.continuation.resize(contract.players);
            rep.continuation_sum = N(0);
            std::vector<N> bounds(contract.players);
            N bounds_sum{0};
            for (int i = 0; i < contract.players; ++i) {
                rep.continuation[i] = carried[i][j];
                rep.continuation_sum += rep.continuation[i];
                bounds[i] = contract.put_payoffs[i][l][j] / b;
                bounds_sum += bounds[i];
            }
            if (!num_le(bounds_sum, rep.continuation_sum))
                throw ZeroSumViolation(
                    "put amounts exceed continuation total at decision date " +
                        std::to_string(date) + ", node " + std::to_string(j),
                    l, j);
            rep.all_put_boundary = num_eq(bounds_sum, rep.continuation_sum);
            rep.value = project_simplex(rep.continuation, bounds, rep.continuation_sum);
            rep.putters = put_set(rep.continuation, bounds, rep.continuation_sum);
        }
        for (int i = 0; i < contract.players; ++i)
            for (int j = 0; j <= date; ++j) carried[i][j] = out.at_date[l][j].value[i];
    }
    const int first_date = contract.decision_dates[0];
    for (int i = 0; i < contract.players; ++i) {
        std::vector<N> v = carried[i];
        for (int t = first_date - 1; t >= 0; --t) v = conditional_expectation(v, measure);
        out.root_value.push_back(v[0]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strategy profiles over the put game
// ---------------------------------------------------------------------------

/// A decision point of the put game: decision-date index, market node there,
/// and the joint put decisions (bitmask over tranches) at earlier decision
/// dates.
struct TrancheState {
    int level = 0; // index into decision_dates
    int node = 0;
    std::vector<unsigned> history;

    friend bool operator<(const TrancheState& a, const TrancheState& b) {
        return std::tie(a.level, a.node, a.history) <
               std::tie(b.level, b.node, b.history);
    }
    friend bool operator==(const TrancheState& a, const TrancheState& b) {
        return a.level == b.level && a.node == b.node && a.history == b.history;
    }
};

/// Per-player put/hold assignment, total on the states reachable given the
/// player's own earlier choices.
struct TrancheStrategy {
    std::map<TrancheState, bool> put;

    bool at(const TrancheState& s) const {
        auto it = put.find(s);
        if (it == put.end())
            throw IncompleteStrategy("no put decision at level " +
                                     std::to_string(s.level) + ", node " +
                                     std::to_string(s.node));
        return it->second;
    }
};

using TrancheProfile = std::vector<TrancheStrategy>;

/// All decision states of the put game (every bitmask history is reachable).
template <typename N>
std::vector<TrancheState> tranche_states(const TrancheContract<N>& contract,
                                         const MarketLattice<N>& lattice) {
    validate_contract(contract, lattice);
    const int n = static_cast<int>(contract.decision_dates.size());
    std::vector<TrancheState> states;
    std::function<void(const TrancheState&)> expand = [&](const TrancheState& s) {
        states.push_back(s);
        if (s.level + 1 >= n) return;
        const int gap = contract.decision_dates[s.level + 1] - contract.decision_dates[s.level];
        for (unsigned mask = 0; mask < (1u << contract.players); ++mask) {
            for (int ups = 0; ups <= gap; ++ups) {
                TrancheState child{s.level + 1, s.node + ups, s.history};
                child.history.push_back(mask);
                expand(child);
            }
        }
    };
    const int first_date = contract.decision_dates[0];
    for (int j = 0; j <= first_date; ++j) expand(TrancheState{0, j, {}});
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    return states;
}

/// The constructed equilibrium: put exactly when the valuation's put set says
/// so, independently of history.
template <typename N>
TrancheProfile equilibrium_profile(const TrancheContract<N>& contract,
                                   const MarketLattice<N>& lattice,
                                   const TrancheValuation<N>& valuation) {
    TrancheProfile profile(contract.players);
    for (const TrancheState& s : tranche_states(contract, lattice)) {
        const TrancheNodeReport<N>& rep = valuation.at_date[s.level][s.node];
        for (int i = 0; i < contract.players; ++i) {
            bool puts = std::find(rep.putters.begin(), rep.putters.end(), i) !=
                        rep.putters.end();
            profile[i].put[s] = puts;
        }
    }
    return profile;
}

/// Recursive payoff of an arbitrary put/hold profile. Putting pays the put
/// amount; keeping pays the uniform redistribution adjustment derived from
/// the valuation's continuation vector plus the expected continuation of the
/// profile itself.
template <typename N>
struct TranchePayoffs {
    std::map<TrancheState, std::vector<N>> at_state; // discounted vectors
    std::vector<N> root;
};

template <typename N>
TranchePayoffs<N> payoff_of_profile(const TrancheContract<N>& contract,
                                    const TrancheProfile& profile,
                                    const MarketLattice<N>& lattice,
                                    const MartingaleMeasure<N>& measure,
                                    const TrancheValuation<N>& valuation) {
    validate_contract(contract, lattice);
    if (static_cast<int>(profile.size()) != contract.players)
        throw IncompleteStrategy("profile must cover every tranche");
    const int n = static_cast<int>(contract.decision_dates.size());
    TranchePayoffs<N> out;

    std::function<std::vector<N>(const TrancheState&)> eval =
        [&](const TrancheState& s) -> std::vector<N> {
        auto hit = out.at_state.find(s);
        if (hit != out.at_state.end()) return hit->second;
        const int date = contract.decision_dates[s.level];
        const N b = lattice.numeraire(date);
        const TrancheNodeReport<N>& rep = valuation.at_date[s.level][s.node];

        unsigned mask = 0;
        for (int i = 0; i < contract.players; ++i)
            if (profile[i].at(s)) mask |= (1u << i);

        // Uniform share of the issuer's deviation, paid by each keeper.
        int keepers = contract.players - __builtin_popcount(mask);
        N adjustment{0};
        if (mask != 0 && keepers > 0) {
            N deviation{0};
            for (int e = 0; e < contract.players; ++e)
                if (mask & (1u << e))
                    deviation += contract.put_payoffs[e][s.level][s.node] / b -
                                 rep.continuation[e];
            adjustment = -deviation / N(keepers);
        }

        std::vector<N> value(contract.players);
        std::vector<std::vector<N>> continuation(contract.players);
        if (s.level + 1 < n) {
            const int next_date = contract.decision_dates[s.level + 1];
            const int gap = next_date - date;
            for (int i = 0; i < contract.players; ++i) {
                std::vector<N> next_values(next_date + 1, N(0));
                for (int jn = s.node; jn <= s.node + gap; ++jn) {
                    TrancheState child{s.level + 1, jn, s.history};
                    child.history.push_back(mask);
                    next_values[jn] = eval(child)[i];
                }
                std::vector<N> v = next_values;
                for (int t = next_date - 1; t >= date; --t)
                    v = conditional_expectation(v, measure);
                // Only the entries stemming from reachable nodes matter; the
                // rollback of the zero-padded vector evaluated at s.node uses
                // exactly the children in [s.node, s.node + gap].
                continuation[i] = {v[s.node]};
            }
        }
        for (int i = 0; i < contract.players; ++i) {
            if (mask & (1u << i)) {
                value[i] = contract.put_payoffs[i][s.level][s.node] / b;
            } else {
                N cont = (s.level + 1 < n) ? continuation[i][0] : rep.continuation[i];
                value[i] = adjustment + cont;
            }
        }
        out.at_state[s] = value;
        return value;
    };

    const int first_date = contract.decision_dates[0];
    std::vector<std::vector<N>> first(contract.players,
                                      std::vector<N>(first_date + 1, N(0)));
    for (int j = 0; j <= first_date; ++j) {
        std::vector<N> v = eval(TrancheState{0, j, {}});
        for (int i = 0; i < contract.players; ++i) first[i][j] = v[i];
    }
    for (int i = 0; i < contract.players; ++i) {
        std::vector<N> v = first[i];
        for (int t = first_date - 1; t >= 0; --t) v = conditional_expectation(v, measure);
        out.root.push_back(v[0]);
    }
    return out;
}

/// Per-player strategy enumeration for deviation checks (put/hold at every
/// decision state).
template <typename N>
std::vector<TrancheStrategy> enumerate_tranche_strategies(
    const TrancheContract<N>& contract, const MarketLattice<N>& lattice,
    std::uint64_t budget = 1u << 20) {
    std::vector<TrancheState> states = tranche_states(contract, lattice);
    if (states.size() >= 63) throw BudgetExceeded("put game too large to enumerate");
    const std::uint64_t count = std::uint64_t(1) << states.size();
    if (count > budget) throw BudgetExceeded("put strategy space exceeds budget");
    std::vector<TrancheStrategy> all(count);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        for (std::size_t k = 0; k < states.size(); ++k)
            all[bits].put[states[k]] = (bits >> k) & 1u;
    }
    return all;
}

/// Saddle verification of the constructed equilibrium: no unilateral switch
/// to putting/holding improves any player at any state, and every player's
/// value is guaranteed against arbitrary opponent deviations.
template <typename N>
struct TrancheEquilibriumReport {
    bool nash_ok = true;
    bool guaranteed_ok = true;
    bool value_matches = true; // payoff of the equilibrium equals V* everywhere
};

template <typename N>
TrancheEquilibriumReport<N> verify_optimal_equilibrium(
    const TrancheContract<N>& contract, const MarketLattice<N>& lattice,
    const MartingaleMeasure<N>& measure, const TrancheValuation<N>& valuation,
    std::uint64_t budget = 1u << 20) {
    TrancheEquilibriumReport<N> rep;
    TrancheProfile star = equilibrium_profile(contract, lattice, valuation);
    TranchePayoffs<N> base = payoff_of_profile(contract, star, lattice, measure, valuation);

    for (const auto& [state, vec] : base.at_state) {
        const TrancheNodeReport<N>& node_rep = valuation.at_date[state.level][state.node];
        for (int i = 0; i < contract.players; ++i)
            if (!num_eq(vec[i], node_rep.value[i])) rep.value_matches = false;
    }
    for (int i = 0; i < contract.players; ++i)
        if (!num_eq(base.root[i], valuation.root_value[i])) rep.value_matches = false;

    std::vector<TrancheStrategy> all =
        enumerate_tranche_strategies(contract, lattice, budget);
    for (int i = 0; i < contract.players; ++i) {
        for (const TrancheStrategy& dev : all) {
            // Unilateral deviation by player i: no state may improve on V*.
            TrancheProfile p = star;
            p[i] = dev;
            TranchePayoffs<N> got =
                payoff_of_profile(contract, p, lattice, measure, valuation);
            for (const auto& [state, vec] : got.at_state)
                if (num_lt(valuation.at_date[state.level][state.node].value[i], vec[i]))
                    rep.nash_ok = false;
            if (num_lt(valuation.root_value[i], got.root[i])) rep.nash_ok = false;
        }
        // Opponent coalitions deviate jointly while player i holds the line.
        std::vector<int> others;
        for (int o = 0; o < contract.players; ++o)
            if (o != i) others.push_back(o);
        std::vector<std::size_t> pick(others.size(), 0);
        while (true) {
            TrancheProfile p = star;
            for (std::size_t k = 0; k < others.size(); ++k) p[others[k]] = all[pick[k]];
            TranchePayoffs<N> got =
                payoff_of_profile(contract, p, lattice, measure, valuation);
            for (const auto& [state, vec] : got.at_state)
                if (num_lt(vec[i], valuation.at_date[state.level][state.node].value[i]))
                    rep.guaranteed_ok = false;
            if (num_lt(got.root[i], valuation.root_value[i])) rep.guaranteed_ok = false;
            std::size_t k = others.size();
            bool done = others.empty();
            while (k > 0) {
                --k;
                if (++pick[k] < all.size()) break;
                pick[k] = 0;
                if (k == 0) done = true;
            }
            if (done) break;
        }
    }
    return rep;
}

} // namespace gclaim
