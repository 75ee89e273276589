#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gclaim/errors.hpp"
#include "gclaim/lattice.hpp"
#include "gclaim/numeric.hpp"

namespace gclaim {

/// One action index per player, in player order.
using JointAction = std::vector<int>;

/// Joint actions for dates 0..t-1.
using ActionHistory = std::vector<JointAction>;

/// A point of the game tree: the market node reached at `date` and the joint
/// actions played strictly before `date`. Market nodes recombine, action
/// histories do not.
struct GameState {
    int date = 0;
    int node = 0; // up-count at `date`
    ActionHistory history;

    friend bool operator<(const GameState& a, const GameState& b) {
        return std::tie(a.date, a.node, a.history) < std::tie(b.date, b.node, b.history);
    }
    friend bool operator==(const GameState& a, const GameState& b) {
        return a.date == b.date && a.node == b.node && a.history == b.history;
    }
};

inline GameState root_state() { return GameState{}; }

/// Sorted list of player indices (0-based).
struct Coalition {
    std::vector<int> members;

    explicit Coalition(std::vector<int> m = {}) : members(std::move(m)) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
    }
    bool contains(int player) const {
        return std::binary_search(members.begin(), members.end(), player);
    }
    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }

    Coalition complement(int player_count) const {
        std::vector<int> rest;
        for (int i = 0; i < player_count; ++i)
            if (!contains(i)) rest.push_back(i);
        return Coalition{std::move(rest)};
    }
    static Coalition all(int player_count) {
        std::vector<int> m(player_count);
        for (int i = 0; i < player_count; ++i) m[i] = i;
        return Coalition{std::move(m)};
    }
    friend bool operator<(const Coalition& a, const Coalition& b) {
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
        return a.members < b.members;
    }
    friend bool operator==(const Coalition& a, const Coalition& b) {
        return a.members == b.members;
    }
    std::string label() const {
        std::string s = "{";
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(members[i] + 1); // 1-based for humans
        }
        return s + "}";
    }
};

/// A finite multi-player game played on the lattice dates 0..horizon.
/// `terminates` and `payoff` see only the current state and the joint action
/// just played, so they are adapted by construction; settlement is forced at
/// the horizon regardless of `terminates`.
template <typename N>
struct GameSpec {
    int players = 0;
    std::vector<int> action_counts;
    std::vector<std::vector<std::string>> action_labels; // optional, per player
    int horizon = 0;
    std::function<bool(const GameState&, const JointAction&)> terminates;
    std::function<std::vector<N>(const GameState&, const JointAction&)> payoff;

    bool settles(const GameState& s, const JointAction& a) const {
        if (s.date >= horizon) return true;
        return terminates && terminates(s, a);
    }
    std::vector<N> settlement_payoff(const GameState& s, const JointAction& a) const {
        std::vector<N> v = payoff(s, a);
        if (static_cast<int>(v.size()) != players)
            throw ShapeError("payoff mapping returned wrong arity");
        return v;
    }
};

template <typename N>
void validate_game(const GameSpec<N>& game, const MarketLattice<N>& lattice) {
    if (game.players < 1) throw DomainError("game needs at least one player");
    if (static_cast<int>(game.action_counts.size()) != game.players)
        throw DomainError("one action set per player required");
    for (int c : game.action_counts)
        if (c < 1) throw DomainError("action sets must be nonempty");
    if (game.horizon < 0 || game.horizon > lattice.steps)
        throw HorizonError("game horizon must lie within the lattice horizon");
    if (!game.payoff) throw DomainError("payoff mapping is required");
}

/// A strategy for a set of players: one coalition action tuple per reachable
/// state. Entries are functions of (date, node, past actions) only, which
/// makes every stored strategy measurable with respect to the market
/// filtration and blind to current-date actions of others.
struct CoalitionStrategy {
    Coalition members;
    std::map<GameState, JointAction> choice; // values aligned with members

    const JointAction& at(const GameState& s) const {
        auto it = choice.find(s);
        if (it == choice.end())
            throw IncompleteStrategy("no action assigned at date " + std::to_string(s.date) +
                                     ", node " + std::to_string(s.node));
        return it->second;
    }
};

/// A full profile as independent per-player strategies; each part is total on
/// the states consistent with its own earlier choices.
using StrategyProfile = std::vector<CoalitionStrategy>;

namespace detail {

/// Iterates the product of per-player action counts for `players`, invoking
/// fn(vector<int>) for every combination in lexicographic order.
template <typename Fn>
void for_each_action_tuple(const std::vector<int>& counts, const std::vector<int>& players,
                           Fn&& fn) {
    std::vector<int> tuple(players.size(), 0);
    while (true) {
        fn(const_cast<const std::vector<int>&>(tuple));
        int k = static_cast<int>(players.size()) - 1;
        while (k >= 0) {
            if (++tuple[k] < counts[players[k]]) break;
            tuple[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
}

inline std::uint64_t action_tuple_count(const std::vector<int>& counts,
                                        const std::vector<int>& players) {
    std::uint64_t n = 1;
    for (int p : players) n *= static_cast<std::uint64_t>(counts[p]);
    return n;
}

/// Weaves coalition and complement action tuples into a full joint action.
inline JointAction weave(int players, const Coalition& a, const JointAction& ca,
                         const Coalition& b, const JointAction& cb) {
    JointAction joint(players, 0);
    for (std::size_t i = 0; i < a.members.size(); ++i) joint[a.members[i]] = ca[i];
    for (std::size_t i = 0; i < b.members.size(); ++i) joint[b.members[i]] = cb[i];
    return joint;
}

} // namespace detail

/// Resolves the joint action of a list of strategy parts at a state. Every
/// player must be covered by exactly one part.
inline JointAction profile_action(const StrategyProfile& parts, int players,
                                  const GameState& s) {
    JointAction joint(players, -1);
    for (const CoalitionStrategy& part : parts) {
        const JointAction& ca = part.at(s);
        for (std::size_t i = 0; i < part.members.members.size(); ++i)
            joint[part.members.members[i]] = ca[i];
    }
    for (int v : joint)
        if (v < 0) throw IncompleteStrategy("profile does not cover every player");
    return joint;
}

/// The realised course of one market path: actions for dates 0..settlement,
/// the settlement date, and the payoff vector in currency of that date.
template <typename N>
struct PathOutcome {
    ActionHistory actions;
    int settlement_date = 0;
    std::vector<N> payoff;

    friend bool operator==(const PathOutcome& a, const PathOutcome& b) {
        return a.actions == b.actions && a.settlement_date == b.settlement_date;
    }
};

/// Outcome of playing a profile: one PathOutcome per market path of the game
/// horizon. Path `p` moves up between dates t and t+1 iff bit t of `p` is set.
template <typename N>
struct Outcome {
    int horizon = 0;
    std::vector<PathOutcome<N>> paths;

    friend bool operator==(const Outcome& a, const Outcome& b) {
        return a.horizon == b.horizon && a.paths == b.paths;
    }
};

inline int path_node(std::uint64_t path, int date) {
    int ups = 0;
    for (int t = 0; t < date; ++t) ups += (path >> t) & 1u;
    return ups;
}

/// Generates the unique outcome of a strategy profile, forward date by date
/// on every market path.
template <typename N>
Outcome<N> play(const StrategyProfile& parts, const GameSpec<N>& game,
                const MarketLattice<N>& lattice) {
    validate_game(game, lattice);
    Outcome<N> out;
    out.horizon = game.horizon;
    const std::uint64_t npaths = std::uint64_t(1) << game.horizon;
    out.paths.resize(npaths);
    for (std::uint64_t p = 0; p < npaths; ++p) {
        GameState s = root_state();
        PathOutcome<N>& po = out.paths[p];
        for (int t = 0;; ++t) {
            JointAction a = profile_action(parts, game.players, s);
            po.actions.push_back(a);
            if (game.settles(s, a)) {
                po.settlement_date = t;
                po.payoff = game.settlement_payoff(s, a);
                break;
            }
            int up = (p >> t) & 1u;
            s.history.push_back(a);
            s.date = t + 1;
            s.node += up;
        }
    }
    return out;
}

/// Per-path first date at which two outcomes' actions differ, capped at the
/// horizon (identical outcomes report the horizon itself).
template <typename N>
std::vector<int> divergence_time(const Outcome<N>& a, const Outcome<N>& b) {
    if (a.horizon != b.horizon)
        throw DomainError("outcomes live on different horizons");
    std::vector<int> rho(a.paths.size(), a.horizon);
    for (std::size_t p = 0; p < a.paths.size(); ++p) {
        const ActionHistory& ha = a.paths[p].actions;
        const ActionHistory& hb = b.paths[p].actions;
        std::size_t upto = std::min(ha.size(), hb.size());
        int r = a.horizon;
        for (std::size_t t = 0; t < upto; ++t) {
            if (ha[t] != hb[t]) {
                r = static_cast<int>(t);
                break;
            }
        }
        rho[p] = r;
    }
    return rho;
}

/// A mapping of outcomes, evaluated pathwise: value at (outcome, date, path).
template <typename N>
using OutcomeMapping =
    std::function<std::vector<int>(const Outcome<N>&, int date, std::uint64_t path)>;

struct PredictabilityWitness {
    std::size_t outcome_a = 0;
    std::size_t outcome_b = 0;
    std::uint64_t path = 0;
    int date = 0;
};

struct PredictabilityResult {
    bool holds = true;
    std::optional<PredictabilityWitness> witness;
};

namespace detail {

template <typename N>
PredictabilityResult check_history_dependency(const OutcomeMapping<N>& f,
                                              const std::vector<Outcome<N>>& outcomes,
                                              bool include_divergence_date) {
    PredictabilityResult res;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (std::size_t j = i + 1; j < outcomes.size(); ++j) {
            std::vector<int> rho = divergence_time(outcomes[i], outcomes[j]);
            for (std::uint64_t p = 0; p < outcomes[i].paths.size(); ++p) {
                int last = rho[p];
                if (!include_divergence_date) last -= 1;
                last = std::min({last, outcomes[i].paths[p].settlement_date,
                                 outcomes[j].paths[p].settlement_date});
                for (int t = 0; t <= last; ++t) {
                    if (f(outcomes[i], t, p) != f(outcomes[j], t, p)) {
                        res.holds = false;
                        res.witness = PredictabilityWitness{i, j, p, t};
                        return res;
                    }
                }
            }
        }
    }
    return res;
}

} // namespace detail

/// True iff f's value at every date t is determined by actions strictly
/// before t (agreement up to and including each pairwise divergence date).
template <typename N>
PredictabilityResult check_predictable(const OutcomeMapping<N>& f,
                                       const std::vector<Outcome<N>>& outcomes) {
    return detail::check_history_dependency(f, outcomes, true);
}

/// True iff f's value at every date t is determined by actions up to and
/// including t (agreement strictly before each divergence date).
template <typename N>
PredictabilityResult check_adapted(const OutcomeMapping<N>& f,
                                   const std::vector<Outcome<N>>& outcomes) {
    return detail::check_history_dependency(f, outcomes, false);
}

// ---------------------------------------------------------------------------
// Strategy construction and enumeration
// ---------------------------------------------------------------------------

/// Builds a strategy for `who` by asking `chooser` for a coalition action at
/// every state consistent with the choices made so far (all opponent actions
/// and market moves considered).
template <typename N>
CoalitionStrategy make_strategy(
    const GameSpec<N>& game, const MarketLattice<N>& lattice, const Coalition& who,
    const std::function<JointAction(const GameState&)>& chooser,
    const GameState& from = root_state()) {
    validate_game(game, lattice);
    Coalition others = who.complement(game.players);
    CoalitionStrategy strat{who, {}};
    std::set<GameState> seen;
    std::vector<GameState> stack{from};
    while (!stack.empty()) {
        GameState s = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(s).second) continue;
        JointAction ca = chooser(s);
        if (ca.size() != who.members.size())
            throw ShapeError("chooser returned wrong coalition arity");
        strat.choice[s] = ca;
        detail::for_each_action_tuple(
            game.action_counts, others.members, [&](const JointAction& oa) {
                JointAction joint = detail::weave(game.players, who, ca, others, oa);
                if (game.settles(s, joint)) return;
                GameState child{s.date + 1, s.node, s.history};
                child.history.push_back(joint);
                stack.push_back(child);
                child.node += 1;
                stack.push_back(child);
            });
    }
    return strat;
}

/// Restriction of a profile to a coalition, total on every state the
/// coalition can reach when the remaining players act arbitrarily. Only the
/// parts covering the coalition are consulted, so the other players'
/// strategies need not be defined on these states.
template <typename N>
CoalitionStrategy restrict_profile(const StrategyProfile& parts, const Coalition& who,
                                   const GameSpec<N>& game,
                                   const MarketLattice<N>& lattice,
                                   const GameState& from = root_state()) {
    std::vector<std::pair<const CoalitionStrategy*, std::size_t>> source(
        who.members.size(), {nullptr, 0});
    for (std::size_t i = 0; i < who.members.size(); ++i) {
        for (const CoalitionStrategy& part : parts) {
            const auto& mem = part.members.members;
            auto it = std::find(mem.begin(), mem.end(), who.members[i]);
            if (it != mem.end()) {
                source[i] = {&part, static_cast<std::size_t>(it - mem.begin())};
                break;
            }
        }
        if (!source[i].first)
            throw IncompleteStrategy("profile does not cover player " +
                                     std::to_string(who.members[i] + 1));
    }
    return make_strategy<N>(
        game, lattice, who,
        [&](const GameState& s) {
            JointAction ca(who.members.size());
            for (std::size_t i = 0; i < who.members.size(); ++i)
                ca[i] = source[i].first->at(s)[source[i].second];
            return ca;
        },
        from);
}

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Visits every history-predictable strategy of the coalition consistent with
/// the prefix leading to `from`, exactly once each. Throws BudgetExceeded
/// once more than `budget` strategies have been produced.
template <typename N>
void for_each_coalition_strategy(
    const GameSpec<N>& game, const MarketLattice<N>& lattice, const Coalition& who,
    const std::function<void(const CoalitionStrategy&)>& visit,
    const GameState& from = root_state(),
    std::uint64_t budget = kDefaultEnumerationBudget) {
    validate_game(game, lattice);
    Coalition others = who.complement(game.players);
    const std::uint64_t ca_count = detail::action_tuple_count(game.action_counts, who.members);

    std::vector<JointAction> ca_tuples;
    ca_tuples.reserve(ca_count);
    detail::for_each_action_tuple(game.action_counts, who.members,
                                  [&](const JointAction& t) { ca_tuples.push_back(t); });

    CoalitionStrategy current{who, {}};
    std::uint64_t produced = 0;

    std::function<void(const std::vector<GameState>&)> recurse =
        [&](const std::vector<GameState>& frontier) {
            if (frontier.empty()) {
                if (++produced > budget)
                    throw BudgetExceeded("strategy enumeration exceeded budget of " +
                                         std::to_string(budget));
                visit(current);
                return;
            }
            std::vector<std::size_t> pick(frontier.size(), 0);
            while (true) {
                for (std::size_t k = 0; k < frontier.size(); ++k)
                    current.choice[frontier[k]] = ca_tuples[pick[k]];
                std::set<GameState> next;
                for (std::size_t k = 0; k < frontier.size(); ++k) {
                    const GameState& s = frontier[k];
                    const JointAction& ca = ca_tuples[pick[k]];
                    detail::for_each_action_tuple(
                        game.action_counts, others.members, [&](const JointAction& oa) {
                            JointAction joint =
                                detail::weave(game.players, who, ca, others, oa);
                            if (game.settles(s, joint)) return;
                            GameState child{s.date + 1, s.node, s.history};
                            child.history.push_back(joint);
                            next.insert(child);
                            child.node += 1;
                            next.insert(child);
                        });
                }
                recurse(std::vector<GameState>(next.begin(), next.end()));
                for (const GameState& s : frontier) current.choice.erase(s);
                std::size_t k = frontier.size();
                while (k > 0) {
                    --k;
                    if (++pick[k] < ca_tuples.size()) break;
                    pick[k] = 0;
                    if (k == 0) return;
                }
            }
        };
    recurse({from});
}

/// Materialised variant of for_each_coalition_strategy.
template <typename N>
std::vector<CoalitionStrategy> enumerate_strategies(
    const GameSpec<N>& game, const MarketLattice<N>& lattice, const Coalition& who,
    const GameState& from = root_state(),
    std::uint64_t budget = kDefaultEnumerationBudget) {
    std::vector<CoalitionStrategy> all;
    for_each_coalition_strategy<N>(
        game, lattice, who, [&](const CoalitionStrategy& s) { all.push_back(s); }, from,
        budget);
    return all;
}

/// Expected discounted payoff vector of a profile, conditional on `from`.
template <typename N>
std::vector<N> expected_discounted_payoffs(const StrategyProfile& parts,
                                           const GameSpec<N>& game,
                                           const MarketLattice<N>& lattice,
                                           const MartingaleMeasure<N>& measure,
                                           const GameState& from = root_state()) {
    validate_game(game, lattice);
    const N q = measure.up_probability;
    const N p = measure.down_probability();
    std::function<std::vector<N>(const GameState&)> eval =
        [&](const GameState& s) -> std::vector<N> {
        JointAction a = profile_action(parts, game.players, s);
        if (game.settles(s, a)) {
            std::vector<N> v = game.settlement_payoff(s, a);
            const N b = lattice.numeraire(s.date);
            for (N& x : v) x = x / b;
            return v;
        }
        GameState child{s.date + 1, s.node, s.history};
        child.history.push_back(a);
        std::vector<N> dn = eval(child);
        child.node += 1;
        std::vector<N> up = eval(child);
        std::vector<N> out(game.players);
        for (int i = 0; i < game.players; ++i) out[i] = q * up[i] + p * dn[i];
        return out;
    };
    return eval(from);
}

/// Same, summed over a coalition.
template <typename N>
N expected_discounted_coalition_payoff(const StrategyProfile& parts,
                                       const Coalition& who, const GameSpec<N>& game,
                                       const MarketLattice<N>& lattice,
                                       const MartingaleMeasure<N>& measure,
                                       const GameState& from = root_state()) {
    std::vector<N> v = expected_discounted_payoffs(parts, game, lattice, measure, from);
    N sum{0};
    for (int i : who.members) sum += v[i];
    return sum;
}

} // namespace gclaim
