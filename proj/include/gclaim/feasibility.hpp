#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gclaim/gamecore.hpp"
#include "gclaim/numeric.hpp"

namespace gclaim {

/// One inequality sum(coef . x) <= rhs with the original constraint labels it
/// was derived from.
struct FmRow {
    std::vector<Rational> coef;
    Rational rhs;
    std::set<std::string> provenance;
};

/// A conjunction of <= rows over a fixed variable count.
struct FmSystem {
    int vars = 0;
    std::vector<FmRow> rows;

    void add(std::vector<Rational> coef, Rational rhs, std::string label) {
        rows.push_back(FmRow{std::move(coef), std::move(rhs), {std::move(label)}});
    }
};

struct FmOutcome {
    bool feasible = false;
    std::vector<Rational> witness;            // lexicographically smallest point
    std::set<std::string> conflict;           // labels of an inconsistent subset
    std::vector<std::string> binding;         // constraints tight at the witness
};

namespace detail_fm {

inline void normalise(FmRow& r) {
    Rational lead{0};
    for (const Rational& c : r.coef)
        if (c != 0) {
            lead = abs(c);
            break;
        }
    if (lead == 0 || lead == 1) return;
    for (Rational& c : r.coef) c /= lead;
    r.rhs /= lead;
}

inline bool same_shape(const FmRow& a, const FmRow& b) {
    return a.coef == b.coef && a.rhs == b.rhs;
}

} // namespace detail_fm

/// Decides feasibility of the system by eliminating variables back to front,
/// exactly. On success the witness minimises x_1, then x_2, and so on, which
/// picks the lexicographically smallest vertex of a bounded polytope.
inline FmOutcome fourier_motzkin(const FmSystem& system) {
    FmOutcome out;
    // levels[v] holds the system over variables 0..v before x_v is eliminated.
    std::vector<std::vector<FmRow>> levels(system.vars);
    std::vector<FmRow> current = system.rows;

    for (int v = system.vars - 1; v >= 0; --v) {
        // Deduplicate to tame the combinatorial growth.
        std::vector<FmRow> compact;
        for (FmRow& r : current) {
            detail_fm::normalise(r);
            bool dup = false;
            for (const FmRow& c : compact)
                if (detail_fm::same_shape(r, c)) {
                    dup = true;
                    break;
                }
            if (!dup) compact.push_back(r);
        }
        levels[v] = compact;

        std::vector<FmRow> next;
        std::vector<const FmRow*> pos, neg;
        for (const FmRow& r : compact) {
            if (r.coef[v] > 0)
                pos.push_back(&r);
            else if (r.coef[v] < 0)
                neg.push_back(&r);
            else
                next.push_back(r);
        }
        for (const FmRow* p : pos) {
            for (const FmRow* n : neg) {
                FmRow mix;
                mix.coef.resize(system.vars, Rational(0));
                const Rational a = p->coef[v];
                const Rational b = -n->coef[v];
                for (int k = 0; k < system.vars; ++k)
                    mix.coef[k] = p->coef[k] * b + n->coef[k] * a;
                mix.rhs = p->rhs * b + n->rhs * a;
                mix.provenance = p->provenance;
                mix.provenance.insert(n->provenance.begin(), n->provenance.end());
                bool all_zero = true;
                for (const Rational& c : mix.coef)
                    if (c != 0) {
                        all_zero = false;
                        break;
                    }
                if (all_zero) {
                    if (mix.rhs < 0) {
                        out.feasible = false;
                        out.conflict = mix.provenance;
                        return out;
                    }
                    continue;
                }
                next.push_back(std::move(mix));
            }
        }
        current = std::move(next);
    }
    // Rows with no variables left: constants.
    for (const FmRow& r : current) {
        if (r.rhs < 0) {
            out.feasible = false;
            out.conflict = r.provenance;
            return out;
        }
    }

    out.feasible = true;
    out.witness.assign(system.vars, Rational(0));
    for (int v = 0; v < system.vars; ++v) {
        std::optional<Rational> low, high;
        for (const FmRow& r : levels[v]) {
            if (r.coef[v] == 0) continue;
            Rational partial = r.rhs;
            for (int k = 0; k < v; ++k) partial -= r.coef[k] * out.witness[k];
            Rational bound = partial / r.coef[v];
            if (r.coef[v] > 0) {
                if (!high || bound < *high) high = bound;
            } else {
                if (!low || bound > *low) low = bound;
            }
        }
        if (low) {
            out.witness[v] = *low;
        } else if (high) {
            out.witness[v] = *high; // unbounded below: any point on the cap
        }
        if (low && high && *low > *high) {
            // Numerically impossible given the elimination succeeded.
            out.feasible = false;
            return out;
        }
    }
    for (const FmRow& r : system.rows) {
        Rational lhs{0};
        for (int k = 0; k < system.vars; ++k) lhs += r.coef[k] * out.witness[k];
        if (lhs == r.rhs)
            out.binding.push_back(*r.provenance.begin());
    }
    return out;
}

/// The coalition price constraints of one game at one state: for every
/// nonempty coalition, the tranche-price total must lie in its no-arbitrage
/// interval.
struct CoalitionBounds {
    Coalition who;
    Rational lower;
    Rational upper;
};

inline FmSystem coalition_price_system(int players,
                                       const std::vector<CoalitionBounds>& bounds) {
    FmSystem sys;
    sys.vars = players;
    for (const CoalitionBounds& cb : bounds) {
        std::vector<Rational> up(players, Rational(0));
        for (int i : cb.who.members) up[i] = 1;
        std::vector<Rational> down(players, Rational(0));
        for (int i : cb.who.members) down[i] = -1;
        sys.add(up, cb.upper, "upper" + cb.who.label());
        sys.add(down, -cb.lower, "lower" + cb.who.label());
    }
    return sys;
}

/// Verdict for a quoted tranche-price vector (plus optional coalition-level
/// quotes): which intervals are violated and whether the quotes fail
/// additivity (an instant-repackaging profit).
struct QuoteViolation {
    Coalition who;
    Rational quoted_total;
    Rational lower;
    Rational upper;
    bool issuer_side = false; // above the upper bound
    bool holder_side = false; // below the lower bound
};

struct ResellingViolation {
    Coalition who;
    Rational coalition_quote;
    Rational member_sum;
};

struct QuoteClassification {
    std::vector<QuoteViolation> interval_violations;
    std::vector<ResellingViolation> reselling_violations;
    bool arbitrage_free() const {
        return interval_violations.empty() && reselling_violations.empty();
    }
};

inline QuoteClassification classify_quotes(
    const std::vector<CoalitionBounds>& bounds, const std::vector<Rational>& quotes,
    const std::map<Coalition, Rational>& coalition_quotes = {}) {
    QuoteClassification out;
    for (const CoalitionBounds& cb : bounds) {
        Rational total{0};
        for (int i : cb.who.members) total += quotes.at(i);
        auto it = coalition_quotes.find(cb.who);
        if (it != coalition_quotes.end() && it->second != total)
            out.reselling_violations.push_back(
                ResellingViolation{cb.who, it->second, total});
        Rational effective = (it != coalition_quotes.end()) ? it->second : total;
        QuoteViolation v{cb.who, effective, cb.lower, cb.upper, false, false};
        if (effective > cb.upper) v.issuer_side = true;
        if (effective < cb.lower) v.holder_side = true;
        if (v.issuer_side || v.holder_side) out.interval_violations.push_back(v);
    }
    return out;
}

} // namespace gclaim
