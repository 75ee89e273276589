#pragma once

#include <string>
#include <vector>

#include "gclaim/errors.hpp"
#include "gclaim/numeric.hpp"

namespace gclaim {

/// Recombining binomial market: one risky asset S, one accruing bond B.
/// Nodes are (date t, up-count j) with 0 <= j <= t. Immutable after
/// construction and safe for concurrent reads.
template <typename N>
struct MarketLattice {
    N initial_price;
    N up_factor;
    N down_factor;
    N accrual; // per-period gross rate R
    int steps; // number of periods T

    /// S(t, j) = S0 * u^j * d^(t-j), exact in rational mode.
    N price(int date, int up_count) const {
        check_node(date, up_count);
        return initial_price * num_pow(up_factor, up_count) *
               num_pow(down_factor, date - up_count);
    }

    /// Numeraire B_t = R^t.
    N numeraire(int date) const {
        if (date < 0 || date > steps)
            throw DomainError("date outside lattice horizon: " + std::to_string(date));
        return num_pow(accrual, date);
    }

    N discounted_price(int date, int up_count) const {
        return price(date, up_count) / numeraire(date);
    }

    int node_count() const { return (steps + 1) * (steps + 2) / 2; }

    void check_node(int date, int up_count) const {
        if (date < 0 || date > steps)
            throw DomainError("date outside lattice horizon: " + std::to_string(date));
        if (up_count < 0 || up_count > date)
            throw DomainError("node index out of range: " + std::to_string(up_count) +
                              " at date " + std::to_string(date));
    }
};

/// The unique risk-neutral one-step up probability q, identical at every node.
template <typename N>
struct MartingaleMeasure {
    N up_probability;

    N down_probability() const { return N(1) - up_probability; }
};

template <typename N>
MarketLattice<N> build_lattice(const N& initial_price, const N& up_factor,
                               const N& down_factor, const N& accrual, int steps) {
    if (steps < 1) throw DomainError("steps must be >= 1");
    if (!(initial_price > N(0))) throw DomainError("initial price must be positive");
    if (!(down_factor > N(0))) throw DomainError("down factor must be positive");
    if (!(down_factor < up_factor)) throw DomainError("need down < up");
    if (!(down_factor < accrual && accrual < up_factor))
        throw ArbitrageViolation("accrual must lie strictly between down and up factors");
    return MarketLattice<N>{initial_price, up_factor, down_factor, accrual, steps};
}

/// q solves q*u + (1-q)*d = R; unique because d < R < u.
template <typename N>
MartingaleMeasure<N> martingale_measure(const MarketLattice<N>& lattice) {
    N q = (lattice.accrual - lattice.down_factor) /
          (lattice.up_factor - lattice.down_factor);
    return MartingaleMeasure<N>{q};
}

/// One backward step: input indexed by the t+1 nodes (size t+2), output by the
/// t nodes. out[j] = q * in[j+1] + (1-q) * in[j]. Values are in discounted
/// units, so no division by the accrual happens here.
template <typename N>
std::vector<N> conditional_expectation(const std::vector<N>& values_at_next_date,
                                       const MartingaleMeasure<N>& measure) {
    if (values_at_next_date.size() < 2)
        throw ShapeError("need values for every node of a date >= 1");
    std::vector<N> out(values_at_next_date.size() - 1);
    const N q = measure.up_probability;
    const N p = measure.down_probability();
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = q * values_at_next_date[j + 1] + p * values_at_next_date[j];
    return out;
}

template <typename N>
N discount(const MarketLattice<N>& lattice, const N& value, int date) {
    return value / lattice.numeraire(date);
}

template <typename N>
N compound(const MarketLattice<N>& lattice, const N& value, int date) {
    return value * lattice.numeraire(date);
}

} // namespace gclaim
