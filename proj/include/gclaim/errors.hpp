#pragma once

#include <stdexcept>
#include <string>

namespace gclaim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Market parameters admit riskless profit (accrual outside (down, up)).
struct ArbitrageViolation : Error {
    using Error::Error;
};

/// Input outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// A node-indexed vector has the wrong number of entries.
struct ShapeError : Error {
    using Error::Error;
};

/// A strategy lacks an assignment at a reachable state.
struct IncompleteStrategy : Error {
    using Error::Error;
};

/// An enumeration exceeded the configured budget.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// Replication system is singular (coincident child prices).
struct SingularReplication : Error {
    using Error::Error;
};

/// Hyperplane with every coordinate fixed but the wrong total.
struct DegenerateHyperplane : Error {
    using Error::Error;
};

/// Simplex {x >= X, sum x = c} is empty (sum X > c).
struct EmptySimplex : Error {
    using Error::Error;
};

/// Sum of put payoffs exceeds sum of continuation values at some node.
struct ZeroSumViolation : Error {
    ZeroSumViolation(std::string msg, int date_index_, int node_)
        : Error(std::move(msg)), date_index(date_index_), node(node_) {}
    int date_index;
    int node;
};

/// Exhaustive search finished without a verified optimal equilibrium.
struct NoEquilibriumFound : Error {
    using Error::Error;
};

/// Config file is not parseable at all.
struct ParseError : Error {
    using Error::Error;
};

/// Config parses but violates the documented schema.
struct SchemaError : Error {
    using Error::Error;
};

/// A referenced date lies outside the lattice horizon.
struct HorizonError : Error {
    using Error::Error;
};

} // namespace gclaim
