#pragma once
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "core/scenario.hpp"

namespace bell::lhv {

// Vertex of the local polytope: a fixed outcome for every (party, setting).
struct DeterministicStrategy {
    Scenario scenario;
    std::vector<std::vector<int>> tables;  // [party][setting] -> outcome

    int respond(int party, int setting) const {
        return tables[static_cast<std::size_t>(party)][static_cast<std::size_t>(setting)];
    }
};

constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// v^(m*N), the vertex count; throws TooLargeError past the cap.
std::uint64_t strategy_count(const Scenario& sc, std::uint64_t cap = kDefaultEnumerationCap);

// Strategy #index in lexicographic table order (party 0 setting 0 is the
// most significant digit).
DeterministicStrategy strategy_at(const Scenario& sc, std::uint64_t index);

// Visits all v^(m*N) strategies in lexicographic order.
void enumerate_strategies(const Scenario& sc,
                          const std::function<void(const DeterministicStrategy&)>& visit,
                          std::uint64_t cap = kDefaultEnumerationCap);

// 0/1 behaviour of a strategy: one unit entry per setting block.
Behaviour strategy_behaviour(const DeterministicStrategy& s);

// T evaluated on strategy_behaviour(s) without materializing the behaviour.
double evaluate_on_strategy(const BellFunctional& T, const DeterministicStrategy& s);

// Exact (lower, upper) classical bounds by vertex enumeration.
std::pair<double, double> classical_bounds(const BellFunctional& T,
                                           std::uint64_t cap = kDefaultEnumerationCap);

// Fills in cached bounds if absent, returning them.
std::pair<double, double> ensure_bounds(BellFunctional& T,
                                        std::uint64_t cap = kDefaultEnumerationCap);

// T / max{|lower|, |upper|}; throws DomainError for a functional that
// vanishes on the local polytope.
BellFunctional normalize(const BellFunctional& T, std::uint64_t cap = kDefaultEnumerationCap);

// Rewrites negative-coefficient terms through the normalization identity
// P(a'|x') = 1 - sum_{a != a'} P(a|x'), then rescales by the absorbed
// constant.  Result has coefficients in [0,1] and classical upper bound 1;
// a behaviour violates the original inequality iff it violates the result.
BellFunctional positivize(const BellFunctional& T, std::uint64_t cap = kDefaultEnumerationCap);

struct BestFunctional {
    BellFunctional functional;
    double value = 0.0;  // optimal degree of violation of p over the admissible family
};

// Linear program: maximize T(p) over |T(p_lambda)| <= 1 for every
// deterministic strategy and |T_e| <= coeff_cap entrywise.
BestFunctional best_functional(const Behaviour& p, double coeff_cap,
                               std::uint64_t cap = kDefaultEnumerationCap);

} // namespace bell::lhv
