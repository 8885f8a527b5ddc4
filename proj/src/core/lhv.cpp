#include "core/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/simplex.hpp"

namespace bell::lhv {

std::uint64_t strategy_count(const Scenario& sc, std::uint64_t cap) {
    std::uint64_t count = 1;
    const std::uint64_t base = static_cast<std::uint64_t>(sc.outcomes);
    for (int i = 0; i < sc.parties * sc.settings; ++i) {
        if (count > cap / base + 1) count = cap + 1;  // saturate, avoid overflow
        else count *= base;
        if (count > cap)
            throw TooLargeError("scenario too large for enumeration: " +
                                std::to_string(sc.outcomes) + "^" +
                                std::to_string(sc.parties * sc.settings) + " vertices exceeds cap " +
                                std::to_string(cap));
    }
    return count;
}

DeterministicStrategy strategy_at(const Scenario& sc, std::uint64_t index) {
    DeterministicStrategy s;
    s.scenario = sc;
    s.tables.assign(static_cast<std::size_t>(sc.parties),
                    std::vector<int>(static_cast<std::size_t>(sc.settings), 0));
    // Lexicographic: the last (party, setting) cell is the fastest digit.
    for (int p = sc.parties - 1; p >= 0; --p) {
        for (int x = sc.settings - 1; x >= 0; --x) {
            s.tables[static_cast<std::size_t>(p)][static_cast<std::size_t>(x)] =
                static_cast<int>(index % static_cast<std::uint64_t>(sc.outcomes));
            index /= static_cast<std::uint64_t>(sc.outcomes);
        }
    }
    return s;
}

void enumerate_strategies(const Scenario& sc,
                          const std::function<void(const DeterministicStrategy&)>& visit,
                          std::uint64_t cap) {
    const std::uint64_t count = strategy_count(sc, cap);
    DeterministicStrategy s;
    s.scenario = sc;
    s.tables.assign(static_cast<std::size_t>(sc.parties),
                    std::vector<int>(static_cast<std::size_t>(sc.settings), 0));
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        visit(s);
        // Increment the table as a base-v odometer, last cell fastest.
        for (int cell = sc.parties * sc.settings - 1; cell >= 0; --cell) {
            int& o = s.tables[static_cast<std::size_t>(cell / sc.settings)]
                             [static_cast<std::size_t>(cell % sc.settings)];
            if (++o < sc.outcomes) break;
            o = 0;
        }
    }
}

Behaviour strategy_behaviour(const DeterministicStrategy& s) {
    const Scenario& sc = s.scenario;
    Behaviour p(sc, std::vector<double>(sc.behaviour_size(), 0.0));
    std::vector<int> sets(static_cast<std::size_t>(sc.parties));
    std::vector<int> outs(static_cast<std::size_t>(sc.parties));
    for (std::size_t x = 0; x < sc.setting_blocks(); ++x) {
        decode_setting_tuple(sc, x, sets);
        for (int i = 0; i < sc.parties; ++i)
            outs[static_cast<std::size_t>(i)] = s.respond(i, sets[static_cast<std::size_t>(i)]);
        p.probs[block_entry(sc, outcome_tuple_index(sc, outs), x)] = 1.0;
    }
    return p;
}

double evaluate_on_strategy(const BellFunctional& T, const DeterministicStrategy& s) {
    const Scenario& sc = T.scenario;
    if (sc != s.scenario) throw InvalidArgument("evaluate_on_strategy: scenario mismatch");
    std::vector<int> sets(static_cast<std::size_t>(sc.parties));
    std::vector<int> outs(static_cast<std::size_t>(sc.parties));
    double sum = 0.0;
    for (std::size_t x = 0; x < sc.setting_blocks(); ++x) {
        decode_setting_tuple(sc, x, sets);
        for (int i = 0; i < sc.parties; ++i)
            outs[static_cast<std::size_t>(i)] = s.respond(i, sets[static_cast<std::size_t>(i)]);
        sum += T.coeffs[block_entry(sc, outcome_tuple_index(sc, outs), x)];
    }
    return sum;
}

std::pair<double, double> classical_bounds(const BellFunctional& T, std::uint64_t cap) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    enumerate_strategies(
        T.scenario,
        [&](const DeterministicStrategy& s) {
            const double v = evaluate_on_strategy(T, s);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        },
        cap);
    return {lo, hi};
}

std::pair<double, double> ensure_bounds(BellFunctional& T, std::uint64_t cap) {
    if (!T.classical_lower || !T.classical_upper) {
        auto [lo, hi] = classical_bounds(T, cap);
        T.classical_lower = lo;
        T.classical_upper = hi;
    }
    return {*T.classical_lower, *T.classical_upper};
}

BellFunctional normalize(const BellFunctional& T, std::uint64_t cap) {
    BellFunctional out = T;
    auto [lo, hi] = ensure_bounds(out, cap);
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (scale == 0.0)
        throw DomainError("normalize: functional vanishes on the local polytope");
    for (double& c : out.coeffs) c /= scale;
    out.coeff_cap = T.coeff_cap > 0.0 ? T.coeff_cap / scale : T.coeff_cap;
    out.classical_lower = lo / scale;
    out.classical_upper = hi / scale;
    out.normalized = true;
    Provenance prov = out.provenance.value_or(Provenance{});
    prov.scale *= scale;
    out.provenance = prov;
    return out;
}

BellFunctional positivize(const BellFunctional& T, std::uint64_t cap) {
    const Scenario& sc = T.scenario;
    BellFunctional work = T;
    auto [lo, hi] = ensure_bounds(work, cap);
    if (lo == 0.0 && hi == 0.0)
        throw DomainError("positivize: functional vanishes on the local polytope");

    Provenance prov = work.provenance.value_or(Provenance{});
    if (hi < 0.0) {
        // Orient so the upper bound is nonnegative.
        for (double& c : work.coeffs) c = -c;
        std::swap(lo, hi);
        lo = -lo;
        hi = -hi;
        prov.negated = true;
    }

    // Substitute each negative entry by the complement over all other
    // outcome tuples of the same setting block; the freed constants shift
    // the classical bound from hi to theta.
    std::vector<double> coeffs = work.coeffs;
    double negative_sum = 0.0;
    std::vector<std::size_t> substituted;
    for (std::size_t a = 0; a < sc.outcome_tuples(); ++a) {
        for (std::size_t x = 0; x < sc.setting_blocks(); ++x) {
            const std::size_t e = block_entry(sc, a, x);
            const double t = work.coeffs[e];
            if (t >= 0.0) continue;
            substituted.push_back(e);
            negative_sum += t;
            coeffs[e] -= t;  // entry goes to zero
            for (std::size_t a2 = 0; a2 < sc.outcome_tuples(); ++a2) {
                if (a2 == a) continue;
                coeffs[block_entry(sc, a2, x)] -= t;
            }
        }
    }
    const double theta = hi - negative_sum;
    if (theta <= 0.0)
        throw InternalError("positivize: nonpositive bound after substitution");
    for (double& c : coeffs) {
        c /= theta;
        if (c < -1e-12 || c > 1.0 + 1e-12)
            throw InternalError("positivize: coefficient outside [0,1] after rescaling");
        c = std::clamp(c, 0.0, 1.0);
    }

    BellFunctional out(sc, std::move(coeffs), 1.0);
    out.name = T.name;
    auto [plo, phi] = classical_bounds(out, cap);
    if (std::abs(phi - 1.0) > 1e-9)
        throw InternalError("positivize: classical upper bound is " + std::to_string(phi) +
                            ", expected 1");
    out.classical_lower = plo;
    out.classical_upper = phi;
    out.normalized = true;
    prov.scale *= theta;
    prov.theta = theta;
    prov.substituted = std::move(substituted);
    out.provenance = std::move(prov);
    return out;
}

BestFunctional best_functional(const Behaviour& p, double coeff_cap, std::uint64_t cap) {
    const Scenario& sc = p.scenario;
    const std::size_t n = sc.behaviour_size();
    if (coeff_cap < 0.0) throw InvalidArgument("best_functional: negative coefficient cap");
    if (coeff_cap == 0.0) {
        BellFunctional zero(sc, std::vector<double>(n, 0.0), 0.0);
        zero.classical_lower = 0.0;
        zero.classical_upper = 0.0;
        return {std::move(zero), 0.0};
    }

    // Shift to y = T + cap >= 0 so the box becomes 0 <= y <= 2 cap.
    // Strategy behaviours have unit block sums, so p_lambda . 1 = m^N.
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    const double block_total = static_cast<double>(sc.setting_blocks());
    enumerate_strategies(
        sc,
        [&](const DeterministicStrategy& s) {
            const Behaviour bp = strategy_behaviour(s);
            A.push_back(bp.probs);
            rhs.push_back(1.0 + coeff_cap * block_total);
            std::vector<double> neg(bp.probs.size());
            for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -bp.probs[j];
            A.push_back(std::move(neg));
            rhs.push_back(1.0 - coeff_cap * block_total);
        },
        cap);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(n, 0.0);
        row[j] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(2.0 * coeff_cap);
    }

    double p_total = 0.0;
    for (double v : p.probs) p_total += v;

    lp::Result r = lp::solve_max(A, rhs, p.probs);
    if (!r.optimal) throw InternalError("best_functional: LP reported infeasible");

    std::vector<double> coeffs(n);
    for (std::size_t j = 0; j < n; ++j) coeffs[j] = r.x[j] - coeff_cap;
    BellFunctional best(sc, std::move(coeffs), coeff_cap);
    auto [lo, hiv] = classical_bounds(best, cap);
    best.classical_lower = lo;
    best.classical_upper = hiv;
    return {std::move(best), r.objective - coeff_cap * p_total};
}

} // namespace bell::lhv
