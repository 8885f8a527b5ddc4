#include "core/scenario.hpp"

#include <cmath>
#include <limits>

namespace bell {

namespace {

// a^b with overflow detection; throws InvalidArgument when the result does
// not fit in 64 bits.
std::size_t checked_pow(std::size_t base, int exp, const char* what) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
            throw InvalidArgument(std::string(what) + ": size overflows 64-bit width");
        r *= base;
    }
    return r;
}

} // namespace

Scenario::Scenario(int parties_, int settings_, int outcomes_)
    : parties(parties_), settings(settings_), outcomes(outcomes_) {
    if (parties < 1) throw InvalidArgument("scenario: parties must be >= 1");
    if (settings < 1) throw InvalidArgument("scenario: settings must be >= 1");
    if (outcomes < 2) throw InvalidArgument("scenario: outcomes must be >= 2");
    behaviour_size_ = checked_pow(static_cast<std::size_t>(settings) * outcomes, parties,
                                  "scenario behaviour");
    setting_blocks_ = checked_pow(static_cast<std::size_t>(settings), parties, "setting blocks");
    outcome_tuples_ = checked_pow(static_cast<std::size_t>(outcomes), parties, "outcome tuples");
}

std::size_t outcome_tuple_index(const Scenario& sc, std::span<const int> outcomes) {
    if (outcomes.size() != static_cast<std::size_t>(sc.parties))
        throw InvalidArgument("outcome tuple has wrong arity");
    std::size_t idx = 0;
    for (int i = 0; i < sc.parties; ++i) {
        const int a = outcomes[static_cast<std::size_t>(i)];
        if (a < 0 || a >= sc.outcomes)
            throw InvalidArgument("outcome out of range for party " + std::to_string(i));
        idx = idx * static_cast<std::size_t>(sc.outcomes) + static_cast<std::size_t>(a);
    }
    return idx;
}

std::size_t setting_tuple_index(const Scenario& sc, std::span<const int> settings) {
    if (settings.size() != static_cast<std::size_t>(sc.parties))
        throw InvalidArgument("setting tuple has wrong arity");
    std::size_t idx = 0;
    for (int i = 0; i < sc.parties; ++i) {
        const int x = settings[static_cast<std::size_t>(i)];
        if (x < 0 || x >= sc.settings)
            throw InvalidArgument("setting out of range for party " + std::to_string(i));
        idx = idx * static_cast<std::size_t>(sc.settings) + static_cast<std::size_t>(x);
    }
    return idx;
}

void decode_outcome_tuple(const Scenario& sc, std::size_t idx, std::span<int> outcomes) {
    for (int i = sc.parties - 1; i >= 0; --i) {
        outcomes[static_cast<std::size_t>(i)] =
            static_cast<int>(idx % static_cast<std::size_t>(sc.outcomes));
        idx /= static_cast<std::size_t>(sc.outcomes);
    }
}

void decode_setting_tuple(const Scenario& sc, std::size_t idx, std::span<int> settings) {
    for (int i = sc.parties - 1; i >= 0; --i) {
        settings[static_cast<std::size_t>(i)] =
            static_cast<int>(idx % static_cast<std::size_t>(sc.settings));
        idx /= static_cast<std::size_t>(sc.settings);
    }
}

std::size_t flat_index(const Scenario& sc, std::span<const int> outcomes,
                       std::span<const int> settings) {
    return block_entry(sc, outcome_tuple_index(sc, outcomes), setting_tuple_index(sc, settings));
}

void unflatten(const Scenario& sc, std::size_t idx, std::span<int> outcomes,
               std::span<int> settings) {
    if (idx >= sc.behaviour_size()) throw InvalidArgument("flat index out of range");
    decode_outcome_tuple(sc, idx / sc.setting_blocks(), outcomes);
    decode_setting_tuple(sc, idx % sc.setting_blocks(), settings);
}

Behaviour::Behaviour(const Scenario& sc, std::vector<double> p)
    : scenario(sc), probs(std::move(p)) {
    if (probs.size() != scenario.behaviour_size())
        throw InvalidArgument("behaviour: expected " + std::to_string(scenario.behaviour_size()) +
                              " entries, got " + std::to_string(probs.size()));
}

Behaviour uniform_behaviour(const Scenario& sc) {
    return Behaviour(sc, std::vector<double>(sc.behaviour_size(),
                                             1.0 / static_cast<double>(sc.outcome_tuples())));
}

std::vector<ConstraintViolation> validate_behaviour(const Behaviour& p, double tol) {
    if (p.probs.size() != p.scenario.behaviour_size())
        throw InvalidArgument("behaviour length does not match scenario");
    std::vector<ConstraintViolation> report;
    const Scenario& sc = p.scenario;
    for (std::size_t e = 0; e < p.probs.size(); ++e) {
        const double v = p.probs[e];
        if (v < -tol || v > 1.0 + tol) {
            const double mag = v < 0.0 ? -v : v - 1.0;
            report.push_back({"entry " + std::to_string(e) + " outside [0,1]", mag});
        }
    }
    for (std::size_t x = 0; x < sc.setting_blocks(); ++x) {
        double sum = 0.0;
        for (std::size_t a = 0; a < sc.outcome_tuples(); ++a) sum += p.probs[block_entry(sc, a, x)];
        if (std::abs(sum - 1.0) > tol)
            report.push_back({"setting block " + std::to_string(x) + " sums to " +
                                  std::to_string(sum),
                              std::abs(sum - 1.0)});
    }
    return report;
}

SignallingCheck check_nonsignalling(const Behaviour& p, double tol) {
    const Scenario& sc = p.scenario;
    double worst = 0.0;
    std::vector<int> outs(static_cast<std::size_t>(sc.parties));
    std::vector<int> sets(static_cast<std::size_t>(sc.parties));
    // For each party k: marginal over a_k must agree across k's settings,
    // for every fixed (a_{-k}, x_{-k}).
    for (int k = 0; k < sc.parties; ++k) {
        for (std::size_t others_a = 0; others_a < sc.outcome_tuples() /
                                                      static_cast<std::size_t>(sc.outcomes);
             ++others_a) {
            // Decode the N-1 outcome digits of the other parties.
            std::size_t rest = others_a;
            for (int i = sc.parties - 1; i >= 0; --i) {
                if (i == k) continue;
                outs[static_cast<std::size_t>(i)] =
                    static_cast<int>(rest % static_cast<std::size_t>(sc.outcomes));
                rest /= static_cast<std::size_t>(sc.outcomes);
            }
            for (std::size_t others_x = 0; others_x < sc.setting_blocks() /
                                                          static_cast<std::size_t>(sc.settings);
                 ++others_x) {
                rest = others_x;
                for (int i = sc.parties - 1; i >= 0; --i) {
                    if (i == k) continue;
                    sets[static_cast<std::size_t>(i)] =
                        static_cast<int>(rest % static_cast<std::size_t>(sc.settings));
                    rest /= static_cast<std::size_t>(sc.settings);
                }
                double reference = 0.0;
                for (int xk = 0; xk < sc.settings; ++xk) {
                    sets[static_cast<std::size_t>(k)] = xk;
                    double marginal = 0.0;
                    for (int ak = 0; ak < sc.outcomes; ++ak) {
                        outs[static_cast<std::size_t>(k)] = ak;
                        marginal += p.probs[flat_index(sc, outs, sets)];
                    }
                    if (xk == 0) {
                        reference = marginal;
                    } else {
                        worst = std::max(worst, std::abs(marginal - reference));
                    }
                }
            }
        }
    }
    return {worst <= tol, worst};
}

BellFunctional::BellFunctional(const Scenario& sc, std::vector<double> c, double cap)
    : scenario(sc), coeffs(std::move(c)), coeff_cap(cap) {
    if (coeffs.size() != scenario.behaviour_size())
        throw InvalidArgument("functional: expected " +
                              std::to_string(scenario.behaviour_size()) + " coefficients, got " +
                              std::to_string(coeffs.size()));
    if (cap < 0.0) throw InvalidArgument("functional: coefficient cap must be nonnegative");
}

double evaluate_functional(const BellFunctional& T, const Behaviour& p) {
    if (T.scenario != p.scenario)
        throw InvalidArgument("evaluate_functional: scenario mismatch");
    double sum = 0.0;
    for (std::size_t e = 0; e < T.coeffs.size(); ++e) sum += T.coeffs[e] * p.probs[e];
    return sum;
}

} // namespace bell
