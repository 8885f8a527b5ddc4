#pragma once
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace bell {

// Correlation scenario: `parties` boxes, each with `settings` inputs and
// `outcomes` outputs per input.
struct Scenario {
    int parties = 0;
    int settings = 0;
    int outcomes = 0;

    Scenario() = default;
    Scenario(int parties_, int settings_, int outcomes_);

    // (settings * outcomes)^parties, checked against 64-bit width at construction.
    std::size_t behaviour_size() const { return behaviour_size_; }
    std::size_t setting_blocks() const { return setting_blocks_; }  // settings^parties
    std::size_t outcome_tuples() const { return outcome_tuples_; }  // outcomes^parties

    bool operator==(const Scenario& o) const {
        return parties == o.parties && settings == o.settings && outcomes == o.outcomes;
    }
    bool operator!=(const Scenario& o) const { return !(*this == o); }

  private:
    std::size_t behaviour_size_ = 0;
    std::size_t setting_blocks_ = 0;
    std::size_t outcome_tuples_ = 0;
};

// Canonical flattening: outcomes major (row-major over parties), settings
// minor.  idx = (sum_i a_i v^{N-1-i}) * m^N + sum_i x_i m^{N-1-i}.
// Every module and file format uses this one convention.
std::size_t flat_index(const Scenario& sc, std::span<const int> outcomes,
                       std::span<const int> settings);
void unflatten(const Scenario& sc, std::size_t idx, std::span<int> outcomes,
               std::span<int> settings);

std::size_t outcome_tuple_index(const Scenario& sc, std::span<const int> outcomes);
std::size_t setting_tuple_index(const Scenario& sc, std::span<const int> settings);
void decode_outcome_tuple(const Scenario& sc, std::size_t idx, std::span<int> outcomes);
void decode_setting_tuple(const Scenario& sc, std::size_t idx, std::span<int> settings);

// Entry position of outcome-tuple `a` within setting block `x`:
// a * m^N + x with a, x the tuple indices above.
inline std::size_t block_entry(const Scenario& sc, std::size_t outcome_idx,
                               std::size_t setting_idx) {
    return outcome_idx * sc.setting_blocks() + setting_idx;
}

struct Behaviour {
    Scenario scenario;
    std::vector<double> probs;  // length behaviour_size(), canonical order

    Behaviour() = default;
    Behaviour(const Scenario& sc, std::vector<double> p);

    double at(std::span<const int> outcomes, std::span<const int> settings) const {
        return probs[flat_index(scenario, outcomes, settings)];
    }
};

// Uniform behaviour p = 1/v^N everywhere.
Behaviour uniform_behaviour(const Scenario& sc);

struct ConstraintViolation {
    std::string constraint;  // human-readable description
    double magnitude;        // how far outside tolerance
};

constexpr double kDefaultProbabilityTol = 1e-9;

// Empty report iff all entries lie in [-tol, 1+tol] and every setting block
// sums to one within tol.
std::vector<ConstraintViolation> validate_behaviour(const Behaviour& p,
                                                    double tol = kDefaultProbabilityTol);

struct SignallingCheck {
    bool nonsignalling = false;
    double worst_discrepancy = 0.0;
};

// Compares single-party setting swaps: for every party, marginals of the
// remaining parties must not depend on that party's setting.  Finite
// compositions of these swaps generate all subset conditions.
SignallingCheck check_nonsignalling(const Behaviour& p, double tol = kDefaultProbabilityTol);

// Transform metadata carried by functionals through normalize/positivize.
struct Provenance {
    double scale = 1.0;                       // divisor applied to coefficients
    std::optional<double> theta;              // constant absorbed by positivization
    std::vector<std::size_t> substituted;     // entry indices rewritten via the complement
    bool negated = false;                     // orientation flip applied first
    std::string note;
};

// Linear functional on behaviours.  coeff_cap is the entrywise bound b of
// the admissible family; classical bounds are cached once computed.
struct BellFunctional {
    Scenario scenario;
    std::vector<double> coeffs;  // length behaviour_size(), canonical order
    double coeff_cap = 1.0;
    std::optional<double> classical_lower;
    std::optional<double> classical_upper;
    bool normalized = false;
    std::string name;
    std::optional<Provenance> provenance;

    BellFunctional() = default;
    BellFunctional(const Scenario& sc, std::vector<double> c, double cap = 1.0);

    double& coeff(std::span<const int> outcomes, std::span<const int> settings) {
        return coeffs[flat_index(scenario, outcomes, settings)];
    }
    double coeff(std::span<const int> outcomes, std::span<const int> settings) const {
        return coeffs[flat_index(scenario, outcomes, settings)];
    }
};

// sum_e T_e p_e; throws InvalidArgument on scenario mismatch.
double evaluate_functional(const BellFunctional& T, const Behaviour& p);

} // namespace bell
