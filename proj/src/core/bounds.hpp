#pragma once
#include <string>
#include <string_view>
#include <vector>

#include "core/errors.hpp"

namespace bell::bounds {

// Parameters of the concentration tail bounds.  threshold is the violation
// level c, slack the net resolution delta used in the derivation.
struct TailBoundParams {
    int parties = 2;       // N
    int settings = 2;      // m
    int outcomes = 2;      // v
    int local_dim = 2;     // d
    double coeff_cap = 1;  // b
    double threshold = 0;  // c
    double slack = 0;      // delta
};

// N, d >= 2; m, v >= 1; b, delta > 0; c > delta + 1.  DomainError otherwise.
void validate(const TailBoundParams& p);

enum class TailVariant { theorem, appendix, derived };
std::string to_string(TailVariant v);
TailVariant variant_from_string(std::string_view s);

struct TailBoundResult {
    TailBoundParams params;
    TailVariant variant = TailVariant::theorem;
    double log_value = 0.0;            // natural log of the probability bound
    std::vector<double> terms;         // appendix: five summands (log 4 excluded)
};

// Lipschitz constant of Q in the state argument: 2(2m-1)^(N-1).
double lipschitz_state(int parties, int settings);

struct ParamLipschitz {
    double lambda = 0.0;      // 4 N b (mv)^N d^2
    double log_lambda = 0.0;  // defined for b > 0
    double n = 0.0;           // d^2 m v N + (mv)^N, exact below 2^53
    bool n_exact = true;      // false once the integer value exceeds 2^53
};

// Parameter-space Lipschitz constant and cube dimension.
ParamLipschitz lipschitz_param(int parties, int settings, int outcomes,
                               int local_dim, double coeff_cap);

// Largest possible |Q| for a normalized functional: (2m-1)^N.
double loubenets_bound(int parties, int settings);

// log 2 - (D+1) eps^2 / (9 pi^3 lip^2): sphere concentration for a
// lip-Lipschitz function of a uniformly random unit vector in real
// dimension D+1.
double levy_tail(double sphere_dim, double lip, double eps);

// log 4 + n log(2 lambda/delta + 2) - (D+1)(c-delta-1)^2/(9 pi^3 lip^2).
// Direct arithmetic; theorem_bound supplies the overflow-safe route for
// large parameters.
double generic_tail_bound(double n, double lambda, double delta, double sphere_dim,
                          double lip, double threshold);

// Tail bound on P(optimal violation > c) in the stated variant.  All three
// share the structure log 4 + net term - concentration term and are
// computed in log domain throughout.
TailBoundResult theorem_bound(const TailBoundParams& p, TailVariant variant);

// True iff d > m v (2m-1)^2: the regime where the bound decays with N.
bool regime_check(int local_dim, int settings, int outcomes);

} // namespace bell::bounds
