#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/catalog.hpp"
#include "core/quantum.hpp"

namespace bell::mc {

// Runs fn over [0, count) split into at most `workers` contiguous chunks,
// one thread per chunk.  fn(begin, end) must only write state owned by its
// own range; the first exception thrown is rethrown after join.
void parallel_chunks(std::size_t count, int workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

struct SeesawResult {
    quantum::Assemblage assemblage;
    double q = 0.0;
    std::vector<double> trace;  // Q after each sweep; nondecreasing
    bool converged = false;
    int iterations = 0;
};

// Party-by-party measurement updates at fixed state.  Each sweep recomputes
// every party's effective operators and applies the exact two-outcome
// eigenspace update (pairwise cycling when v > 2), so the Q trace never
// decreases.  Stops when a sweep gains less than 1e-9 or at max_iters.
SeesawResult seesaw_measurements(const quantum::PureState& psi, const BellFunctional& T,
                                 const quantum::Assemblage& start, int max_iters = 200);

struct StateOpt {
    quantum::PureState psi;
    double q = 0.0;
    int iterations = 0;
};

// Top eigenpair of the Bell operator by power iteration with a positive
// spectral shift.  ConvergenceError (with residual) past 10^4 iterations.
StateOpt optimize_state(const BellFunctional& T, const quantum::Assemblage& A,
                        double tol = 1e-9);

struct ConfigOpt {
    quantum::PureState psi;
    quantum::Assemblage assemblage;
    double q = 0.0;
    std::vector<double> trace;  // Q after each (measurement, state) round
    bool converged = false;
    int rounds = 0;
};

// Alternates measurement sweeps and state steps from a random measurement
// start until the gain drops below 1e-9.
ConfigOpt optimize_configuration(const BellFunctional& T, const quantum::Assemblage& start,
                                 int max_rounds = 50, int seesaw_iters = 200);

struct RestartReport {
    double best_abs = 0.0;      // the violation lower bound
    double best_q = 0.0;        // signed value of the winner
    std::string best_functional;
    int best_iterations = 0;
    quantum::Assemblage best_assemblage;
    std::vector<double> restart_values;  // per (functional, orientation, restart)
};

// Max of |Q*| over the supplied functionals, both orientations of each, and
// R seeded measurement restarts, at fixed state.  Restart streams derive
// from (seed, functional, orientation, restart index) only, so enlarging R
// keeps earlier runs identical and the result nondecreasing.
RestartReport violation_lower_bound(const quantum::PureState& psi,
                                    const std::vector<BellFunctional>& functionals,
                                    int restarts, std::uint64_t seed,
                                    int seesaw_iters = 200,
                                    quantum::PovmSampler sampler = quantum::PovmSampler::gram);

struct ExperimentConfig {
    Scenario scenario;
    int local_dim = 2;
    std::vector<std::string> functional_names;  // catalog entries, normalized on load
    bool lp_refine = false;  // also optimize the functional over the cap-b cube
    double lp_cap = 1.0;     // via the polytope LP on the winner's behaviour
    double threshold = 1.5;  // c
    int samples = 100;       // K
    int restarts = 20;       // R
    int seesaw_iters = 200;
    std::uint64_t seed = 0;
    int workers = 0;  // 0: hardware concurrency
    quantum::PovmSampler sampler = quantum::PovmSampler::gram;
};

void validate(const ExperimentConfig& cfg);

struct SampleOutcome {
    std::size_t index = 0;
    double best_q = 0.0;
    double best_abs = 0.0;
    std::string best_functional;
    int iterations = 0;
    std::uint64_t seed = 0;
};

struct TailEstimate {
    ExperimentConfig config;
    std::size_t hits = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;   // exact binomial 95% interval
    double ci_high = 1.0;
    std::vector<SampleOutcome> samples;
    // The per-state optimizer is a lower bound on the true optimal
    // violation, so p_hat underestimates the tail probability.
    bool lower_bound_estimator = true;
    double wall_seconds = 0.0;
};

// Exact binomial (Clopper-Pearson) two-sided interval.
std::pair<double, double> binomial_interval(std::size_t hits, std::size_t trials,
                                            double confidence = 0.95);

// K Haar states; per state the restart optimizer; reports the fraction
// whose lower bound exceeds c.  Bit-identical output for a fixed
// (config, seed) under any worker count.
TailEstimate tail_experiment(const ExperimentConfig& cfg);

struct ConcentrationRecord {
    int local_dim = 0;
    int parties = 0;
    std::size_t samples = 0;
    double mean = 0.0;       // sample mean of Q
    double variance = 0.0;   // unbiased sample variance
    double trace_mean = 0.0; // trace of the operator / d^N: the exact mean
    double lipschitz = 0.0;
    std::vector<double> eps_grid;
    std::vector<double> empirical;  // fraction with Q - trace_mean > eps
    std::vector<double> levy_log;   // log bound at each eps
};

// Q over K Haar states at fixed normalized T and measurements; empirical
// exceedance of the exact mean against the sphere-concentration bound.
ConcentrationRecord concentration_experiment(const BellFunctional& T,
                                             const quantum::Assemblage& A, int samples,
                                             std::uint64_t seed, int workers = 0,
                                             std::vector<double> eps_grid = {});

} // namespace bell::mc
