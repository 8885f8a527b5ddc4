#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/catalog.hpp"
#include "core/lhv.hpp"
#include "core/montecarlo.hpp"
#include "core/quantum.hpp"
#include "core/rng.hpp"

using namespace bell;
using quantum::Assemblage;
using quantum::PovmSampler;
using quantum::PureState;

namespace {

BellFunctional normalized_chsh() { return lhv::normalize(catalog::get("chsh").raw); }

BellFunctional random_normalized(const Scenario& sc, Rng& rng) {
    BellFunctional T{sc, std::vector<double>(sc.behaviour_size(), 0.0)};
    for (auto& c : T.coeffs) c = 2.0 * rng.uniform() - 1.0;
    return lhv::normalize(T);
}

} // namespace

TEST_CASE("parallel_chunks covers every index exactly once") {
    for (int workers : {1, 3, 8}) {
        std::vector<std::atomic<int>> touched(101);
        for (auto& t : touched) t = 0;
        mc::parallel_chunks(101, workers, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) touched[i]++;
        });
        for (auto& t : touched) CHECK(t == 1);
    }
    // empty range is a no-op
    mc::parallel_chunks(0, 4, [&](std::size_t, std::size_t) { CHECK(false); });
}

TEST_CASE("parallel_chunks rethrows worker exceptions") {
    CHECK_THROWS_AS(mc::parallel_chunks(16, 4,
                                        [&](std::size_t lo, std::size_t) {
                                            if (lo > 0) throw std::runtime_error("boom");
                                        }),
                    std::runtime_error);
}

TEST_CASE("seesaw trace is nondecreasing on random instances") {
    Scenario sc{2, 2, 2};
    Rng rng(181);
    for (int rep = 0; rep < 100; ++rep) {
        BellFunctional T = random_normalized(sc, rng);
        PureState psi = quantum::sample_haar_state(2, 2, rng);
        Assemblage A = quantum::random_assemblage(sc, 2, rng);
        auto res = mc::seesaw_measurements(psi, T, A, 40);
        REQUIRE(!res.trace.empty());
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] >= res.trace[i - 1] - 1e-12);
        CHECK(res.q == doctest::Approx(res.trace.back()).epsilon(1e-12));
        // the sweep value equals an honest re-evaluation of the result
        CHECK(quantum::evaluate_Q(psi, T, res.assemblage) == doctest::Approx(res.q).epsilon(1e-9));
    }
}

TEST_CASE("seesaw recovers the two-party optimum from projective starts") {
    BellFunctional T = normalized_chsh();
    PureState psi = quantum::bell_phi_plus();
    const double target = std::sqrt(2.0);
    int hit = 0;
    for (int s = 0; s < 20; ++s) {
        Rng rng(derive_seed(991, s));
        Assemblage A = quantum::random_assemblage(T.scenario, 2, rng,
                                                 PovmSampler::projective);
        auto res = mc::seesaw_measurements(psi, T, A);
        CHECK(res.q <= target + 1e-9);
        if (std::abs(res.q - target) <= 1e-6) ++hit;
    }
    CHECK(hit >= 19);
}

TEST_CASE("optimize_state finds the top eigenvector") {
    BellFunctional raw = catalog::get("chsh").raw;
    Assemblage A = quantum::chsh_optimal_assemblage();
    auto res = mc::optimize_state(raw, A);
    CHECK(res.q == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
    // matches the operator norm of the same configuration
    double nrm = quantum::operator_norm(raw, A, 1e-10);
    CHECK(res.q == doctest::Approx(nrm).epsilon(1e-8));

    // an unreachable tolerance exhausts the iteration cap and reports the
    // residual it stalled at
    try {
        mc::optimize_state(raw, A, 1e-30);
        CHECK(false);
    } catch (const ConvergenceError& e) {
        CHECK(e.residual < 1e-8);
        CHECK(e.residual >= 0.0);
    }
}

TEST_CASE("full configuration optimization reaches the known optimum") {
    BellFunctional T = normalized_chsh();
    int hit = 0;
    for (int s = 0; s < 10; ++s) {
        Rng rng(derive_seed(4242, s));
        Assemblage A = quantum::random_assemblage(T.scenario, 2, rng,
                                                 PovmSampler::projective);
        auto res = mc::optimize_configuration(T, A);
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] >= res.trace[i - 1] - 1e-12);
        if (std::abs(res.q - std::sqrt(2.0)) <= 1e-6) ++hit;
    }
    CHECK(hit >= 9);
}

TEST_CASE("violation lower bound is nondecreasing in the restart budget") {
    Rng rng(77);
    PureState psi = quantum::sample_haar_state(2, 2, rng);
    std::vector<BellFunctional> fs = {normalized_chsh()};
    auto r2 = mc::violation_lower_bound(psi, fs, 2, 555, 60, PovmSampler::projective);
    auto r5 = mc::violation_lower_bound(psi, fs, 5, 555, 60, PovmSampler::projective);
    CHECK(r5.best_abs >= r2.best_abs - 1e-15);
    REQUIRE(r2.restart_values.size() == 4);
    REQUIRE(r5.restart_values.size() == 10);
    // seeded nesting: the first restarts of each orientation block agree
    for (int orient = 0; orient < 2; ++orient)
        for (int r = 0; r < 2; ++r)
            CHECK(r2.restart_values[orient * 2 + r] ==
                  r5.restart_values[orient * 5 + r]);
    CHECK_THROWS_AS(mc::violation_lower_bound(psi, {}, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(mc::violation_lower_bound(psi, fs, 0, 1), InvalidArgument);
}

TEST_CASE("binomial interval matches an independent evaluation") {
    struct Row {
        std::size_t k, n;
        double lo, hi;
    };
    // frozen from a 40-digit out-of-tree script (exact binomial inversion)
    const Row rows[] = {
        {0, 100, 0.0, 0.036216692645176419},
        {100, 100, 0.96378330735482358, 1.0},
        {5, 100, 0.016431879182052159, 0.11283491110546277},
        {1, 3, 0.0084037586596126366, 0.90570067594975392},
        {0, 1000, 0.0, 0.0036820838968656721},
        {50, 1000, 0.037335397604661768, 0.065390487915493648},
    };
    for (const auto& r : rows) {
        auto [lo, hi] = mc::binomial_interval(r.k, r.n);
        CHECK(lo == doctest::Approx(r.lo).epsilon(1e-12));
        CHECK(hi == doctest::Approx(r.hi).epsilon(1e-12));
    }
    CHECK_THROWS_AS(mc::binomial_interval(5, 4), InvalidArgument);
}

TEST_CASE("experiment config validation") {
    mc::ExperimentConfig cfg;
    cfg.scenario = Scenario{2, 2, 2};
    cfg.functional_names = {"chsh"};
    CHECK_NOTHROW(mc::validate(cfg));
    auto broken = cfg;
    broken.samples = 0;
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    broken = cfg;
    broken.restarts = 0;
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    broken = cfg;
    broken.threshold = 0.0;
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    broken = cfg;
    broken.local_dim = 1;
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    broken = cfg;
    broken.functional_names.clear();
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    broken = cfg;
    broken.workers = -1;
    CHECK_THROWS_AS(mc::validate(broken), InvalidArgument);
    // wrong-scenario catalog entry is rejected at run time
    broken = cfg;
    broken.functional_names = {"i3322"};
    broken.samples = 1;
    CHECK_THROWS_AS(mc::tail_experiment(broken), InvalidArgument);
}

TEST_CASE("tail experiment is deterministic under any worker count") {
    mc::ExperimentConfig cfg;
    cfg.scenario = Scenario{2, 2, 2};
    cfg.functional_names = {"chsh"};
    cfg.samples = 6;
    cfg.restarts = 2;
    cfg.seesaw_iters = 40;
    cfg.threshold = 1.3;
    cfg.seed = 20240817;
    cfg.workers = 1;
    auto a = mc::tail_experiment(cfg);
    cfg.workers = 4;
    auto b = mc::tail_experiment(cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].index == i);
        CHECK(a.samples[i].best_q == b.samples[i].best_q);
        CHECK(a.samples[i].best_abs == b.samples[i].best_abs);
        CHECK(a.samples[i].seed == b.samples[i].seed);
        CHECK(a.samples[i].best_functional == b.samples[i].best_functional);
    }
    CHECK(a.hits == b.hits);
    CHECK(a.p_hat == b.p_hat);

    // summary fields are consistent with the per-sample data
    std::size_t hits = 0;
    for (const auto& so : a.samples)
        if (so.best_abs > cfg.threshold) ++hits;
    CHECK(a.hits == hits);
    CHECK(a.p_hat == static_cast<double>(hits) / 6.0);
    auto ci = mc::binomial_interval(hits, 6);
    CHECK(a.ci_low == ci.first);
    CHECK(a.ci_high == ci.second);
    CHECK(a.lower_bound_estimator);

    // per-sample streams depend only on (seed, index): a different experiment
    // seed changes every stream
    cfg.seed = 20240818;
    auto c = mc::tail_experiment(cfg);
    int same = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].best_q == c.samples[i].best_q) ++same;
    CHECK(same < 6);
}

TEST_CASE("lp refinement never loses to the fixed functional") {
    mc::ExperimentConfig cfg;
    cfg.scenario = Scenario{2, 2, 2};
    cfg.functional_names = {"chsh"};
    cfg.samples = 4;
    cfg.restarts = 2;
    cfg.seesaw_iters = 40;
    cfg.seed = 5150;
    cfg.workers = 2;
    auto plain = mc::tail_experiment(cfg);
    cfg.lp_refine = true;
    cfg.lp_cap = 1.0;
    auto refined = mc::tail_experiment(cfg);
    for (std::size_t i = 0; i < plain.samples.size(); ++i)
        CHECK(refined.samples[i].best_abs >= plain.samples[i].best_abs - 1e-9);
}

TEST_CASE("concentration experiment: exact mean, determinism, bound") {
    BellFunctional T = normalized_chsh();
    Assemblage A = quantum::chsh_optimal_assemblage();
    auto rec = mc::concentration_experiment(T, A, 2000, 909, 3);
    CHECK(rec.local_dim == 2);
    CHECK(rec.parties == 2);
    CHECK(rec.samples == 2000);

    // trace mean is the exact Haar average of Q
    quantum::BellOperator op(T, A);
    CHECK(rec.trace_mean == doctest::Approx(op.mean()).epsilon(1e-12));
    // the sample mean sits near it
    CHECK(std::abs(rec.mean - rec.trace_mean) <=
          5.0 * std::sqrt(rec.variance / 2000.0) + 1e-3);
    CHECK(rec.variance > 0.0);
    CHECK(rec.lipschitz == 6.0);

    REQUIRE(rec.eps_grid.size() == 10);
    CHECK(rec.eps_grid.front() == doctest::Approx(0.1));
    CHECK(rec.eps_grid.back() == doctest::Approx(1.0));
    REQUIRE(rec.empirical.size() == 10);
    REQUIRE(rec.levy_log.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        const double bound = std::exp(rec.levy_log[i]);
        const double se = std::sqrt(bound * (1.0 - std::min(bound, 1.0)) / 2000.0);
        CHECK(rec.empirical[i] <= std::min(1.0, bound + 3.0 * se + 1e-12));
    }

    // worker count does not affect a single bit of the record
    auto again = mc::concentration_experiment(T, A, 2000, 909, 1);
    CHECK(again.mean == rec.mean);
    CHECK(again.variance == rec.variance);
    for (std::size_t i = 0; i < 10; ++i) CHECK(again.empirical[i] == rec.empirical[i]);

    // unnormalized functionals are rejected
    CHECK_THROWS_AS(mc::concentration_experiment(catalog::get("chsh").raw, A, 100, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(mc::concentration_experiment(T, A, 1, 1), InvalidArgument);
}
