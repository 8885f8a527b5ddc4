#include "core/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "core/bounds.hpp"

namespace bell::mc {

namespace {

using quantum::Assemblage;
using quantum::cplx;
using quantum::PureState;

// Projector onto the span of eigenvectors with nonnegative eigenvalue.
Eigen::MatrixXcd nonneg_eigenspace(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    const int d = static_cast<int>(H.rows());
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        if (es.eigenvalues()(i) >= 0.0)
            P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    return P;
}

// Square root of a positive semidefinite matrix, clamping rounding noise.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Effective operators for one party: F[setting][outcome] such that
// Q = sum_{x,a} Tr(Pi_{a,x} F[x][a]) with the other parties' measurements
// and the state held fixed.
std::vector<std::vector<Eigen::MatrixXcd>> effective_operators(const PureState& psi,
                                                               const BellFunctional& T,
                                                               const Assemblage& A,
                                                               int party) {
    const Scenario& sc = T.scenario;
    const int N = sc.parties;
    const int d = A.local_dim;
    const std::size_t nblocks = sc.setting_blocks();
    std::vector<std::vector<Eigen::MatrixXcd>> F(
        static_cast<std::size_t>(sc.settings),
        std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(sc.outcomes),
                                      Eigen::MatrixXcd::Zero(d, d)));
    std::vector<int> as(static_cast<std::size_t>(N));
    std::vector<int> xs(static_cast<std::size_t>(N));
    std::vector<cplx> bufa(psi.amps.size());
    std::vector<cplx> bufb(psi.amps.size());
    for (std::size_t e = 0; e < T.coeffs.size(); ++e) {
        const double t = T.coeffs[e];
        if (t == 0.0) continue;
        decode_outcome_tuple(sc, e / nblocks, as);
        decode_setting_tuple(sc, e % nblocks, xs);
        std::span<const cplx> cur(psi.amps);
        bool in_a = true;
        for (int j = 0; j < N; ++j) {
            if (j == party) continue;
            auto& dst = in_a ? bufa : bufb;
            quantum::apply_site_operator(
                A.element(j, xs[static_cast<std::size_t>(j)],
                          as[static_cast<std::size_t>(j)]),
                d, N, j, cur, dst);
            cur = dst;
            in_a = !in_a;
        }
        F[static_cast<std::size_t>(xs[static_cast<std::size_t>(party)])]
         [static_cast<std::size_t>(as[static_cast<std::size_t>(party)])] +=
            t * quantum::site_outer_contraction(d, N, party, psi.amps, cur);
    }
    for (auto& row : F)
        for (auto& M : row) M = 0.5 * (M + M.adjoint());
    return F;
}

double povm_objective(const quantum::Povm& p,
                      const std::vector<Eigen::MatrixXcd>& Fx) {
    double q = 0.0;
    for (std::size_t a = 0; a < p.elements.size(); ++a)
        q += (p.elements[a] * Fx[a]).trace().real();
    return q;
}

// Exact optimum over one measurement given its effective operators.
void update_povm(quantum::Povm& p, const std::vector<Eigen::MatrixXcd>& Fx) {
    const int v = static_cast<int>(p.elements.size());
    const int d = p.dim;
    if (v == 2) {
        const Eigen::MatrixXcd P = nonneg_eigenspace(Fx[0] - Fx[1]);
        p.elements[0] = P;
        p.elements[1] = Eigen::MatrixXcd::Identity(d, d) - P;
        return;
    }
    // pairwise exact two-outcome improvements until none gains
    for (int cycle = 0; cycle < 50; ++cycle) {
        bool improved = false;
        for (int a = 0; a < v; ++a) {
            for (int b = a + 1; b < v; ++b) {
                const Eigen::MatrixXcd R = p.elements[static_cast<std::size_t>(a)] +
                                           p.elements[static_cast<std::size_t>(b)];
                const Eigen::MatrixXcd delta =
                    Fx[static_cast<std::size_t>(a)] - Fx[static_cast<std::size_t>(b)];
                const Eigen::MatrixXcd rs = psd_sqrt(R);
                const Eigen::MatrixXcd P = nonneg_eigenspace(rs * delta * rs);
                Eigen::MatrixXcd na = rs * P * rs;
                na = 0.5 * (na + na.adjoint());
                const double gain =
                    ((na - p.elements[static_cast<std::size_t>(a)]) * delta)
                        .trace()
                        .real();
                if (gain > 1e-10) {
                    p.elements[static_cast<std::size_t>(a)] = na;
                    Eigen::MatrixXcd nb = R - na;
                    p.elements[static_cast<std::size_t>(b)] = 0.5 * (nb + nb.adjoint());
                    improved = true;
                }
            }
        }
        if (!improved) return;
    }
}

} // namespace

void parallel_chunks(std::size_t count, int workers,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t w = workers > 0
                        ? static_cast<std::size_t>(workers)
                        : std::max(1u, std::thread::hardware_concurrency());
    w = std::min(w, count);
    if (w <= 1) {
        fn(0, count);
        return;
    }
    const std::size_t base = count / w;
    const std::size_t rem = count % w;
    std::vector<std::thread> pool;
    pool.reserve(w);
    std::exception_ptr first;
    std::mutex guard;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < w; ++i) {
        const std::size_t end = begin + base + (i < rem ? 1 : 0);
        pool.emplace_back([&fn, begin, end, &first, &guard] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(guard);
                if (!first) first = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

SeesawResult seesaw_measurements(const PureState& psi, const BellFunctional& T,
                                 const Assemblage& start, int max_iters) {
    if (T.scenario != start.scenario)
        throw InvalidArgument("functional and assemblage scenarios differ");
    if (max_iters < 1) throw InvalidArgument("need at least one sweep");
    SeesawResult out;
    out.assemblage = start;
    double q = quantum::evaluate_Q(psi, T, out.assemblage);
    out.trace.push_back(q);
    const int N = T.scenario.parties;
    for (int iter = 0; iter < max_iters; ++iter) {
        double sweep_q = q;
        for (int k = 0; k < N; ++k) {
            auto F = effective_operators(psi, T, out.assemblage, k);
            auto& row = out.assemblage.povms[static_cast<std::size_t>(k)];
            double qk = 0.0;
            for (int x = 0; x < T.scenario.settings; ++x) {
                update_povm(row[static_cast<std::size_t>(x)],
                            F[static_cast<std::size_t>(x)]);
                qk += povm_objective(row[static_cast<std::size_t>(x)],
                                     F[static_cast<std::size_t>(x)]);
            }
            sweep_q = qk;  // exact objective after this party's exact update
        }
        out.iterations = iter + 1;
        out.trace.push_back(sweep_q);
        if (sweep_q - q < 1e-9) {
            out.converged = true;
            q = std::max(q, sweep_q);
            break;
        }
        q = sweep_q;
    }
    out.q = quantum::evaluate_Q(psi, T, out.assemblage);
    return out;
}

StateOpt optimize_state(const BellFunctional& T, const Assemblage& A, double tol) {
    quantum::BellOperator B(T, A);
    const std::size_t n = B.dim();
    double sigma = 1.0;
    for (double t : T.coeffs) sigma += std::abs(t);  // >= ||B|| + 1
    Rng rng(0x41d1b0a7c9e85f23ULL);
    std::vector<cplx> phi(n), w(n);
    double norm2 = 0.0;
    for (cplx& c : phi) {
        c = cplx(rng.gaussian(), rng.gaussian());
        norm2 += std::norm(c);
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (cplx& c : phi) c *= inv;

    double residual = 0.0;
    for (int it = 1; it <= 10'000; ++it) {
        B.apply(phi, w);
        double q = 0.0;  // Rayleigh quotient at unit phi
        for (std::size_t i = 0; i < n; ++i)
            q += (std::conj(phi[i]) * w[i]).real();
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += std::norm(w[i] - q * phi[i]);
        residual = std::sqrt(r2);
        if (residual <= tol * std::max(1.0, std::abs(q))) {
            StateOpt out;
            out.psi = PureState(A.local_dim, A.scenario.parties,
                                std::vector<cplx>(phi.begin(), phi.end()));
            out.q = q;
            out.iterations = it;
            return out;
        }
        // shifted step keeps the dominant eigenvalue the signed maximum
        norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] += sigma * phi[i];
            norm2 += std::norm(w[i]);
        }
        inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < n; ++i) phi[i] = w[i] * inv;
    }
    throw ConvergenceError("state power iteration did not converge", residual);
}

ConfigOpt optimize_configuration(const BellFunctional& T, const Assemblage& start,
                                 int max_rounds, int seesaw_iters) {
    ConfigOpt out;
    out.assemblage = start;
    StateOpt st = optimize_state(T, out.assemblage);
    out.psi = st.psi;
    out.q = st.q;
    out.trace.push_back(st.q);
    for (int round = 0; round < max_rounds; ++round) {
        SeesawResult sr = seesaw_measurements(out.psi, T, out.assemblage, seesaw_iters);
        out.assemblage = sr.assemblage;
        st = optimize_state(T, out.assemblage);
        out.psi = st.psi;
        out.rounds = round + 1;
        out.trace.push_back(st.q);
        if (st.q - out.q < 1e-9) {
            out.q = std::max(out.q, st.q);
            out.converged = true;
            break;
        }
        out.q = st.q;
    }
    return out;
}

RestartReport violation_lower_bound(const PureState& psi,
                                    const std::vector<BellFunctional>& functionals,
                                    int restarts, std::uint64_t seed, int seesaw_iters,
                                    quantum::PovmSampler sampler) {
    if (functionals.empty()) throw InvalidArgument("no functionals supplied");
    if (restarts < 1) throw InvalidArgument("need at least one restart");
    RestartReport out;
    for (std::size_t i = 0; i < functionals.size(); ++i) {
        const BellFunctional& T = functionals[i];
        for (int orient = 0; orient < 2; ++orient) {
            BellFunctional Ts = T;
            if (orient == 1)
                for (double& t : Ts.coeffs) t = -t;
            for (int r = 0; r < restarts; ++r) {
                // stream keyed by (functional, orientation, restart): runs
                // stay identical when restarts grows
                const std::uint64_t stream = derive_seed(
                    seed, (static_cast<std::uint64_t>(i) * 2 + orient) * 0x100000ULL +
                              static_cast<std::uint64_t>(r) + 1);
                Rng rng(stream);
                Assemblage A0 =
                    quantum::random_assemblage(T.scenario, psi.local_dim, rng, sampler);
                SeesawResult sr = seesaw_measurements(psi, Ts, A0, seesaw_iters);
                const double cand = std::abs(sr.q);
                out.restart_values.push_back(cand);
                if (cand > out.best_abs) {
                    out.best_abs = cand;
                    out.best_q = orient == 0 ? sr.q : -sr.q;
                    out.best_functional = T.name;
                    out.best_iterations = sr.iterations;
                    out.best_assemblage = sr.assemblage;
                }
            }
        }
    }
    return out;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.scenario.parties < 2) throw InvalidArgument("need at least 2 parties");
    if (cfg.local_dim < 2) throw InvalidArgument("local dimension must be at least 2");
    if (cfg.samples < 1) throw InvalidArgument("need at least one sample");
    if (cfg.restarts < 1) throw InvalidArgument("need at least one restart");
    if (cfg.seesaw_iters < 1) throw InvalidArgument("need at least one sweep");
    if (!(cfg.threshold > 0.0)) throw InvalidArgument("threshold must be positive");
    if (cfg.functional_names.empty())
        throw InvalidArgument("experiment needs at least one catalog functional");
    if (cfg.workers < 0) throw InvalidArgument("worker count must be nonnegative");
}

std::pair<double, double> binomial_interval(std::size_t hits, std::size_t trials,
                                            double confidence) {
    if (trials == 0) return {0.0, 1.0};
    if (hits > trials) throw InvalidArgument("hits exceed trials");
    const double alpha = 1.0 - confidence;
    double lo = 0.0;
    double hi = 1.0;
    if (hits > 0) {
        boost::math::beta_distribution<double> dist(
            static_cast<double>(hits), static_cast<double>(trials - hits + 1));
        lo = boost::math::quantile(dist, alpha / 2.0);
    }
    if (hits < trials) {
        boost::math::beta_distribution<double> dist(
            static_cast<double>(hits + 1), static_cast<double>(trials - hits));
        hi = boost::math::quantile(dist, 1.0 - alpha / 2.0);
    }
    return {lo, hi};
}

TailEstimate tail_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<BellFunctional> funcs;
    funcs.reserve(cfg.functional_names.size());
    for (const auto& name : cfg.functional_names) {
        catalog::CatalogEntry e = catalog::get(name);
        if (e.scenario != cfg.scenario)
            throw InvalidArgument("catalog entry " + name +
                                  " does not live in the configured scenario");
        funcs.push_back(lhv::normalize(e.raw));
    }
    TailEstimate out;
    out.config = cfg;
    out.samples.resize(static_cast<std::size_t>(cfg.samples));
    const int d = cfg.local_dim;
    const int N = cfg.scenario.parties;
    parallel_chunks(
        static_cast<std::size_t>(cfg.samples), cfg.workers,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t s = lo; s < hi; ++s) {
                const std::uint64_t sseed = derive_seed(cfg.seed, s);
                Rng srng(derive_seed(sseed, 0xA11CEULL));
                PureState psi = quantum::sample_haar_state(d, N, srng);
                RestartReport rep = violation_lower_bound(
                    psi, funcs, cfg.restarts, derive_seed(sseed, 0xB0BULL),
                    cfg.seesaw_iters, cfg.sampler);
                SampleOutcome& so = out.samples[s];
                so.index = s;
                so.best_q = rep.best_q;
                so.best_abs = rep.best_abs;
                so.best_functional = rep.best_functional;
                so.iterations = rep.best_iterations;
                so.seed = sseed;
                if (cfg.lp_refine) {
                    Behaviour p = quantum::behaviour_of(psi, rep.best_assemblage);
                    lhv::BestFunctional bf = lhv::best_functional(p, cfg.lp_cap);
                    if (bf.value > so.best_abs) {
                        so.best_abs = bf.value;
                        so.best_q = bf.value;
                        so.best_functional = "lp";
                    }
                }
            }
        });
    for (const auto& so : out.samples)
        if (so.best_abs > cfg.threshold) ++out.hits;
    out.p_hat = static_cast<double>(out.hits) / static_cast<double>(cfg.samples);
    std::tie(out.ci_low, out.ci_high) = binomial_interval(
        out.hits, static_cast<std::size_t>(cfg.samples));
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

ConcentrationRecord concentration_experiment(const BellFunctional& T,
                                             const Assemblage& A, int samples,
                                             std::uint64_t seed, int workers,
                                             std::vector<double> eps_grid) {
    if (!T.normalized)
        throw InvalidArgument("concentration experiment requires a normalized functional");
    if (T.scenario != A.scenario)
        throw InvalidArgument("functional and assemblage scenarios differ");
    if (samples < 2) throw InvalidArgument("need at least two samples");
    if (eps_grid.empty())
        for (int i = 1; i <= 10; ++i) eps_grid.push_back(0.1 * i);

    ConcentrationRecord out;
    out.local_dim = A.local_dim;
    out.parties = A.scenario.parties;
    out.samples = static_cast<std::size_t>(samples);
    out.eps_grid = std::move(eps_grid);
    out.lipschitz = bounds::lipschitz_state(A.scenario.parties, A.scenario.settings);

    quantum::BellOperator Bmain(T, A);
    out.trace_mean = Bmain.mean();
    const double dim = static_cast<double>(Bmain.dim());

    std::vector<double> values(static_cast<std::size_t>(samples));
    parallel_chunks(values.size(), workers, [&](std::size_t lo, std::size_t hi) {
        quantum::BellOperator B(T, A);  // scratch buffers are per-instance
        for (std::size_t s = lo; s < hi; ++s) {
            Rng rng(derive_seed(seed, s));
            PureState psi = quantum::sample_haar_state(A.local_dim,
                                                       A.scenario.parties, rng);
            values[s] = B.expectation(psi.amps);
        }
    });

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    out.mean = mean;
    out.variance = var;

    out.empirical.resize(out.eps_grid.size());
    out.levy_log.resize(out.eps_grid.size());
    for (std::size_t j = 0; j < out.eps_grid.size(); ++j) {
        const double eps = out.eps_grid[j];
        std::size_t over = 0;
        for (double v : values)
            if (v - out.trace_mean > eps) ++over;
        out.empirical[j] =
            static_cast<double>(over) / static_cast<double>(values.size());
        out.levy_log[j] = bounds::levy_tail(2.0 * dim - 1.0, out.lipschitz, eps);
    }
    return out;
}

} // namespace bell::mc
