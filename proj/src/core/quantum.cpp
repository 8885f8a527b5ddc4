#include "core/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace bell::quantum {

namespace {

constexpr std::size_t kMaxJointDim = std::size_t{1} << 26;
constexpr int kMaxPowerIters = 10'000;

double l2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& c : v) s += std::norm(c);
    return std::sqrt(s);
}

void check_dims(const PureState& psi, const Assemblage& A) {
    if (psi.local_dim != A.local_dim)
        throw InvalidArgument("state local dimension " + std::to_string(psi.local_dim) +
                              " does not match assemblage " +
                              std::to_string(A.local_dim));
    if (psi.parties != A.scenario.parties)
        throw InvalidArgument("state has " + std::to_string(psi.parties) +
                              " parties, assemblage " +
                              std::to_string(A.scenario.parties));
}

Eigen::MatrixXcd gaussian_matrix(int d, Rng& rng) {
    Eigen::MatrixXcd G(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) G(r, c) = cplx(rng.gaussian(), rng.gaussian());
    return G;
}

Eigen::MatrixXcd haar_unitary(int d, Rng& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian_matrix(d, rng));
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd& QR = qr.matrixQR();
    for (int i = 0; i < d; ++i) {
        const cplx r = QR(i, i);
        const double m = std::abs(r);
        Q.col(i) *= (m > 0.0) ? r / m : cplx(1.0, 0.0);
    }
    return Q;
}

} // namespace

std::size_t joint_dim(int local_dim, int parties) {
    if (local_dim < 2) throw InvalidArgument("local dimension must be at least 2");
    if (parties < 1) throw InvalidArgument("need at least one party");
    std::size_t dim = 1;
    for (int k = 0; k < parties; ++k) {
        if (dim > kMaxJointDim / static_cast<std::size_t>(local_dim))
            throw TooLargeError("joint dimension " + std::to_string(local_dim) + "^" +
                                std::to_string(parties) + " exceeds the memory budget");
        dim *= static_cast<std::size_t>(local_dim);
    }
    return dim;
}

PureState::PureState(int d, int N, std::vector<cplx> a)
    : local_dim(d), parties(N), amps(std::move(a)) {
    if (amps.size() != joint_dim(d, N))
        throw InvalidArgument("amplitude count " + std::to_string(amps.size()) +
                              " is not " + std::to_string(d) + "^" + std::to_string(N));
}

std::vector<ConstraintViolation> validate_state(const PureState& psi, double tol) {
    std::vector<ConstraintViolation> out;
    const double n = l2(psi.amps);
    if (std::abs(n - 1.0) > tol)
        out.push_back({"state norm differs from 1", std::abs(n - 1.0)});
    return out;
}

PureState basis_state(int local_dim, int parties) {
    std::vector<cplx> a(joint_dim(local_dim, parties), cplx(0.0, 0.0));
    a[0] = cplx(1.0, 0.0);
    return PureState(local_dim, parties, std::move(a));
}

PureState sample_haar_state(int local_dim, int parties, Rng& rng) {
    std::vector<cplx> a(joint_dim(local_dim, parties));
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (cplx& c : a) {
            c = cplx(rng.gaussian(), rng.gaussian());
            norm2 += std::norm(c);
        }
    } while (norm2 <= 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (cplx& c : a) c *= inv;
    return PureState(local_dim, parties, std::move(a));
}

std::vector<ConstraintViolation> validate_povm(const Povm& povm, double tol) {
    std::vector<ConstraintViolation> out;
    const int d = povm.dim;
    if (d < 1) {
        out.push_back({"POVM dimension must be positive", 1.0});
        return out;
    }
    if (povm.elements.empty()) {
        out.push_back({"POVM has no elements", 1.0});
        return out;
    }
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t a = 0; a < povm.elements.size(); ++a) {
        const Eigen::MatrixXcd& M = povm.elements[a];
        const std::string tag = "element " + std::to_string(a);
        if (M.rows() != d || M.cols() != d) {
            out.push_back({tag + " has wrong shape", 1.0});
            continue;
        }
        const double herm = (M - M.adjoint()).cwiseAbs().maxCoeff();
        if (herm > tol) out.push_back({tag + " is not Hermitian", herm});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (M + M.adjoint()),
                                                           Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (lo < -tol) out.push_back({tag + " has a negative eigenvalue", -lo});
        if (hi > 1.0 + tol)
            out.push_back({tag + " has operator norm above 1", hi - 1.0});
        sum += M;
    }
    const double comp =
        (sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    if (comp > tol) out.push_back({"elements do not sum to the identity", comp});
    return out;
}

Povm random_povm(int dim, int outcomes, Rng& rng) {
    if (dim < 2) throw InvalidArgument("random_povm: dimension must be at least 2");
    if (outcomes < 2) throw InvalidArgument("random_povm: need at least 2 outcomes");
    for (int attempt = 0; attempt < 10; ++attempt) {
        std::vector<Eigen::MatrixXcd> E;
        E.reserve(static_cast<std::size_t>(outcomes));
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dim, dim);
        for (int a = 0; a < outcomes; ++a) {
            const Eigen::MatrixXcd G = gaussian_matrix(dim, rng);
            E.push_back(G.adjoint() * G);
            S += E.back();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
        if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
            continue;  // singular Gram sum; try fresh draws
        const Eigen::MatrixXcd shalf = es.operatorInverseSqrt();
        Povm p;
        p.dim = dim;
        for (int a = 0; a < outcomes; ++a) {
            const Eigen::MatrixXcd M = shalf * E[static_cast<std::size_t>(a)] * shalf;
            p.elements.push_back(0.5 * (M + M.adjoint()));
        }
        return p;
    }
    throw InternalError("random_povm: Gram sum singular after 10 attempts");
}

Povm random_projective_povm(int dim, int outcomes, Rng& rng) {
    if (dim < 2)
        throw InvalidArgument("random_projective_povm: dimension must be at least 2");
    if (outcomes < 2)
        throw InvalidArgument("random_projective_povm: need at least 2 outcomes");
    const Eigen::MatrixXcd U = haar_unitary(dim, rng);
    Povm p;
    p.dim = dim;
    int col = 0;
    for (int a = 0; a < outcomes; ++a) {
        // spread ranks as evenly as possible; extra outcomes get zero elements
        const int rank = dim / outcomes + (a < dim % outcomes ? 1 : 0);
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
        for (int r = 0; r < rank; ++r, ++col)
            M += U.col(col) * U.col(col).adjoint();
        p.elements.push_back(std::move(M));
    }
    return p;
}

std::vector<ConstraintViolation> validate_assemblage(const Assemblage& A, double tol) {
    std::vector<ConstraintViolation> out;
    const Scenario& sc = A.scenario;
    if (A.povms.size() != static_cast<std::size_t>(sc.parties)) {
        out.push_back({"assemblage party count mismatch", 1.0});
        return out;
    }
    for (int k = 0; k < sc.parties; ++k) {
        const auto& row = A.povms[static_cast<std::size_t>(k)];
        if (row.size() != static_cast<std::size_t>(sc.settings)) {
            out.push_back({"party " + std::to_string(k) + " setting count mismatch", 1.0});
            continue;
        }
        for (int x = 0; x < sc.settings; ++x) {
            const Povm& p = row[static_cast<std::size_t>(x)];
            std::string where =
                "party " + std::to_string(k) + " setting " + std::to_string(x) + ": ";
            if (p.dim != A.local_dim)
                out.push_back({where + "dimension mismatch", 1.0});
            if (p.elements.size() != static_cast<std::size_t>(sc.outcomes))
                out.push_back({where + "outcome count mismatch", 1.0});
            for (auto& v : validate_povm(p, tol))
                out.push_back({where + v.constraint, v.magnitude});
        }
    }
    return out;
}

Assemblage random_assemblage(const Scenario& sc, int local_dim, Rng& rng,
                             PovmSampler sampler) {
    Assemblage A;
    A.scenario = sc;
    A.local_dim = local_dim;
    A.povms.resize(static_cast<std::size_t>(sc.parties));
    for (int k = 0; k < sc.parties; ++k) {
        auto& row = A.povms[static_cast<std::size_t>(k)];
        row.reserve(static_cast<std::size_t>(sc.settings));
        for (int x = 0; x < sc.settings; ++x)
            row.push_back(sampler == PovmSampler::gram
                              ? random_povm(local_dim, sc.outcomes, rng)
                              : random_projective_povm(local_dim, sc.outcomes, rng));
    }
    return A;
}

void apply_site_operator(const Eigen::MatrixXcd& M, int local_dim, int parties,
                         int site, std::span<const cplx> in, std::span<cplx> out) {
    if (in.size() != out.size()) throw InvalidArgument("apply_site_operator: size mismatch");
    if (in.data() == out.data())
        throw InvalidArgument("apply_site_operator: in and out must not alias");
    if (site < 0 || site >= parties) throw InvalidArgument("site index out of range");
    const int d = local_dim;
    std::size_t stride = 1;
    for (int k = 0; k < parties - 1 - site; ++k) stride *= static_cast<std::size_t>(d);
    const std::size_t cycle = stride * static_cast<std::size_t>(d);
    const std::size_t dim = in.size();
    for (std::size_t base = 0; base < dim; base += cycle) {
        for (std::size_t j = 0; j < stride; ++j) {
            const std::size_t at = base + j;
            for (int r = 0; r < d; ++r) {
                cplx acc(0.0, 0.0);
                for (int s = 0; s < d; ++s)
                    acc += M(r, s) * in[at + static_cast<std::size_t>(s) * stride];
                out[at + static_cast<std::size_t>(r) * stride] = acc;
            }
        }
    }
}

Eigen::MatrixXcd site_outer_contraction(int local_dim, int parties, int site,
                                        std::span<const cplx> psi,
                                        std::span<const cplx> u) {
    if (psi.size() != u.size())
        throw InvalidArgument("site_outer_contraction: size mismatch");
    const int d = local_dim;
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(d, d);
    std::size_t stride = 1;
    for (int k = 0; k < parties - 1 - site; ++k) stride *= static_cast<std::size_t>(d);
    const std::size_t cycle = stride * static_cast<std::size_t>(d);
    const std::size_t dim = psi.size();
    for (std::size_t base = 0; base < dim; base += cycle) {
        for (std::size_t j = 0; j < stride; ++j) {
            const std::size_t at = base + j;
            for (int s = 0; s < d; ++s)
                for (int r = 0; r < d; ++r)
                    G(s, r) += psi[at + static_cast<std::size_t>(s) * stride] *
                               std::conj(u[at + static_cast<std::size_t>(r) * stride]);
        }
    }
    return G;
}

Behaviour behaviour_of(const PureState& psi, const Assemblage& A) {
    check_dims(psi, A);
    const Scenario& sc = A.scenario;
    const int N = sc.parties;
    const int v = sc.outcomes;
    const std::size_t dim = psi.amps.size();
    Behaviour out(sc, std::vector<double>(sc.behaviour_size(), 0.0));
    std::vector<std::vector<cplx>> layer(static_cast<std::size_t>(N) + 1,
                                         std::vector<cplx>(dim));
    std::vector<int> xs(static_cast<std::size_t>(N));
    std::vector<int> as(static_cast<std::size_t>(N));
    for (std::size_t xidx = 0; xidx < sc.setting_blocks(); ++xidx) {
        decode_setting_tuple(sc, xidx, xs);
        auto rec = [&](auto&& self, int depth, std::span<const cplx> cur) -> void {
            if (depth == N) {
                cplx dot(0.0, 0.0);
                for (std::size_t i = 0; i < dim; ++i)
                    dot += std::conj(psi.amps[i]) * cur[i];
                out.probs[block_entry(sc, outcome_tuple_index(sc, as), xidx)] =
                    dot.real();
                return;
            }
            auto& buf = layer[static_cast<std::size_t>(depth) + 1];
            for (int a = 0; a < v; ++a) {
                as[static_cast<std::size_t>(depth)] = a;
                apply_site_operator(
                    A.element(depth, xs[static_cast<std::size_t>(depth)], a),
                    A.local_dim, N, depth, cur, buf);
                self(self, depth + 1, buf);
            }
        };
        rec(rec, 0, psi.amps);
    }
    return out;
}

double evaluate_Q(const PureState& psi, const BellFunctional& T, const Assemblage& A) {
    if (T.scenario != A.scenario)
        throw InvalidArgument("functional and assemblage scenarios differ");
    return evaluate_functional(T, behaviour_of(psi, A));
}

BellOperator::BellOperator(const BellFunctional& T, const Assemblage& A) : A_(A) {
    if (T.scenario != A.scenario)
        throw InvalidArgument("functional and assemblage scenarios differ");
    const Scenario& sc = A.scenario;
    dim_ = joint_dim(A.local_dim, sc.parties);
    const std::size_t nblocks = sc.setting_blocks();
    std::map<std::size_t, Block> by_setting;
    std::vector<int> tuple(static_cast<std::size_t>(sc.parties));
    for (std::size_t e = 0; e < T.coeffs.size(); ++e) {
        const double t = T.coeffs[e];
        if (t == 0.0) continue;
        const std::size_t aidx = e / nblocks;
        const std::size_t xidx = e % nblocks;
        auto it = by_setting.find(xidx);
        if (it == by_setting.end()) {
            Block blk;
            decode_setting_tuple(sc, xidx, tuple);
            blk.settings = tuple;
            it = by_setting.emplace(xidx, std::move(blk)).first;
        }
        decode_outcome_tuple(sc, aidx, tuple);
        // ascending e means ascending outcome index per block: already sorted
        it->second.terms.push_back({tuple, t});
    }
    blocks_.reserve(by_setting.size());
    for (auto& [xidx, blk] : by_setting) blocks_.push_back(std::move(blk));
    // depth-indexed scratch; shared across calls, so instances must not be
    // used from two threads at once (clone per worker instead)
    scratch_.assign(static_cast<std::size_t>(sc.parties) + 1,
                    std::vector<cplx>(dim_));
}

template <typename Leaf>
void BellOperator::walk(std::span<const cplx> in, Leaf&& leaf) const {
    const int N = parties();
    for (const auto& blk : blocks_) {
        auto rec = [&](auto&& self, std::size_t lo, std::size_t hi, int depth,
                       std::span<const cplx> cur) -> void {
            if (depth == N) {
                leaf(blk.terms[lo].coeff, cur);
                return;
            }
            std::size_t i = lo;
            while (i < hi) {
                const int a = blk.terms[i].outcomes[static_cast<std::size_t>(depth)];
                std::size_t j = i;
                while (j < hi &&
                       blk.terms[j].outcomes[static_cast<std::size_t>(depth)] == a)
                    ++j;
                auto& buf = scratch_[static_cast<std::size_t>(depth) + 1];
                apply_site_operator(
                    A_.element(depth, blk.settings[static_cast<std::size_t>(depth)], a),
                    A_.local_dim, N, depth, cur, buf);
                self(self, i, j, depth + 1, buf);
                i = j;
            }
        };
        rec(rec, 0, blk.terms.size(), 0, in);
    }
}

void BellOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
    if (in.size() != dim_ || out.size() != dim_)
        throw InvalidArgument("BellOperator::apply: vector size mismatch");
    std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
    walk(in, [&](double coeff, std::span<const cplx> leafvec) {
        for (std::size_t i = 0; i < dim_; ++i) out[i] += coeff * leafvec[i];
    });
}

double BellOperator::expectation(std::span<const cplx> psi) const {
    if (psi.size() != dim_)
        throw InvalidArgument("BellOperator::expectation: vector size mismatch");
    double acc = 0.0;
    walk(psi, [&](double coeff, std::span<const cplx> leafvec) {
        cplx dot(0.0, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) dot += std::conj(psi[i]) * leafvec[i];
        acc += coeff * dot.real();
    });
    return acc;
}

double BellOperator::mean() const {
    double acc = 0.0;
    for (const auto& blk : blocks_) {
        for (const auto& term : blk.terms) {
            double prod = term.coeff;
            for (int k = 0; k < parties(); ++k)
                prod *= A_.element(k, blk.settings[static_cast<std::size_t>(k)],
                                   term.outcomes[static_cast<std::size_t>(k)])
                            .trace()
                            .real();
            acc += prod;
        }
    }
    return acc / static_cast<double>(dim_);
}

std::vector<cplx> bell_operator_apply(const BellFunctional& T, const Assemblage& A,
                                      std::span<const cplx> phi) {
    BellOperator B(T, A);
    std::vector<cplx> out(B.dim());
    B.apply(phi, out);
    return out;
}

double operator_norm(const BellOperator& B, bool enforce_cap, double tol) {
    const std::size_t n = B.dim();
    Rng rng(0x6f5902ac237024bdULL);  // fixed internal stream: deterministic result
    std::vector<cplx> phi(n), w(n), w2(n);
    double start2 = 0.0;
    for (cplx& c : phi) {
        c = cplx(rng.gaussian(), rng.gaussian());
        start2 += std::norm(c);
    }
    const double inv = 1.0 / std::sqrt(start2);
    for (cplx& c : phi) c *= inv;

    double mu_prev = -1.0;
    double residual = 0.0;
    for (int it = 0; it < kMaxPowerIters; ++it) {
        B.apply(phi, w);
        B.apply(w, w2);
        const double mu = l2(w2);  // ||B^2 phi|| with unit phi
        if (mu < 1e-280) return 0.0;
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += std::norm(w2[i] - mu * phi[i]);
        residual = std::sqrt(r2);
        if (mu_prev >= 0.0 && std::abs(mu - mu_prev) <= tol * std::max(1.0, mu)) {
            const double result = std::sqrt(mu);
            if (enforce_cap) {
                const Scenario& sc = B.assemblage().scenario;
                double cap = 1.0;
                for (int k = 0; k < sc.parties; ++k)
                    cap *= 2.0 * sc.settings - 1.0;
                if (result > cap + std::max(tol, 1e-9) * 10.0 * cap)
                    throw InternalError(
                        "operator norm exceeds the settings-count cap for a "
                        "normalized functional");
            }
            return result;
        }
        mu_prev = mu;
        const double minv = 1.0 / mu;
        for (std::size_t i = 0; i < n; ++i) phi[i] = w2[i] * minv;
    }
    throw ConvergenceError("operator norm power iteration did not converge", residual);
}

double operator_norm(const BellFunctional& T, const Assemblage& A, double tol) {
    BellOperator B(T, A);
    return operator_norm(B, T.normalized, tol);
}

PureState bell_phi_plus() {
    const double r = 1.0 / std::sqrt(2.0);
    return PureState(2, 2, {cplx(r, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(r, 0.0)});
}

Assemblage chsh_optimal_assemblage() {
    Eigen::Matrix2cd Z, X, I2;
    Z << 1.0, 0.0, 0.0, -1.0;
    X << 0.0, 1.0, 1.0, 0.0;
    I2.setIdentity();
    const double r = 1.0 / std::sqrt(2.0);
    auto from_observable = [&](const Eigen::Matrix2cd& O) {
        Povm p;
        p.dim = 2;
        p.elements.push_back(0.5 * (I2 + O));  // outcome 0 <-> eigenvalue +1
        p.elements.push_back(0.5 * (I2 - O));
        return p;
    };
    Assemblage A;
    A.scenario = Scenario(2, 2, 2);
    A.local_dim = 2;
    A.povms = {{from_observable(Z), from_observable(X)},
               {from_observable(r * (Z + X)), from_observable(r * (Z - X))}};
    return A;
}

} // namespace bell::quantum
