#pragma once
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "core/rng.hpp"
#include "core/scenario.hpp"

namespace bell::quantum {

using cplx = std::complex<double>;

constexpr double kStateNormTol = 1e-12;
constexpr double kPovmTol = 1e-10;

// Joint dimension d^N, checked against the memory budget.
std::size_t joint_dim(int local_dim, int parties);

struct PureState {
    int local_dim = 0;
    int parties = 0;
    std::vector<cplx> amps;  // length d^N; party 0 owns the most significant digit

    PureState() = default;
    PureState(int d, int N, std::vector<cplx> a);
};

std::vector<ConstraintViolation> validate_state(const PureState& psi,
                                                double tol = kStateNormTol);

// Computational basis state |00...0>.
PureState basis_state(int local_dim, int parties);

// Amplitudes drawn as standard complex Gaussians, then normalized: the
// uniform measure on the unit sphere of the joint space.
PureState sample_haar_state(int local_dim, int parties, Rng& rng);

struct Povm {
    int dim = 0;
    std::vector<Eigen::MatrixXcd> elements;
};

// Hermitian within tol, eigenvalues >= -tol, sum to identity within tol,
// operator norms <= 1 + tol.
std::vector<ConstraintViolation> validate_povm(const Povm& povm,
                                               double tol = kPovmTol);

enum class PovmSampler { gram, projective };

// Gram construction: E_a = G_a^dag G_a from Gaussian G_a, then
// Pi_a = S^{-1/2} E_a S^{-1/2} with S the sum.  Full-support distribution
// over the measurement set.
Povm random_povm(int dim, int outcomes, Rng& rng);

// Rank-split of a Haar random unitary's column projectors; outcomes beyond
// the dimension get zero elements.
Povm random_projective_povm(int dim, int outcomes, Rng& rng);

struct Assemblage {
    Scenario scenario;
    int local_dim = 0;
    std::vector<std::vector<Povm>> povms;  // [party][setting]

    const Eigen::MatrixXcd& element(int party, int setting, int outcome) const {
        return povms[static_cast<std::size_t>(party)][static_cast<std::size_t>(setting)]
            .elements[static_cast<std::size_t>(outcome)];
    }
};

std::vector<ConstraintViolation> validate_assemblage(const Assemblage& A,
                                                     double tol = kPovmTol);

Assemblage random_assemblage(const Scenario& sc, int local_dim, Rng& rng,
                             PovmSampler sampler = PovmSampler::gram);

// out = (I x ... x M_site x ... x I) in for d x d matrix M acting on one
// tensor factor; in and out must not alias.
void apply_site_operator(const Eigen::MatrixXcd& M, int local_dim, int parties,
                         int site, std::span<const cplx> in, std::span<cplx> out);

// d x d matrix G(s,r) = sum over the other factors of psi[..s..] conj(u[..r..]),
// i.e. the site-local block of |psi><u|.
Eigen::MatrixXcd site_outer_contraction(int local_dim, int parties, int site,
                                        std::span<const cplx> psi,
                                        std::span<const cplx> u);

// Born probabilities p(a|x) = <psi| x_k Pi^k_{a_k,x_k} |psi>.  Works one
// setting block at a time, sharing partial contractions across outcomes
// with a common prefix.
Behaviour behaviour_of(const PureState& psi, const Assemblage& A);

// evaluate_functional(T, behaviour_of(psi, A)); |result| is the degree of
// violation.
double evaluate_Q(const PureState& psi, const BellFunctional& T, const Assemblage& A);

// Sparse view of T x A: keeps only nonzero coefficients, grouped by setting
// block with outcome tuples sorted for prefix sharing.  Never materializes
// the d^N x d^N matrix.
class BellOperator {
  public:
    BellOperator(const BellFunctional& T, const Assemblage& A);

    std::size_t dim() const { return dim_; }
    int local_dim() const { return A_.local_dim; }
    int parties() const { return A_.scenario.parties; }
    const Assemblage& assemblage() const { return A_; }

    // out += or = operator applied to in (out overwritten).
    void apply(std::span<const cplx> in, std::span<cplx> out) const;

    // <psi| B |psi> without materializing B|psi> per term.
    double expectation(std::span<const cplx> psi) const;

    // trace(B) / d^N: the average of Q over the uniform state measure.
    double mean() const;

  private:
    struct Term {
        std::vector<int> outcomes;
        double coeff;
    };
    struct Block {
        std::vector<int> settings;
        std::vector<Term> terms;  // sorted by outcome tuple
    };

    template <typename Leaf>
    void walk(std::span<const cplx> in, Leaf&& leaf) const;

    Assemblage A_;
    std::vector<Block> blocks_;
    std::size_t dim_ = 0;
    mutable std::vector<std::vector<cplx>> scratch_;  // one layer per depth
};

// B applied to an arbitrary vector.
std::vector<cplx> bell_operator_apply(const BellFunctional& T, const Assemblage& A,
                                      std::span<const cplx> phi);

// Largest |eigenvalue| via power iteration on B^2 (square dodges the sign
// flip-flop of symmetric spectra).  Fixed internal start seed; max 10^4
// iterations, then ConvergenceError carrying the residual.
double operator_norm(const BellFunctional& T, const Assemblage& A, double tol = 1e-9);
double operator_norm(const BellOperator& B, bool enforce_cap, double tol);

// Two-qubit |phi+> and the standard optimal CHSH measurement angles
// (first party Z/X, second party the diagonal combinations).
PureState bell_phi_plus();
Assemblage chsh_optimal_assemblage();

} // namespace bell::quantum
