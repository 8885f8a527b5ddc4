#pragma once
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "core/quantum.hpp"
#include "core/scenario.hpp"

namespace bell::nets {

// Covering nets live on [-1,1]^n split into (2l)^n cells of edge 1/l.
struct HypercubeNet {
    int ambient_dim = 0;
    double epsilon = 0.0;
    int grid_resolution = 0;  // l = ceil(1/epsilon)
    std::vector<std::vector<double>> points;
    std::map<std::vector<int>, std::size_t> cells;  // cell key -> index in points
};

int grid_resolution(double epsilon);

// floor(l*(x+1)) per coordinate; exact-integer ties go to the lower cell,
// keys clamp to [0, 2l-1].
std::vector<int> cell_key(std::span<const double> x, int l);

// Demonstrative scale only: the cell count is (2l)^n.
constexpr int kMaxNetDim = 12;

// Draws up to `budget` samples; keeps one representative per occupied cell.
// The sampler may decline a draw by returning nullopt.  Every kept sample
// then has a net point within epsilon in the max norm.
HypercubeNet build_net(
    const std::function<std::optional<std::vector<double>>(std::size_t)>& sampler,
    int ambient_dim, double epsilon, std::size_t budget);

// Net holding every cell center: covers the whole cube within epsilon/2.
HypercubeNet full_grid_net(int ambient_dim, double epsilon);

// Max-norm distance from probe to the nearest net point.
double covering_distance(const HypercubeNet& net, std::span<const double> probe);

// n * log(2/epsilon + 2): cardinality cap in log domain.
double net_size_bound(int ambient_dim, double epsilon);

// Hermitian d x d -> d^2 reals: diagonal first, then re/im of the strict
// upper triangle row by row.  Valid measurement elements land in [-1,1]^(d^2).
std::vector<double> povm_to_params(const Eigen::MatrixXcd& element,
                                   double tol = quantum::kPovmTol);

struct HermitianRebuild {
    Eigen::MatrixXcd matrix;
    std::vector<ConstraintViolation> report;  // element constraints; may be violated
};

// Inverse of povm_to_params; the cube is a superset of the valid elements,
// so the report may be non-empty.
HermitianRebuild params_to_hermitian(std::span<const double> params, int dim,
                                     double tol = quantum::kPovmTol);

enum class ParamTag { assemblage, functional, joint };

struct ParamVector {
    ParamTag tag = ParamTag::joint;
    std::vector<double> coords;
};

// Coefficients divided by the cap b.
ParamVector functional_params(const BellFunctional& T);
// Concatenated element parameters over (party, setting, outcome).
ParamVector assemblage_params(const quantum::Assemblage& A);

// Max over measurement elements of the max-norm parameter distance.
double dist_assemblages(const quantum::Assemblage& A, const quantum::Assemblage& B);
// Max-norm coefficient distance divided by b.
double dist_functionals(const BellFunctional& T, const BellFunctional& U, double b);
// Max of the two component distances.
double dist_joint(const BellFunctional& T, const quantum::Assemblage& A,
                  const BellFunctional& U, const quantum::Assemblage& B, double b);

} // namespace bell::nets
