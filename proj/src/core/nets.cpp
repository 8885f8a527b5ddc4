#include "core/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bell::nets {

int grid_resolution(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidArgument("epsilon must lie in (0,1)");
    return static_cast<int>(std::ceil(1.0 / epsilon));
}

std::vector<int> cell_key(std::span<const double> x, int l) {
    std::vector<int> key(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < -1.0 || x[i] > 1.0)
            throw InvalidArgument("coordinate outside [-1,1]");
        const double y = static_cast<double>(l) * (x[i] + 1.0);
        double f = std::floor(y);
        if (f == y && f > 0.0) f -= 1.0;  // boundary ties to the lower cell
        key[i] = std::clamp(static_cast<int>(f), 0, 2 * l - 1);
    }
    return key;
}

HypercubeNet build_net(
    const std::function<std::optional<std::vector<double>>(std::size_t)>& sampler,
    int ambient_dim, double epsilon, std::size_t budget) {
    if (ambient_dim < 1 || ambient_dim > kMaxNetDim)
        throw TooLargeError("net dimension must be in [1," +
                            std::to_string(kMaxNetDim) + "]");
    HypercubeNet net;
    net.ambient_dim = ambient_dim;
    net.epsilon = epsilon;
    net.grid_resolution = grid_resolution(epsilon);
    for (std::size_t i = 0; i < budget; ++i) {
        auto sample = sampler(i);
        if (!sample) continue;
        if (sample->size() != static_cast<std::size_t>(ambient_dim))
            throw InvalidArgument("sample dimension mismatch");
        std::vector<int> key = cell_key(*sample, net.grid_resolution);
        if (net.cells.emplace(std::move(key), net.points.size()).second)
            net.points.push_back(std::move(*sample));
    }
    if (net.points.empty())
        throw DomainError("sampler produced no points within the budget");
    return net;
}

HypercubeNet full_grid_net(int ambient_dim, double epsilon) {
    const int l = grid_resolution(epsilon);
    const int cells = 2 * l;
    std::vector<int> digits(static_cast<std::size_t>(ambient_dim), 0);
    bool done = false;
    auto sampler = [&](std::size_t) -> std::optional<std::vector<double>> {
        if (done) return std::nullopt;
        std::vector<double> center(static_cast<std::size_t>(ambient_dim));
        for (std::size_t i = 0; i < center.size(); ++i)
            center[i] = -1.0 + (digits[i] + 0.5) / static_cast<double>(l);
        for (std::size_t i = center.size(); i-- > 0;) {
            if (++digits[i] < cells) break;
            digits[i] = 0;
            if (i == 0) done = true;
        }
        return center;
    };
    double total = std::pow(static_cast<double>(cells), ambient_dim);
    if (total > 2e7) throw TooLargeError("full grid net would be too large");
    return build_net(sampler, ambient_dim, epsilon,
                     static_cast<std::size_t>(total));
}

double covering_distance(const HypercubeNet& net, std::span<const double> probe) {
    if (probe.size() != static_cast<std::size_t>(net.ambient_dim))
        throw InvalidArgument("probe dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : net.points) {
        double d = 0.0;
        for (std::size_t i = 0; i < probe.size(); ++i)
            d = std::max(d, std::abs(p[i] - probe[i]));
        best = std::min(best, d);
    }
    return best;
}

double net_size_bound(int ambient_dim, double epsilon) {
    if (ambient_dim < 0) throw InvalidArgument("dimension must be nonnegative");
    if (ambient_dim == 0) return 0.0;
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidArgument("epsilon must lie in (0,1)");
    return static_cast<double>(ambient_dim) * std::log(2.0 / epsilon + 2.0);
}

std::vector<double> povm_to_params(const Eigen::MatrixXcd& element, double tol) {
    const int d = static_cast<int>(element.rows());
    if (element.cols() != d) throw InvalidArgument("element must be square");
    const double herm = (element - element.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol)
        throw InvalidArgument("element is not Hermitian (defect " +
                              std::to_string(herm) + ")");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) out.push_back(element(i, i).real());
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            out.push_back(element(i, j).real());
            out.push_back(element(i, j).imag());
        }
    return out;
}

HermitianRebuild params_to_hermitian(std::span<const double> params, int dim,
                                     double tol) {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    const std::size_t need =
        static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (params.size() != need)
        throw InvalidArgument("expected " + std::to_string(need) + " parameters, got " +
                              std::to_string(params.size()));
    HermitianRebuild out;
    out.matrix = Eigen::MatrixXcd::Zero(dim, dim);
    std::size_t at = 0;
    for (int i = 0; i < dim; ++i) out.matrix(i, i) = params[at++];
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const double re = params[at++];
            const double im = params[at++];
            out.matrix(i, j) = quantum::cplx(re, im);
            out.matrix(j, i) = quantum::cplx(re, -im);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.matrix,
                                                       Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -tol) out.report.push_back({"negative eigenvalue", -lo});
    if (hi > 1.0 + tol) out.report.push_back({"operator norm above 1", hi - 1.0});
    return out;
}

ParamVector functional_params(const BellFunctional& T) {
    if (!(T.coeff_cap > 0.0)) throw InvalidArgument("coefficient cap must be positive");
    ParamVector pv;
    pv.tag = ParamTag::functional;
    pv.coords.reserve(T.coeffs.size());
    for (double t : T.coeffs) pv.coords.push_back(t / T.coeff_cap);
    return pv;
}

ParamVector assemblage_params(const quantum::Assemblage& A) {
    ParamVector pv;
    pv.tag = ParamTag::assemblage;
    for (const auto& row : A.povms)
        for (const auto& povm : row)
            for (const auto& element : povm.elements) {
                auto p = povm_to_params(element);
                pv.coords.insert(pv.coords.end(), p.begin(), p.end());
            }
    return pv;
}

double dist_assemblages(const quantum::Assemblage& A, const quantum::Assemblage& B) {
    if (A.scenario != B.scenario || A.local_dim != B.local_dim ||
        A.povms.size() != B.povms.size())
        throw InvalidArgument("assemblage shapes differ");
    ParamVector pa = assemblage_params(A);
    ParamVector pb = assemblage_params(B);
    double d = 0.0;
    for (std::size_t i = 0; i < pa.coords.size(); ++i)
        d = std::max(d, std::abs(pa.coords[i] - pb.coords[i]));
    return d;
}

double dist_functionals(const BellFunctional& T, const BellFunctional& U, double b) {
    if (T.scenario != U.scenario) throw InvalidArgument("functional scenarios differ");
    if (!(b > 0.0)) throw InvalidArgument("cap must be positive");
    double d = 0.0;
    for (std::size_t i = 0; i < T.coeffs.size(); ++i)
        d = std::max(d, std::abs(T.coeffs[i] - U.coeffs[i]));
    return d / b;
}

double dist_joint(const BellFunctional& T, const quantum::Assemblage& A,
                  const BellFunctional& U, const quantum::Assemblage& B, double b) {
    return std::max(dist_functionals(T, U, b), dist_assemblages(A, B));
}

} // namespace bell::nets
