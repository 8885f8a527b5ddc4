#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <optional>
#include <vector>

#include "core/bounds.hpp"
#include "core/lhv.hpp"
#include "core/nets.hpp"
#include "core/rng.hpp"

using namespace bell;

TEST_CASE("grid resolution and cell keys") {
    CHECK(nets::grid_resolution(0.5) == 2);
    CHECK(nets::grid_resolution(0.3) == 4);   // ceil(10/3)
    CHECK(nets::grid_resolution(0.25) == 4);  // exact ceiling
    CHECK_THROWS_AS(nets::grid_resolution(0.0), InvalidArgument);
    CHECK_THROWS_AS(nets::grid_resolution(1.0), InvalidArgument);

    // l=2: cells of edge 1/2 on [-1,1]; integer boundaries go to the lower cell
    const int l = 2;
    CHECK(nets::cell_key(std::vector<double>{-1.0}, l) == std::vector<int>{0});
    CHECK(nets::cell_key(std::vector<double>{-0.75}, l) == std::vector<int>{0});
    CHECK(nets::cell_key(std::vector<double>{-0.5}, l) == std::vector<int>{0});
    CHECK(nets::cell_key(std::vector<double>{-0.49}, l) == std::vector<int>{1});
    CHECK(nets::cell_key(std::vector<double>{0.0}, l) == std::vector<int>{1});
    CHECK(nets::cell_key(std::vector<double>{1.0}, l) == std::vector<int>{3});
}

TEST_CASE("build_net: singleton, interval, covering") {
    // X = {0}: one occupied cell
    const auto single = nets::build_net(
        [](std::size_t) { return std::optional<std::vector<double>>({{0.0}}); }, 1,
        0.25, 100);
    CHECK(single.points.size() == 1);
    CHECK(nets::covering_distance(single, std::vector<double>{0.0}) == 0.0);

    // X = [-1,1], eps = 0.5: at most 4 occupied cells, under the (2/e+2)^n cap
    Rng rng(4);
    const auto interval = nets::build_net(
        [&](std::size_t) {
            return std::optional<std::vector<double>>({{rng.uniform(-1.0, 1.0)}});
        },
        1, 0.5, 4000);
    CHECK(interval.points.size() <= 4);
    CHECK(static_cast<double>(interval.points.size()) <=
          std::exp(nets::net_size_bound(1, 0.5)) + 1e-9);  // 6

    // every sampled point is covered within eps; replay the stream
    Rng replay(4);
    for (int i = 0; i < 4000; ++i) {
        const double x = replay.uniform(-1.0, 1.0);
        CHECK(nets::covering_distance(interval, std::vector<double>{x}) <= 0.5);
    }

    // an empty sampler cannot produce a net
    CHECK_THROWS_AS(
        nets::build_net([](std::size_t) { return std::optional<std::vector<double>>{}; },
                        1, 0.5, 10),
        DomainError);
    CHECK_THROWS_AS(nets::full_grid_net(13, 0.5), TooLargeError);  // dim cap
}

TEST_CASE("full grid net covers the square within eps/2") {
    const auto net = nets::full_grid_net(2, 0.5);
    CHECK(net.points.size() == 16);  // (2l)^2, l=2
    Rng rng(8);
    std::vector<double> probe(2);
    for (int i = 0; i < 2000; ++i) {
        for (auto& c : probe) c = rng.uniform(-1.0, 1.0);
        CHECK(nets::covering_distance(net, probe) <= 0.25 + 1e-12);
    }
}

TEST_CASE("net_size_bound pinned values") {
    CHECK(nets::net_size_bound(2, 0.5) == doctest::Approx(std::log(36.0)).epsilon(1e-15));
    CHECK(nets::net_size_bound(0, 0.5) == 0.0);
    CHECK(nets::net_size_bound(48, 0.1) ==
          doctest::Approx(48.0 * std::log(22.0)).epsilon(1e-15));
}

TEST_CASE("povm parameter encoding") {
    // identity (d=2) -> diagonal then upper re/im
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(2, 2);
    CHECK(nets::povm_to_params(eye) == std::vector<double>{1.0, 1.0, 0.0, 0.0});
    CHECK(nets::povm_to_params(Eigen::MatrixXcd::Zero(2, 2)) ==
          std::vector<double>{0.0, 0.0, 0.0, 0.0});

    Eigen::MatrixXcd skew = Eigen::MatrixXcd::Zero(2, 2);
    skew(0, 1) = quantum::cplx(0.0, 1.0);  // not Hermitian
    CHECK_THROWS_AS(nets::povm_to_params(skew), InvalidArgument);

    // round trip on random valid elements
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 2 + static_cast<int>(rep % 3);
        const auto povm = quantum::random_povm(d, 2, rng);
        for (const auto& element : povm.elements) {
            const auto params = nets::povm_to_params(element);
            CHECK(params.size() == static_cast<std::size_t>(d) * d);
            for (double p : params) CHECK(std::abs(p) <= 1.0 + 1e-12);
            const auto rebuilt = nets::params_to_hermitian(params, d);
            CHECK(rebuilt.report.empty());
            CHECK((rebuilt.matrix - element).cwiseAbs().maxCoeff() <= 1e-14);
        }
    }

    // cube vectors outside the valid set are rebuilt but reported
    const auto bad =
        nets::params_to_hermitian(std::vector<double>{1.0, 1.0, 1.0, 1.0}, 2);
    CHECK_FALSE(bad.report.empty());
}

TEST_CASE("operator-norm bridge against the parameter distance") {
    // ||P - Q|| <= 2 d^2 max-entry distance, on 1000 random pairs
    Rng rng(21);
    for (int rep = 0; rep < 1000; ++rep) {
        const int d = 2 + static_cast<int>(rep % 2);
        const auto a = quantum::random_povm(d, 2, rng).elements[0];
        const auto b = quantum::random_povm(d, 2, rng).elements[0];
        const Eigen::MatrixXcd diff = a - b;
        const double opnorm = diff.operatorNorm();
        const double entry_max = diff.cwiseAbs().maxCoeff();
        CHECK(opnorm <= 2.0 * d * d * entry_max + 1e-12);
    }
}

TEST_CASE("parameter vectors and distances") {
    const Scenario sc(2, 2, 2);
    Rng rng(33);

    BellFunctional T(sc, std::vector<double>(sc.behaviour_size(), 0.0), 2.0);
    const auto tp = nets::functional_params(T);
    CHECK(tp.tag == nets::ParamTag::functional);
    CHECK(tp.coords.size() == sc.behaviour_size());

    const auto A = quantum::random_assemblage(sc, 2, rng);
    const auto ap = nets::assemblage_params(A);
    CHECK(ap.tag == nets::ParamTag::assemblage);
    // d^2 m v N coordinates
    CHECK(ap.coords.size() == 4u * 2 * 2 * 2);
    for (double c : ap.coords) CHECK(std::abs(c) <= 1.0 + 1e-12);

    // dist(x, x) = 0
    CHECK(nets::dist_assemblages(A, A) == 0.0);
    CHECK(nets::dist_functionals(T, T, 2.0) == 0.0);
    CHECK(nets::dist_joint(T, A, T, A, 2.0) == 0.0);

    // one coefficient changed by b gives functional distance 1
    BellFunctional U = T;
    U.coeffs[5] += 2.0;
    CHECK(nets::dist_functionals(T, U, 2.0) == doctest::Approx(1.0).epsilon(1e-15));

    const auto B = quantum::random_assemblage(sc, 2, rng);
    CHECK(nets::dist_joint(T, A, U, B, 2.0) ==
          doctest::Approx(std::max(nets::dist_functionals(T, U, 2.0),
                                   nets::dist_assemblages(A, B)))
              .epsilon(1e-15));

    quantum::Assemblage wrong = B;
    wrong.povms.pop_back();
    CHECK_THROWS_AS(nets::dist_assemblages(A, wrong), InvalidArgument);
}

TEST_CASE("dist_joint triangle inequality on 1000 random triples") {
    const Scenario sc(2, 2, 2);
    Rng rng(44);
    auto rand_T = [&] {
        std::vector<double> c(sc.behaviour_size());
        for (auto& e : c) e = rng.uniform(-1.5, 1.5);
        return BellFunctional(sc, std::move(c), 1.5);
    };
    for (int rep = 0; rep < 1000; ++rep) {
        const auto T1 = rand_T(), T2 = rand_T(), T3 = rand_T();
        const auto A1 = quantum::random_assemblage(sc, 2, rng);
        const auto A2 = quantum::random_assemblage(sc, 2, rng);
        const auto A3 = quantum::random_assemblage(sc, 2, rng);
        const double d12 = nets::dist_joint(T1, A1, T2, A2, 1.5);
        const double d23 = nets::dist_joint(T2, A2, T3, A3, 1.5);
        const double d13 = nets::dist_joint(T1, A1, T3, A3, 1.5);
        CHECK(d13 <= d12 + d23 + 1e-12);
    }
}

TEST_CASE("assemblage and functional Lipschitz bounds on random perturbations") {
    const Scenario sc(2, 2, 2);
    Rng rng(55);
    const auto mvN = std::pow(4.0, 2);  // (mv)^N
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> c(sc.behaviour_size());
        for (auto& e : c) e = rng.uniform(-1.0, 1.0);
        BellFunctional T = lhv::normalize(BellFunctional(sc, std::move(c)));
        // normalization can push entries past 1; the bounds want the true cap
        double b = 0.0;
        for (double e : T.coeffs) b = std::max(b, std::abs(e));

        const auto A = quantum::random_assemblage(sc, 2, rng);
        const auto A2 = quantum::random_assemblage(sc, 2, rng);
        const auto psi = quantum::sample_haar_state(2, 2, rng);

        // measurement perturbation at fixed functional
        const double gapA = std::abs(quantum::evaluate_Q(psi, T, A) -
                                     quantum::evaluate_Q(psi, T, A2));
        double sup_norm = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int x = 0; x < 2; ++x)
                for (int a = 0; a < 2; ++a)
                    sup_norm = std::max(
                        sup_norm,
                        (A.element(k, x, a) - A2.element(k, x, a)).operatorNorm());
        CHECK(gapA <= b * 2 * mvN * sup_norm + 1e-9);
        CHECK(gapA <=
              2 * b * 2 * mvN * 4 * nets::dist_assemblages(A, A2) + 1e-9);

        // functional perturbation at fixed measurements
        std::vector<double> c2(sc.behaviour_size());
        for (auto& e : c2) e = rng.uniform(-1.0, 1.0);
        const BellFunctional U(sc, std::move(c2));
        double bU = b;
        for (double e : U.coeffs) bU = std::max(bU, std::abs(e));
        const double gapT = std::abs(quantum::evaluate_Q(psi, T, A) -
                                     quantum::evaluate_Q(psi, U, A));
        CHECK(gapT <= bU * mvN * nets::dist_functionals(T, U, bU) + 1e-9);
    }
}
