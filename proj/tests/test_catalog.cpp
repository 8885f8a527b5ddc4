#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "core/catalog.hpp"
#include "core/lhv.hpp"

using namespace bell;

TEST_CASE("catalog names and lookup") {
    const std::vector<std::string> expected{"chsh", "pent1", "pent2", "pent3",
                                            "i3322"};
    CHECK(catalog::names() == expected);
    CHECK_THROWS_AS(catalog::get("nope"), InvalidArgument);
}

TEST_CASE("documented bounds and scenarios") {
    const auto chsh = catalog::get("chsh");
    CHECK(chsh.scenario == Scenario(2, 2, 2));
    REQUIRE(chsh.documented_lower.has_value());
    CHECK(*chsh.documented_lower == -2.0);
    CHECK(chsh.documented_upper == 2.0);

    CHECK(catalog::get("pent1").scenario == Scenario(2, 2, 2));
    CHECK(catalog::get("pent2").scenario == Scenario(2, 2, 2));
    CHECK(catalog::get("pent3").scenario == Scenario(2, 3, 2));
    CHECK(catalog::get("i3322").scenario == Scenario(2, 3, 2));

    for (const char* pent : {"pent1", "pent2", "pent3"})
        CHECK(catalog::get(pent).documented_upper == 2.0);
    CHECK(catalog::get("i3322").documented_upper == 6.0);
}

TEST_CASE("enumerated bounds match documentation exactly") {
    for (const auto& name : catalog::names()) {
        const auto entry = catalog::get(name);
        const auto [lo, hi] = lhv::classical_bounds(entry.raw);
        CHECK(hi == entry.documented_upper);
        if (entry.documented_lower) CHECK(lo == *entry.documented_lower);
    }
}

TEST_CASE("extra settings in the padded scenario are never referenced") {
    // the third setting enters only through the first party's P(11|20) term
    const auto pent3 = catalog::get("pent3");
    const Scenario& sc = pent3.scenario;
    std::vector<int> a(2), x(2);
    bool party0_uses_2 = false;
    for (std::size_t e = 0; e < sc.behaviour_size(); ++e) {
        if (pent3.raw.coeffs[e] == 0.0) continue;
        unflatten(sc, e, a, x);
        CHECK(x[1] != 2);
        if (x[0] == 2) {
            party0_uses_2 = true;
            CHECK(a == std::vector<int>{1, 1});
            CHECK(x == std::vector<int>{2, 0});
        }
    }
    CHECK(party0_uses_2);
}

TEST_CASE("verify_catalog passes and checks the positivized form") {
    const auto report = catalog::verify_catalog();
    CHECK(report.ok);
    REQUIRE(report.checks.size() == catalog::names().size());
    for (const auto& check : report.checks) {
        CHECK(check.ok);
        CHECK(check.message.empty());
        CHECK(check.upper == check.expected_upper);
        CHECK(check.positivized_upper == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("verify_entry flags a corrupted coefficient") {
    auto bad = catalog::get("i3322");
    bad.raw.coeffs[3] += 0.5;
    const auto check = catalog::verify_entry(bad);
    CHECK_FALSE(check.ok);
    CHECK(check.name == "i3322");
    CHECK_FALSE(check.message.empty());
}

TEST_CASE("positivized normalized forms stay inside the unit family") {
    for (const auto& name : catalog::names()) {
        auto entry = catalog::get(name);
        lhv::ensure_bounds(entry.raw);
        const auto pos = lhv::positivize(lhv::normalize(entry.raw));
        for (double c : pos.coeffs) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
        const auto [lo, hi] = lhv::classical_bounds(pos);
        CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("embedded chsh keeps its classical bounds at higher party counts") {
    const auto base = catalog::get("chsh").raw;
    CHECK(catalog::embedded_chsh(2).coeffs == base.coeffs);

    for (int parties : {3, 4}) {
        BellFunctional T = catalog::embedded_chsh(parties);
        CHECK(T.scenario == Scenario(parties, 2, 2));
        // cached bounds must agree with fresh enumeration
        REQUIRE(T.classical_lower.has_value());
        REQUIRE(T.classical_upper.has_value());
        const auto [lo, hi] = lhv::classical_bounds(T);
        CHECK(lo == *T.classical_lower);
        CHECK(hi == *T.classical_upper);
        CHECK(lo == -2.0);
        CHECK(hi == 2.0);
    }
}
