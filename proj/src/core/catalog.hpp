#pragma once
#include <optional>
#include <string>
#include <vector>

#include "core/lhv.hpp"

namespace bell::catalog {

struct CatalogEntry {
    std::string name;
    Scenario scenario;
    BellFunctional raw;  // verbatim coefficients, marginal terms expanded
    std::optional<double> documented_lower;  // only chsh documents a lower bound
    double documented_upper = 0.0;
    std::string note;
};

const std::vector<std::string>& names();

// name in {chsh, pent1, pent2, pent3, i3322}; throws InvalidArgument otherwise.
CatalogEntry get(const std::string& name);

struct EntryCheck {
    std::string name;
    bool ok = false;
    double lower = 0.0;   // enumerated
    double upper = 0.0;   // enumerated
    double expected_upper = 0.0;
    double positivized_upper = 0.0;  // bound of positivize(normalize(raw)); expect 1
    std::string message;  // empty when ok
};

struct Report {
    bool ok = false;
    std::vector<EntryCheck> checks;
};

// Recomputes classical bounds by vertex enumeration and compares with the
// documented values; integer coefficient sums are exact in double, so the
// comparison is exact.  Also checks the positivized form has bound 1.
EntryCheck verify_entry(const CatalogEntry& entry);
Report verify_catalog();

// CHSH carried by parties 0 and 1 of an (N,2,2) scenario; every additional
// party gates the terms on setting 0 and outcome 0.  Coincides with `chsh`
// at N=2.  Classical bounds stay (-2, 2): the gate can zero terms but never
// grow them.
BellFunctional embedded_chsh(int parties);

} // namespace bell::catalog
