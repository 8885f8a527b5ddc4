#pragma once
#include <vector>

namespace bell::lp {

struct Result {
    bool optimal = false;
    double objective = 0.0;
    std::vector<double> x;
};

// Dense two-phase primal simplex for
//   maximize c.x  subject to  A x <= b,  x >= 0.
// Bland's rule throughout, so the returned vertex is a deterministic
// function of the input ordering.  Sized for a few hundred rows/columns.
Result solve_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                 const std::vector<double>& c);

} // namespace bell::lp
