#ifndef FRACORBIT_VERIFICATION_HPP
#define FRACORBIT_VERIFICATION_HPP

#include <span>
#include <string>
#include <vector>

#include "fracorbit/frac_order.hpp"
#include "fracorbit/time_grid.hpp"

namespace fracorbit {

struct CheckResult {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Independent fractional-relaxation stepper: solves
//   d_t^alpha u + lambda u = f,  zero initial state,
// through the equivalent Volterra form u = J^alpha (f - lambda u) by
// product-integration marching. Shares nothing with the closed-kernel
// composition path it cross-checks.
std::vector<double> fractional_relaxation_oracle(const FracOrder& alpha, double lambda,
                                                 std::span<const double> f, const TimeGrid& grid);

// The three built-in suites behind the `verify` command.
VerificationReport verify_rl_ml_identity();    // discrete D^{ceil-a} of the lead kernel
VerificationReport verify_duhamel_equivalence();
VerificationReport verify_ml_estimate();       // (1+x)|E(-x)| bounded, stable under refinement

VerificationReport run_verification_suite();

}  // namespace fracorbit

#endif
