#pragma once

#include <string>
#include <vector>

#include "mgrid/model.hpp"

namespace mgrid {

struct ConstraintViolation {
    std::string name;
    double amount = 0.0;  // positive magnitude of the violation
};

/// Independent re-check of every dispatch constraint for one decision
/// against its state: balances, bounds, ramps, storage gating, projected
/// SOC window and curtailment limits. The CCGT heat entering the balance is
/// recomputed by stepping the companion form sample by sample, so the audit
/// shares nothing with the LP construction path.
std::vector<ConstraintViolation> audit_decision(const SystemState& state,
                                                const Decision& decision,
                                                const MicrogridParams& params,
                                                const ArmaParams& arma, double tol = 1e-7);

}  // namespace mgrid
