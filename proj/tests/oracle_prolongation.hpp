#pragma once

// Independent numeric oracle for the second-prolongation residual: transports a
// polynomial surrogate solution through the finite point transformation
// exp(eps X) (RK4 on the characteristic ODE), refits the transformed graph, and
// differentiates the equation residual with respect to eps. Shares no code with
// the symbolic prolongation path it cross-checks (own evaluator, own fitter).

#include "rdsym/prolongation.hpp"

#include <map>

namespace rdsym::testing {

/// Free jet data at a base point (m = 1). The t-derivatives are derived
/// on-shell internally.
struct JetPoint {
    double t = 1.0, x = 1.0;
    double u = 1.0, ux = 1.0, uxx = 1.0, uxxx = 0.5;
    double v = 1.0, vx = 1.0, vxx = 1.0, vxxx = 0.5;
};

/// d/deps [ Delta_eq (exp(eps X) . surrogate) ] at eps = 0, central difference.
double oracle_residual(const VectorField& X, const DiffusionSystem& sys, int eq,
                       const JetPoint& z);

/// The symbolic reduced residual of prolong2_apply evaluated at the same jet
/// point (plain recursive evaluation; jets of order 4 are set to zero, matching
/// the surrogate).
double symbolic_residual_at(const VectorField& X, const DiffusionSystem& sys, int eq,
                            const JetPoint& z);

/// Plain recursive evaluator used by the oracle (no probing machinery).
double eval_plain(const SymbolTable& tab, const Expr& e,
                  const std::map<SymbolId, double>& values);

}  // namespace rdsym::testing
