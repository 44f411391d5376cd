#pragma once

#include "pcp/assembly.hpp"
#include "pcp/csr.hpp"
#include "pcp/ilu.hpp"

namespace pcp {

enum class NormMethod {
    dense_svd,     // materialize A^-1, largest singular value densely
    power_solves,  // power iteration on A^-T A^-1 using complete-LU solves
};

const char* norm_method_name(NormMethod m);

/// Relative condition number split into its measured factors:
/// cond = bias_norm / solution_norm * inverse_norm.
struct ConditionEstimate {
    double inverse_norm = 0.0;   // |A^-1|, or |A^-1 P| for the preconditioned form
    double bias_norm = 0.0;      // |b|, or |P^-1 b|
    double solution_norm = 0.0;  // |u|
    double cond = 0.0;
    NormMethod method = NormMethod::power_solves;
    int iterations = 0;  // power iterations spent (0 on the dense path)
    double tolerance = 0.0;  // relative Rayleigh change at exit
};

/// Largest singular value of A^-1. The dense path requires
/// n <= kDenseSizeCap; the power path stops when the Rayleigh quotient
/// changes by less than 1e-8 relative, capped at 5000 iterations
/// (non-convergence throws with the last estimate in the message).
/// Deterministic all-ones start either way.
double inverse_norm_estimate(const CsrMatrix& a, NormMethod method);

/// Condition number of the assembled system. solution_norm comes from the
/// analytic reference when the system carries one; computed solves of
/// severely ill-conditioned systems amplify rounding noise, so the
/// reference is the accurate source for the scale of the true solution.
/// Systems without a reference are solved densely (n <= kDenseSizeCap).
ConditionEstimate condition_number(const BvpSystem& system,
                                   NormMethod method = NormMethod::power_solves);

/// Condition number after preconditioning by the given factors:
/// |P^-1 b| / |u| * |A^-1 P|, powers iterated through complete-LU solves
/// of A. Here solution_norm uses the complete-LU solve of A u = b, never
/// the reference, so that complete factors (drop_tol 0) report exactly 1:
/// P^-1 b and u then go through the identical triangular solves.
ConditionEstimate preconditioned_condition_number(const BvpSystem& system,
                                                  const IluFactors& f);

/// Analytic |A^-1| for the 1D Poisson model on (0, 2pi/P): 4/P^2.
double poisson1d_theory_norm(double p);

}  // namespace pcp
