#pragma once

#include "pcp/csr.hpp"

namespace pcp {

/// Incomplete LU factors P = L*U. `lower` holds the strictly lower part of
/// the unit lower factor (diagonal implicit), `upper` stores each row
/// starting at its diagonal entry.
struct IluFactors {
    CsrMatrix lower;
    CsrMatrix upper;
    double drop_tol = 0.0;
};

enum class TriPart { lower, upper };

/// Row-wise IKJ elimination with threshold dropping: while eliminating row i,
/// a computed entry is discarded when its magnitude falls below
/// drop_tol * ||original row i of A||_2; diagonal entries are never dropped.
/// Fill is unrestricted and there is no pivoting, so drop_tol = 0 yields the
/// complete LU factorization. A pivot with |U_ii| < 1e-14 * row scale aborts
/// with an error naming the row.
IluFactors ilu_factorize(const CsrMatrix& a, double drop_tol);

/// Solves L y = rhs, U y = rhs, L^T y = rhs or U^T y = rhs by sparse
/// substitution. Allocates only the result vector.
std::vector<double> triangular_solve(const IluFactors& f, TriPart part, bool transposed,
                                     const std::vector<double>& rhs);

/// Multiplies by one factor (or its transpose); inverse of triangular_solve.
std::vector<double> apply_factor(const IluFactors& f, TriPart part, bool transposed,
                                 const std::vector<double>& x);

/// P x = L (U x).
std::vector<double> apply_preconditioner(const IluFactors& f, const std::vector<double>& x);

/// P^T x = U^T (L^T x).
std::vector<double> apply_preconditioner_transpose(const IluFactors& f, const std::vector<double>& x);

/// P^{-1} r = U^{-1} (L^{-1} r), two triangular solves.
std::vector<double> solve_preconditioner(const IluFactors& f, const std::vector<double>& r);

/// P^{-T} r = L^{-T} (U^{-T} r).
std::vector<double> solve_preconditioner_transpose(const IluFactors& f, const std::vector<double>& r);

}  // namespace pcp
