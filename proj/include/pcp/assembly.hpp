#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcp/csr.hpp"
#include "pcp/mesh.hpp"

namespace pcp {

/// Linear boundary-value system A u = b over the interior unknowns of a
/// mesh, with Dirichlet data folded into b by substitution. `reference`,
/// when non-empty, is the exact solution sampled at the unknowns in the
/// same ordering. Unknown ordering is row-major over the grid.
struct BvpSystem {
    CsrMatrix matrix;
    std::vector<double> bias;
    UniformMesh mesh;
    std::vector<int> interior_index;     // node id -> unknown index, -1 on boundary
    std::vector<uint8_t> is_boundary;    // node id -> 1 when substituted
    std::vector<double> boundary_values; // node id -> prescribed value (0 elsewhere)
    std::vector<double> reference;       // per unknown; empty when no closed form
    std::string forcing;
    /// Truncation bound: ||A*reference - b||_inf <= consistency_constant * h^2
    /// with h the largest spacing. Zero when no reference exists.
    double consistency_constant = 0.0;
};

enum class PoissonForcing { sin_default, zero };

/// -u'' = -f convention is not used; the operator is u'' itself:
/// A = (1/h^2) tridiag(1,-2,1) on (0, 2*pi/P), so the default forcing
/// f = sin(Px) has exact solution u = -sin(Px)/P^2.
BvpSystem assemble_poisson_1d(double P, int count,
                              PoissonForcing forcing = PoissonForcing::sin_default,
                              double boundary_value = 0.0);

/// Helmholtz on [0,1]^2: Laplacian + identity, zero Dirichlet, manufactured
/// solution sin(A pi x1) sin(A pi x2).
BvpSystem assemble_helmholtz_2d(int A_param, int count);

/// Wave equation u_tt - C^2 u_xx = f on [0,8]x[0,8] as one space-time
/// system. Zero Dirichlet in x; u(x,0) substituted; u_t(x,0)=0 enforced by
/// the second-order mirror relation folded into the first unknown time row.
/// Equations are assigned to rows in marching form (stencil centered at
/// level j-1 owns the row of level j), which makes the matrix a symmetric
/// permutation of a lower-triangular matrix.
BvpSystem assemble_wave_1d(double C, int nx, int nt);

/// One backward-Euler step of u_t = kappa u_xx on (0,1): matrix
/// I - dt*kappa*D. The stored bias is zero; the caller adds the previous
/// step's values at train time.
BvpSystem assemble_heat_step(double kappa, int nx, double dt);

/// Space-time Burgers system u_t + u u_x - nu u_xx = sin(pi x) on
/// [-1,1]x[0,1], u(x,0) = -sin(pi x), zero Dirichlet in x. Backward time
/// difference, central space differences, analytic sparse Jacobian.
struct NonlinearSystem {
    int n = 0;
    UniformMesh mesh;
    double nu = 0.0;
    std::vector<int> interior_index;
    std::vector<uint8_t> is_boundary;
    std::vector<double> boundary_values;
    std::vector<double> initial_guess;  // initial condition extended in time
    std::vector<double> reference;      // empty until a solver fills it

    std::vector<double> residual(const std::vector<double>& u) const;
    CsrMatrix jacobian(const std::vector<double>& u) const;
};

NonlinearSystem assemble_burgers_1d(double nu, int nx, int nt);

/// Reference solution aligned to the unknown ordering; throws when the
/// system carries none.
const std::vector<double>& eval_reference(const BvpSystem& system);

/// Writes <prefix>.mtx, <prefix>_bias.txt and, when present,
/// <prefix>_reference.txt for cross-checking in external tools.
void export_system(const BvpSystem& system, const std::string& prefix);

}  // namespace pcp
