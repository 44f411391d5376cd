#include "pcp/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "pcp/matrix_market.hpp"

namespace pcp {
namespace {

constexpr double kPi = std::numbers::pi;

void init_node_maps(BvpSystem& s, int n_nodes) {
    s.interior_index.assign(n_nodes, -1);
    s.is_boundary.assign(n_nodes, 0);
    s.boundary_values.assign(n_nodes, 0.0);
}

}  // namespace

BvpSystem assemble_poisson_1d(double P, int count, PoissonForcing forcing,
                              double boundary_value) {
    if (!(P > 0.0)) {
        throw std::invalid_argument("assemble_poisson_1d: P must be positive");
    }
    BvpSystem s;
    s.mesh = build_mesh_1d(0.0, 2.0 * kPi / P, count);
    const double h = s.mesh.h[0];
    const double ih2 = 1.0 / (h * h);
    const int n = count - 2;

    init_node_maps(s, count);
    s.is_boundary[0] = s.is_boundary[count - 1] = 1;
    s.boundary_values[0] = s.boundary_values[count - 1] = boundary_value;
    for (int i = 1; i <= n; ++i) s.interior_index[i] = i - 1;

    auto f = [&](double x) {
        return forcing == PoissonForcing::sin_default ? std::sin(P * x) : 0.0;
    };

    std::vector<Triplet> trips;
    s.bias.assign(n, 0.0);
    for (int i = 1; i <= n; ++i) {
        const int row = i - 1;
        const double x = s.mesh.coord(0, i);
        trips.push_back({row, row, -2.0 * ih2});
        double b = f(x);
        if (i == 1) {
            b -= ih2 * boundary_value;
        } else {
            trips.push_back({row, row - 1, ih2});
        }
        if (i == n) {
            b -= ih2 * boundary_value;
        } else {
            trips.push_back({row, row + 1, ih2});
        }
        s.bias[row] = b;
    }
    s.matrix = csr_from_triplets(n, n, trips);

    s.reference.resize(n);
    for (int i = 1; i <= n; ++i) {
        const double x = s.mesh.coord(0, i);
        const double part =
            forcing == PoissonForcing::sin_default ? -std::sin(P * x) / (P * P)
                                                   : 0.0;
        s.reference[i - 1] = part + boundary_value;
    }
    s.forcing = forcing == PoissonForcing::sin_default ? "sin(P x)" : "0";
    // |u''''| <= P^2 for the sin solution; h^2/12 truncation with 2x slack.
    s.consistency_constant =
        forcing == PoissonForcing::sin_default ? P * P / 6.0 : 1e-12;
    return s;
}

BvpSystem assemble_helmholtz_2d(int A_param, int count) {
    if (A_param < 1) {
        throw std::invalid_argument("assemble_helmholtz_2d: A_param must be >= 1");
    }
    if (count < 10 * A_param) {
        std::fprintf(stderr,
                     "assemble_helmholtz_2d: count %d under-resolves A=%d "
                     "(recommend count >= %d)\n",
                     count, A_param, 10 * A_param);
    }
    BvpSystem s;
    s.mesh = build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, {count, count});
    const double h = s.mesh.h[0];
    const double ih2 = 1.0 / (h * h);
    const int ni = count - 2;
    const int n = ni * ni;
    const double w = A_param * kPi;

    init_node_maps(s, s.mesh.n_nodes());
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            const int node = s.mesh.node_id(i, j);
            if (i == 0 || j == 0 || i == count - 1 || j == count - 1) {
                s.is_boundary[node] = 1;
            } else {
                s.interior_index[node] = (i - 1) * ni + (j - 1);
            }
        }
    }

    std::vector<Triplet> trips;
    s.bias.assign(n, 0.0);
    s.reference.resize(n);
    for (int i = 1; i <= ni; ++i) {
        for (int j = 1; j <= ni; ++j) {
            const int row = (i - 1) * ni + (j - 1);
            const double x = s.mesh.coord(0, i);
            const double y = s.mesh.coord(1, j);
            trips.push_back({row, row, -4.0 * ih2 + 1.0});
            if (i > 1) trips.push_back({row, row - ni, ih2});
            if (i < ni) trips.push_back({row, row + ni, ih2});
            if (j > 1) trips.push_back({row, row - 1, ih2});
            if (j < ni) trips.push_back({row, row + 1, ih2});
            s.bias[row] =
                (1.0 - 2.0 * kPi * kPi * A_param * A_param) * std::sin(w * x) *
                std::sin(w * y);
            s.reference[row] = std::sin(w * x) * std::sin(w * y);
        }
    }
    s.matrix = csr_from_triplets(n, n, trips);
    s.forcing = "(1 - 2 pi^2 A^2) sin(A pi x1) sin(A pi x2)";
    const double w4 = w * w * w * w;
    s.consistency_constant = w4 / 3.0;
    return s;
}

BvpSystem assemble_wave_1d(double C, int nx, int nt) {
    if (!(C > 0.0)) {
        throw std::invalid_argument("assemble_wave_1d: C must be positive");
    }
    BvpSystem s;
    s.mesh = build_mesh(2, {0.0, 0.0}, {8.0, 8.0}, {nx, nt});
    const double dx = s.mesh.h[0];
    const double dt = s.mesh.h[1];
    const double idt2 = 1.0 / (dt * dt);
    const double c2x = C * C / (dx * dx);
    const int nxi = nx - 2;   // interior x nodes
    const int ntu = nt - 1;   // unknown time levels (t=0 substituted)
    const int n = nxi * ntu;

    auto u0 = [&](double x) {
        return std::sin(kPi * x / 8.0) + 0.5 * std::sin(kPi * x / 2.0);
    };
    auto force = [&](double x, double t) {
        return (kPi / 8.0) * (kPi / 8.0) * (C * C - 1.0) *
               std::sin(kPi * x / 8.0) * std::cos(kPi * t / 8.0);
    };
    auto exact = [&](double x, double t) {
        return std::sin(kPi * x / 8.0) * std::cos(kPi * t / 8.0) +
               0.5 * std::sin(kPi * x / 2.0) * std::cos(C * kPi * t / 2.0);
    };
    auto idx = [&](int i, int j) { return (i - 1) * ntu + (j - 1); };

    init_node_maps(s, s.mesh.n_nodes());
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nt; ++j) {
            const int node = s.mesh.node_id(i, j);
            if (i == 0 || i == nx - 1) {
                s.is_boundary[node] = 1;  // zero Dirichlet in x
            } else if (j == 0) {
                s.is_boundary[node] = 1;
                s.boundary_values[node] = u0(s.mesh.coord(0, i));
            } else {
                s.interior_index[node] = idx(i, j);
            }
        }
    }

    // Marching row assignment: the stencil centered at time level j-1 owns
    // the row of the level-j unknown, so every row's newest unknown sits on
    // the diagonal and the matrix is a permuted lower-triangular one.
    std::vector<Triplet> trips;
    s.bias.assign(n, 0.0);
    s.reference.resize(n);
    for (int i = 1; i <= nxi; ++i) {
        const double x = s.mesh.coord(0, i);
        const double gm = u0(s.mesh.coord(0, i - 1));
        const double gc = u0(x);
        const double gp = u0(s.mesh.coord(0, i + 1));
        for (int j = 1; j < nt; ++j) {
            const int row = idx(i, j);
            s.reference[row] = exact(x, s.mesh.coord(1, j));
            if (j == 1) {
                // PDE at t=0 with the mirror relation u(x,t_-1) = u(x,t_1):
                // (2u_1 - 2g)/dt^2 - C^2 g_xx = f(x,0).
                trips.push_back({row, row, 2.0 * idt2});
                s.bias[row] = force(x, 0.0) + 2.0 * idt2 * gc +
                              c2x * (gm - 2.0 * gc + gp);
                continue;
            }
            const double t_mid = s.mesh.coord(1, j - 1);
            trips.push_back({row, row, idt2});
            trips.push_back({row, idx(i, j - 1), -2.0 * idt2 + 2.0 * c2x});
            double b = force(x, t_mid);
            if (j == 2) {
                b -= idt2 * gc;
            } else {
                trips.push_back({row, idx(i, j - 2), idt2});
            }
            if (i > 1) trips.push_back({row, idx(i - 1, j - 1), -c2x});
            if (i < nxi) trips.push_back({row, idx(i + 1, j - 1), -c2x});
            s.bias[row] = b;
        }
    }
    s.matrix = csr_from_triplets(n, n, trips);
    s.forcing = "(pi/8)^2 (C^2 - 1) sin(pi x/8) cos(pi t/8)";

    const double bt = std::pow(kPi / 8.0, 4) + 0.5 * std::pow(C * kPi / 2.0, 4);
    const double bx = std::pow(kPi / 8.0, 4) + 0.5 * std::pow(kPi / 2.0, 4);
    s.consistency_constant = (bt + C * C * bx) / 6.0;
    return s;
}

BvpSystem assemble_heat_step(double kappa, int nx, double dt) {
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("assemble_heat_step: kappa must be positive");
    }
    if (dt < 0.0) {
        throw std::invalid_argument("assemble_heat_step: dt must be >= 0");
    }
    BvpSystem s;
    s.mesh = build_mesh_1d(0.0, 1.0, nx);
    const double h = s.mesh.h[0];
    const double a = dt * kappa / (h * h);
    const int n = nx - 2;

    init_node_maps(s, nx);
    s.is_boundary[0] = s.is_boundary[nx - 1] = 1;
    for (int i = 1; i <= n; ++i) s.interior_index[i] = i - 1;

    std::vector<Triplet> trips;
    for (int row = 0; row < n; ++row) {
        trips.push_back({row, row, 1.0 + 2.0 * a});
        if (row > 0) trips.push_back({row, row - 1, -a});
        if (row < n - 1) trips.push_back({row, row + 1, -a});
    }
    s.matrix = csr_from_triplets(n, n, trips);
    s.bias.assign(n, 0.0);
    s.forcing = "";
    return s;
}

std::vector<double> NonlinearSystem::residual(const std::vector<double>& u) const {
    if (static_cast<int>(u.size()) != n) {
        throw std::invalid_argument("burgers residual: state size mismatch");
    }
    const int nx = mesh.counts[0];
    const int nt = mesh.counts[1];
    const int ntu = nt - 1;
    const double dx = mesh.h[0];
    const double dt = mesh.h[1];
    auto idx = [&](int i, int j) { return (i - 1) * ntu + (j - 1); };
    auto g = [&](int i) { return -std::sin(kPi * mesh.coord(0, i)); };

    std::vector<double> F(n);
    for (int i = 1; i <= nx - 2; ++i) {
        const double fx = std::sin(kPi * mesh.coord(0, i));
        for (int j = 1; j < nt; ++j) {
            const double uc = u[idx(i, j)];
            const double up = j >= 2 ? u[idx(i, j - 1)] : g(i);
            const double ul = i >= 2 ? u[idx(i - 1, j)] : 0.0;
            const double ur = i <= nx - 3 ? u[idx(i + 1, j)] : 0.0;
            F[idx(i, j)] = (uc - up) / dt + uc * (ur - ul) / (2.0 * dx) -
                           nu * (ur - 2.0 * uc + ul) / (dx * dx) - fx;
        }
    }
    return F;
}

CsrMatrix NonlinearSystem::jacobian(const std::vector<double>& u) const {
    if (static_cast<int>(u.size()) != n) {
        throw std::invalid_argument("burgers jacobian: state size mismatch");
    }
    const int nx = mesh.counts[0];
    const int nt = mesh.counts[1];
    const int ntu = nt - 1;
    const double dx = mesh.h[0];
    const double dt = mesh.h[1];
    auto idx = [&](int i, int j) { return (i - 1) * ntu + (j - 1); };

    std::vector<Triplet> trips;
    for (int i = 1; i <= nx - 2; ++i) {
        for (int j = 1; j < nt; ++j) {
            const int row = idx(i, j);
            const double uc = u[row];
            const double ul = i >= 2 ? u[idx(i - 1, j)] : 0.0;
            const double ur = i <= nx - 3 ? u[idx(i + 1, j)] : 0.0;
            trips.push_back({row, row, 1.0 / dt + (ur - ul) / (2.0 * dx) +
                                           2.0 * nu / (dx * dx)});
            if (j >= 2) trips.push_back({row, idx(i, j - 1), -1.0 / dt});
            if (i >= 2)
                trips.push_back({row, idx(i - 1, j),
                                 -uc / (2.0 * dx) - nu / (dx * dx)});
            if (i <= nx - 3)
                trips.push_back({row, idx(i + 1, j),
                                 uc / (2.0 * dx) - nu / (dx * dx)});
        }
    }
    return csr_from_triplets(n, n, trips);
}

NonlinearSystem assemble_burgers_1d(double nu, int nx, int nt) {
    if (!(nu > 0.0)) {
        throw std::invalid_argument("assemble_burgers_1d: nu must be positive");
    }
    NonlinearSystem s;
    s.mesh = build_mesh(2, {-1.0, 0.0}, {1.0, 1.0}, {nx, nt});
    s.nu = nu;
    const int ntu = nt - 1;
    s.n = (nx - 2) * ntu;

    s.interior_index.assign(s.mesh.n_nodes(), -1);
    s.is_boundary.assign(s.mesh.n_nodes(), 0);
    s.boundary_values.assign(s.mesh.n_nodes(), 0.0);
    s.initial_guess.resize(s.n);
    for (int i = 0; i < nx; ++i) {
        const double gi = -std::sin(kPi * s.mesh.coord(0, i));
        for (int j = 0; j < nt; ++j) {
            const int node = s.mesh.node_id(i, j);
            if (i == 0 || i == nx - 1) {
                s.is_boundary[node] = 1;
            } else if (j == 0) {
                s.is_boundary[node] = 1;
                s.boundary_values[node] = gi;
            } else {
                const int k = (i - 1) * ntu + (j - 1);
                s.interior_index[node] = k;
                s.initial_guess[k] = gi;
            }
        }
    }
    return s;
}

const std::vector<double>& eval_reference(const BvpSystem& system) {
    if (system.reference.empty()) {
        throw std::runtime_error(
            "eval_reference: system carries no reference solution");
    }
    return system.reference;
}

void export_system(const BvpSystem& system, const std::string& prefix) {
    mm_write(prefix + ".mtx", system.matrix);
    vec_write(prefix + "_bias.txt", system.bias);
    if (!system.reference.empty()) {
        vec_write(prefix + "_reference.txt", system.reference);
    }
}

}  // namespace pcp
