#include "pcp/tape.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

#include "pcp/activations.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace pcp {
namespace {

/// Threaded BLAS would break bit-reproducibility of training runs; pin it to
/// one thread through the runtime API (the env var is handled at process
/// start, see blas_env.hpp, but library embedders may not call that).
void blas_runtime_init() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (openblas_set_num_threads) openblas_set_num_threads(1);
    });
}

/// c (m x n) = a (m x k) times b (n x k) transposed, plus beta times c.
void gemm_nt(const double* a, const double* b, double* c, int m, int n, int k,
             double beta) {
    blas_runtime_init();
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, m, n, k, 1.0, a,
                k > 0 ? k : 1, b, k > 0 ? k : 1, beta, c, n > 0 ? n : 1);
}

/// c (m x n) += a (m x k) times b (k x n).
void gemm_nn_acc(const double* a, const double* b, double* c, int m, int n,
                 int k) {
    blas_runtime_init();
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, a,
                k > 0 ? k : 1, b, n > 0 ? n : 1, 1.0, c, n > 0 ? n : 1);
}

/// c (m x n) += a (k x m) transposed times b (k x n).
void gemm_tn_acc(const double* a, const double* b, double* c, int m, int n,
                 int k) {
    blas_runtime_init();
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, m, n, k, 1.0, a,
                m > 0 ? m : 1, b, n > 0 ? n : 1, 1.0, c, n > 0 ? n : 1);
}

/// Recycled tensor storage. Buffers are matched by exact length, so a
/// steady-state training loop allocates nothing after the first iteration.
thread_local std::vector<std::vector<double>> g_pool;
constexpr size_t kPoolCap = 512;

}  // namespace

Tensor Tape::acquire(int rows, int cols) {
    const size_t need = static_cast<size_t>(rows) * cols;
    for (size_t i = g_pool.size(); i-- > 0;) {
        if (g_pool[i].size() == need) {
            Tensor t;
            t.rows = rows;
            t.cols = cols;
            t.v = std::move(g_pool[i]);
            g_pool[i] = std::move(g_pool.back());
            g_pool.pop_back();
            return t;
        }
    }
    return Tensor(rows, cols);
}

Tape::~Tape() { reset(); }

void Tape::reset() {
    for (Node& n : nodes_) {
        if (g_pool.size() < kPoolCap && !n.val.v.empty())
            g_pool.push_back(std::move(n.val.v));
        if (g_pool.size() < kPoolCap && !n.grad.v.empty())
            g_pool.push_back(std::move(n.grad.v));
    }
    nodes_.clear();
}

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(int id) {
    Node& n = nodes_[id];
    if (n.grad.v.empty()) {
        n.grad = acquire(n.val.rows, n.val.cols);
        std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
    }
    return n.grad;
}

int Tape::input(const Tensor& t) {
    Node n;
    n.op = Op::leaf_const;
    n.val = acquire(t.rows, t.cols);
    std::copy(t.v.begin(), t.v.end(), n.val.v.begin());
    return push(std::move(n));
}

int Tape::param(const Tensor& t) {
    Node n;
    n.op = Op::leaf_param;
    n.needs_grad = true;
    n.val = acquire(t.rows, t.cols);
    std::copy(t.v.begin(), t.v.end(), n.val.v.begin());
    return push(std::move(n));
}

int Tape::matmul_nt(int a, int b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    if (ta.cols != tb.cols) {
        throw std::invalid_argument("tape: matmul_nt inner dims " +
                                    std::to_string(ta.cols) + " vs " +
                                    std::to_string(tb.cols));
    }
    Node n;
    n.op = Op::matmul_nt;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = acquire(ta.rows, tb.rows);
    gemm_nt(ta.data(), tb.data(), n.val.data(), ta.rows, tb.rows, ta.cols, 0.0);
    return push(std::move(n));
}

int Tape::add_bias(int a, int bias) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[bias].val;
    if (tb.rows != 1 || tb.cols != ta.cols) {
        throw std::invalid_argument("tape: bias shape mismatch");
    }
    Node n;
    n.op = Op::add_bias;
    n.a = a;
    n.b = bias;
    n.needs_grad = nodes_[a].needs_grad || nodes_[bias].needs_grad;
    n.val = acquire(ta.rows, ta.cols);
    for (int i = 0; i < ta.rows; ++i) {
        const double* src = ta.data() + static_cast<size_t>(i) * ta.cols;
        double* dst = n.val.data() + static_cast<size_t>(i) * ta.cols;
        for (int j = 0; j < ta.cols; ++j) dst[j] = src[j] + tb.v[j];
    }
    return push(std::move(n));
}

int Tape::linear(int x, int w, int bias) {
    const Tensor& tx = nodes_[x].val;
    const Tensor& tw = nodes_[w].val;
    const Tensor& tb = nodes_[bias].val;
    if (tx.cols != tw.cols) {
        throw std::invalid_argument("tape: linear inner dims " +
                                    std::to_string(tx.cols) + " vs " +
                                    std::to_string(tw.cols));
    }
    if (tb.rows != 1 || tb.cols != tw.rows) {
        throw std::invalid_argument("tape: linear bias shape mismatch");
    }
    Node n;
    n.op = Op::linear;
    n.a = x;
    n.b = w;
    n.c = bias;
    n.needs_grad = nodes_[x].needs_grad || nodes_[w].needs_grad ||
                   nodes_[bias].needs_grad;
    n.val = acquire(tx.rows, tw.rows);
    const int m = tw.rows;
    for (int i = 0; i < tx.rows; ++i) {
        double* row = n.val.data() + static_cast<size_t>(i) * m;
        std::memcpy(row, tb.v.data(), sizeof(double) * m);
    }
    gemm_nt(tx.data(), tw.data(), n.val.data(), tx.rows, m, tx.cols, 1.0);
    return push(std::move(n));
}

int Tape::activation(int a, Activation act) {
    const Tensor& ta = nodes_[a].val;
    Node n;
    n.op = act == Activation::tanh_act ? Op::act_tanh : Op::act_silu;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = acquire(ta.rows, ta.cols);
    if (act == Activation::tanh_act) {
        tanh_forward(ta.data(), n.val.data(), ta.size());
    } else {
        silu_forward(ta.data(), n.val.data(), ta.size());
    }
    return push(std::move(n));
}

int Tape::sub_vec(int a, const std::vector<double>& c) {
    const Tensor& ta = nodes_[a].val;
    if (ta.size() != c.size()) {
        throw std::invalid_argument("tape: sub_vec length mismatch");
    }
    Node n;
    n.op = Op::sub_vec;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = acquire(ta.rows, ta.cols);
    for (size_t i = 0; i < c.size(); ++i) n.val.v[i] = ta.v[i] - c[i];
    return push(std::move(n));
}

int Tape::square_sum(int a) {
    const Tensor& ta = nodes_[a].val;
    double s = 0.0;
    for (double x : ta.v) s += x * x;
    Node n;
    n.op = Op::square_sum;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Tensor(1, 1);
    n.val.v[0] = s;
    return push(std::move(n));
}

int Tape::scale(int a, double s) {
    const Tensor& ta = nodes_[a].val;
    Node n;
    n.op = Op::scale;
    n.a = a;
    n.aux = s;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = acquire(ta.rows, ta.cols);
    for (size_t i = 0; i < ta.v.size(); ++i) n.val.v[i] = s * ta.v[i];
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    if (ta.rows != tb.rows || ta.cols != tb.cols) {
        throw std::invalid_argument("tape: add shape mismatch");
    }
    Node n;
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = acquire(ta.rows, ta.cols);
    for (size_t i = 0; i < ta.v.size(); ++i) n.val.v[i] = ta.v[i] + tb.v[i];
    return push(std::move(n));
}

const Tensor& Tape::grad(int id) const {
    const Node& n = nodes_[id];
    if (n.grad.v.empty()) {
        throw std::logic_error("tape: gradient not computed for node " +
                               std::to_string(id));
    }
    return n.grad;
}

void Tape::backward_scalar(int root) {
    const Tensor& tv = nodes_[root].val;
    if (tv.rows != 1 || tv.cols != 1) {
        throw std::invalid_argument("tape: backward_scalar on non-scalar root");
    }
    backward(root, {1.0});
}

void Tape::backward(int root, const std::vector<double>& seed) {
    Node& rn = nodes_[root];
    if (seed.size() != rn.val.size()) {
        throw std::invalid_argument("tape: seed length " +
                                    std::to_string(seed.size()) +
                                    " does not match root size " +
                                    std::to_string(rn.val.size()));
    }
    if (!rn.needs_grad) return;
    {
        Tensor& g = grad_buf(root);
        for (size_t i = 0; i < seed.size(); ++i) g.v[i] += seed[i];
    }

    for (int id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.needs_grad || n.grad.v.empty()) continue;
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::leaf_const:
            case Op::leaf_param:
                break;
            case Op::matmul_nt: {
                const Node& na = nodes_[n.a];
                const Node& nb = nodes_[n.b];
                // val = A B^T with A (r x k), B (m x k); g is r x m.
                if (na.needs_grad) {
                    Tensor& ga = grad_buf(n.a);
                    gemm_nn_acc(g.data(), nb.val.data(), ga.data(), na.val.rows,
                                na.val.cols, nb.val.rows);
                }
                if (nb.needs_grad) {
                    Tensor& gb = grad_buf(n.b);
                    gemm_tn_acc(g.data(), na.val.data(), gb.data(), nb.val.rows,
                                nb.val.cols, na.val.rows);
                }
                break;
            }
            case Op::add_bias: {
                if (nodes_[n.a].needs_grad) {
                    Tensor& ga = grad_buf(n.a);
                    for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& gb = grad_buf(n.b);
                    const int cols = n.val.cols;
                    for (int i = 0; i < n.val.rows; ++i) {
                        const double* row =
                            g.data() + static_cast<size_t>(i) * cols;
                        for (int j = 0; j < cols; ++j) gb.v[j] += row[j];
                    }
                }
                break;
            }
            case Op::linear: {
                const Node& nx = nodes_[n.a];
                const Node& nw = nodes_[n.b];
                if (nx.needs_grad) {
                    Tensor& gx = grad_buf(n.a);
                    gemm_nn_acc(g.data(), nw.val.data(), gx.data(), nx.val.rows,
                                nx.val.cols, nw.val.rows);
                }
                if (nw.needs_grad) {
                    Tensor& gw = grad_buf(n.b);
                    gemm_tn_acc(g.data(), nx.val.data(), gw.data(), nw.val.rows,
                                nw.val.cols, nx.val.rows);
                }
                if (nodes_[n.c].needs_grad) {
                    Tensor& gb = grad_buf(n.c);
                    const int cols = n.val.cols;
                    for (int i = 0; i < n.val.rows; ++i) {
                        const double* row =
                            g.data() + static_cast<size_t>(i) * cols;
                        for (int j = 0; j < cols; ++j) gb.v[j] += row[j];
                    }
                }
                break;
            }
            case Op::act_tanh: {
                Tensor& ga = grad_buf(n.a);
                tanh_backward(n.val.data(), g.data(), ga.data(), g.v.size());
                break;
            }
            case Op::act_silu: {
                Tensor& ga = grad_buf(n.a);
                silu_backward(nodes_[n.a].val.data(), n.val.data(), g.data(),
                              ga.data(), g.v.size());
                break;
            }
            case Op::sub_vec: {
                Tensor& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
                break;
            }
            case Op::square_sum: {
                Tensor& ga = grad_buf(n.a);
                const Tensor& av = nodes_[n.a].val;
                const double s = 2.0 * g.v[0];
                for (size_t i = 0; i < av.v.size(); ++i)
                    ga.v[i] += s * av.v[i];
                break;
            }
            case Op::scale: {
                Tensor& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.v.size(); ++i)
                    ga.v[i] += n.aux * g.v[i];
                break;
            }
            case Op::add: {
                if (nodes_[n.a].needs_grad) {
                    Tensor& ga = grad_buf(n.a);
                    for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& gb = grad_buf(n.b);
                    for (size_t i = 0; i < g.v.size(); ++i) gb.v[i] += g.v[i];
                }
                break;
            }
        }
    }
}

}  // namespace pcp
