#include "podinn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace podinn::ad {

namespace {

constexpr double kCbrtDerivClamp = 1e-9;  // |x| floor inside the derivative only

void affine_forward(const double* w, const double* b, int rows, int cols,
                    const double* x, double* y) {
    for (int i = 0; i < rows; ++i) {
        double acc = (b != nullptr) ? b[i] : 0.0;
        const double* wr = w + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += wr[j] * x[j];
        y[i] = acc;
    }
}

void matvec_t_forward(const double* w, int rows, int cols, const double* x, double* y) {
    std::fill(y, y + cols, 0.0);
    for (int i = 0; i < rows; ++i) {
        const double* wr = w + static_cast<std::size_t>(i) * cols;
        const double xi = x[i];
        for (int j = 0; j < cols; ++j) y[j] += wr[j] * xi;
    }
}

double coeff_value(const CoeffTriplet& t, const ParamSet& p) {
    return t.slot == no_slot ? t.value : t.sign * p[t.slot];
}

}  // namespace

NodeId Tape::check(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw std::invalid_argument("tape node id out of order");
    }
    return id;
}

NodeId Tape::push(Op op, int len, NodeId a, NodeId b) {
    if (a >= 0) check(a);
    if (b >= 0) check(b);
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.len = len;
    n.val = static_cast<int>(arena_.size());
    arena_.resize(arena_.size() + static_cast<std::size_t>(len), 0.0);
    nodes_.push_back(n);
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(std::span<const double> v) {
    NodeId id = push(Op::Input, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), val(id));
    return id;
}

NodeId Tape::constant(std::span<const double> v) {
    NodeId id = push(Op::Constant, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), val(id));
    return id;
}

NodeId Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

NodeId Tape::zeros(int n) { return push(Op::Constant, n); }

NodeId Tape::param_vector(std::size_t offset, int size) {
    NodeId id = push(Op::ParamVec, size);
    auto v = params_->view(offset, static_cast<std::size_t>(size));
    std::copy(v.begin(), v.end(), val(id));
    nodes_[id].aux = static_cast<double>(offset);
    return id;
}

NodeId Tape::affine(const AffineRef& a, NodeId x) {
    if (size(x) != a.cols) throw std::invalid_argument("affine: input size mismatch");
    NodeId id = push(Op::Affine, a.rows, x);
    nodes_[id].ref = static_cast<int>(affines_.size());
    affines_.push_back(a);
    const double* w = params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
    const double* b = a.b == no_slot
                          ? nullptr
                          : params_->view(a.b, static_cast<std::size_t>(a.rows)).data();
    affine_forward(w, b, a.rows, a.cols, val(x), val(id));
    return id;
}

NodeId Tape::matvec_t(const AffineRef& a, NodeId x) {
    if (size(x) != a.rows) throw std::invalid_argument("matvec_t: input size mismatch");
    NodeId id = push(Op::MatvecT, a.cols, x);
    nodes_[id].ref = static_cast<int>(affines_.size());
    affines_.push_back(a);
    const double* w = params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
    matvec_t_forward(w, a.rows, a.cols, val(x), val(id));
    return id;
}

NodeId Tape::coeff_matvec(const CoeffMatrix& m, NodeId x) {
    if (size(x) != m.cols) throw std::invalid_argument("coeff_matvec: input size mismatch");
    NodeId id = push(Op::CoeffMatvec, m.rows, x);
    nodes_[id].ref = static_cast<int>(coeffs_.size());
    coeffs_.push_back(m);
    const double* xv = val(x);
    double* y = val(id);
    for (const auto& t : m.triplets) y[t.row] += coeff_value(t, *params_) * xv[t.col];
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("add: size mismatch");
    NodeId id = push(Op::Add, size(a), a, b);
    const double* av = val(a);
    const double* bv = val(b);
    double* y = val(id);
    for (int i = 0; i < size(a); ++i) y[i] = av[i] + bv[i];
    return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("sub: size mismatch");
    NodeId id = push(Op::Sub, size(a), a, b);
    const double* av = val(a);
    const double* bv = val(b);
    double* y = val(id);
    for (int i = 0; i < size(a); ++i) y[i] = av[i] - bv[i];
    return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const int na = size(a);
    const int nb = size(b);
    if (na != nb && na != 1 && nb != 1) throw std::invalid_argument("mul: size mismatch");
    const int n = std::max(na, nb);
    NodeId id = push(Op::Mul, n, a, b);
    const double* av = val(a);
    const double* bv = val(b);
    double* y = val(id);
    for (int i = 0; i < n; ++i) y[i] = av[na == 1 ? 0 : i] * bv[nb == 1 ? 0 : i];
    return id;
}

NodeId Tape::unary(Op op, NodeId a) { return push(op, size(a), a); }

NodeId Tape::neg(NodeId a) {
    NodeId id = unary(Op::Neg, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = -val(a)[i];
    return id;
}

NodeId Tape::scale(NodeId a, double s) {
    NodeId id = unary(Op::ScaleConst, a);
    nodes_[id].aux = s;
    for (int i = 0; i < size(a); ++i) val(id)[i] = s * val(a)[i];
    return id;
}

NodeId Tape::tanh_(NodeId a) {
    NodeId id = unary(Op::Tanh, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::tanh(val(a)[i]);
    return id;
}

NodeId Tape::square(NodeId a) {
    NodeId id = unary(Op::Square, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = val(a)[i] * val(a)[i];
    return id;
}

NodeId Tape::sqrt_(NodeId a) {
    NodeId id = unary(Op::Sqrt, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::sqrt(val(a)[i]);
    return id;
}

NodeId Tape::exp_(NodeId a) {
    NodeId id = unary(Op::Exp, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::exp(val(a)[i]);
    return id;
}

NodeId Tape::sin_(NodeId a) {
    NodeId id = unary(Op::Sin, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::sin(val(a)[i]);
    return id;
}

NodeId Tape::cos_(NodeId a) {
    NodeId id = unary(Op::Cos, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::cos(val(a)[i]);
    return id;
}

NodeId Tape::abs_(NodeId a) {
    NodeId id = unary(Op::Abs, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::abs(val(a)[i]);
    return id;
}

NodeId Tape::signed_cbrt(NodeId a) {
    NodeId id = unary(Op::SignedCbrt, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = std::cbrt(val(a)[i]);
    return id;
}

NodeId Tape::reciprocal(NodeId a) {
    NodeId id = unary(Op::Reciprocal, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = 1.0 / val(a)[i];
    return id;
}

NodeId Tape::one_minus_square(NodeId a) {
    NodeId id = unary(Op::OneMinusSquare, a);
    for (int i = 0; i < size(a); ++i) val(id)[i] = 1.0 - val(a)[i] * val(a)[i];
    return id;
}

NodeId Tape::sum(NodeId a) {
    NodeId id = push(Op::Sum, 1, a);
    double acc = 0.0;
    for (int i = 0; i < size(a); ++i) acc += val(a)[i];
    *val(id) = acc;
    return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("dot: size mismatch");
    NodeId id = push(Op::Dot, 1, a, b);
    double acc = 0.0;
    for (int i = 0; i < size(a); ++i) acc += val(a)[i] * val(b)[i];
    *val(id) = acc;
    return id;
}

NodeId Tape::concat(std::span<const NodeId> parts) {
    int n = 0;
    for (NodeId p : parts) n += size(check(p));
    NodeId id = push(Op::Concat, n);
    nodes_[id].ref = static_cast<int>(concat_children_.size());
    concat_children_.emplace_back(parts.begin(), parts.end());
    double* y = val(id);
    for (NodeId p : parts) {
        std::copy(val(p), val(p) + size(p), y);
        y += size(p);
    }
    return id;
}

NodeId Tape::slice(NodeId a, int offset, int len) {
    if (offset < 0 || len < 0 || offset + len > size(a)) {
        throw std::invalid_argument("slice: range out of bounds");
    }
    NodeId id = push(Op::Slice, len, a);
    nodes_[id].aux = static_cast<double>(offset);
    std::copy(val(a) + offset, val(a) + offset + len, val(id));
    return id;
}

std::span<const double> Tape::value(NodeId id) const {
    check(id);
    return {val(id), static_cast<std::size_t>(nodes_[id].len)};
}

std::span<const double> Tape::adjoint(NodeId id) const {
    check(id);
    if (adjoint_.size() != arena_.size()) {
        throw std::logic_error("adjoint requested before backward()");
    }
    return {adjoint_.data() + nodes_[id].val, static_cast<std::size_t>(nodes_[id].len)};
}

void Tape::backward(NodeId root, std::span<double> param_grad) {
    check(root);
    if (nodes_[root].len != 1) {
        throw std::invalid_argument("backward: root must be a scalar node");
    }
    if (param_grad.size() != params_->size()) {
        throw std::invalid_argument("backward: gradient buffer has wrong length");
    }
    adjoint_.assign(arena_.size(), 0.0);
    adj(root)[0] = 1.0;

    for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
        const Node& n = nodes_[id];
        const double* g = adj(id);
        switch (n.op) {
            case Op::Input:
            case Op::Constant:
                break;
            case Op::ParamVec: {
                const auto off = static_cast<std::size_t>(n.aux);
                for (int i = 0; i < n.len; ++i) param_grad[off + i] += g[i];
                break;
            }
            case Op::Affine: {
                const AffineRef& a = affines_[n.ref];
                const double* w =
                    params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
                const double* x = val(n.a);
                double* xa = adj(n.a);
                double* wg = param_grad.data() + a.w;
                for (int i = 0; i < a.rows; ++i) {
                    const double gi = g[i];
                    if (gi == 0.0) continue;
                    const double* wr = w + static_cast<std::size_t>(i) * a.cols;
                    double* wgr = wg + static_cast<std::size_t>(i) * a.cols;
                    for (int j = 0; j < a.cols; ++j) {
                        xa[j] += wr[j] * gi;
                        wgr[j] += x[j] * gi;
                    }
                }
                if (a.b != no_slot) {
                    double* bg = param_grad.data() + a.b;
                    for (int i = 0; i < a.rows; ++i) bg[i] += g[i];
                }
                break;
            }
            case Op::MatvecT: {
                const AffineRef& a = affines_[n.ref];
                const double* w =
                    params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
                const double* x = val(n.a);
                double* xa = adj(n.a);
                double* wg = param_grad.data() + a.w;
                // y_j = sum_i W_ij x_i
                for (int i = 0; i < a.rows; ++i) {
                    const double* wr = w + static_cast<std::size_t>(i) * a.cols;
                    double* wgr = wg + static_cast<std::size_t>(i) * a.cols;
                    const double xi = x[i];
                    double acc = 0.0;
                    for (int j = 0; j < a.cols; ++j) {
                        acc += wr[j] * g[j];
                        wgr[j] += xi * g[j];
                    }
                    xa[i] += acc;
                }
                break;
            }
            case Op::CoeffMatvec: {
                const CoeffMatrix& m = coeffs_[n.ref];
                const double* x = val(n.a);
                double* xa = adj(n.a);
                for (const auto& t : m.triplets) {
                    const double gr = g[t.row];
                    xa[t.col] += coeff_value(t, *params_) * gr;
                    if (t.slot != no_slot) param_grad[t.slot] += t.sign * x[t.col] * gr;
                }
                break;
            }
            case Op::Add: {
                double* aa = adj(n.a);
                double* ba = adj(n.b);
                for (int i = 0; i < n.len; ++i) {
                    aa[i] += g[i];
                    ba[i] += g[i];
                }
                break;
            }
            case Op::Sub: {
                double* aa = adj(n.a);
                double* ba = adj(n.b);
                for (int i = 0; i < n.len; ++i) {
                    aa[i] += g[i];
                    ba[i] -= g[i];
                }
                break;
            }
            case Op::Mul: {
                const int na = nodes_[n.a].len;
                const int nb = nodes_[n.b].len;
                const double* av = val(n.a);
                const double* bv = val(n.b);
                double* aa = adj(n.a);
                double* ba = adj(n.b);
                for (int i = 0; i < n.len; ++i) {
                    const int ia = na == 1 ? 0 : i;
                    const int ib = nb == 1 ? 0 : i;
                    aa[ia] += bv[ib] * g[i];
                    ba[ib] += av[ia] * g[i];
                }
                break;
            }
            case Op::Neg: {
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] -= g[i];
                break;
            }
            case Op::ScaleConst: {
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += n.aux * g[i];
                break;
            }
            case Op::Tanh: {
                const double* y = val(id);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += (1.0 - y[i] * y[i]) * g[i];
                break;
            }
            case Op::Square: {
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += 2.0 * x[i] * g[i];
                break;
            }
            case Op::Sqrt: {
                const double* y = val(id);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += 0.5 / y[i] * g[i];
                break;
            }
            case Op::Exp: {
                const double* y = val(id);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += y[i] * g[i];
                break;
            }
            case Op::Sin: {
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] += std::cos(x[i]) * g[i];
                break;
            }
            case Op::Cos: {
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] -= std::sin(x[i]) * g[i];
                break;
            }
            case Op::Abs: {
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) {
                    const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
                    aa[i] += s * g[i];
                }
                break;
            }
            case Op::SignedCbrt: {
                // d/dx sgn(x)|x|^{1/3} = (1/3)|x|^{-2/3}; diverges at 0, so the
                // derivative clamps |x| while the forward value stays exact.
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) {
                    const double ax = std::max(std::abs(x[i]), kCbrtDerivClamp);
                    aa[i] += g[i] / (3.0 * std::cbrt(ax * ax));
                }
                break;
            }
            case Op::Reciprocal: {
                const double* y = val(id);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] -= y[i] * y[i] * g[i];
                break;
            }
            case Op::OneMinusSquare: {
                const double* x = val(n.a);
                double* aa = adj(n.a);
                for (int i = 0; i < n.len; ++i) aa[i] -= 2.0 * x[i] * g[i];
                break;
            }
            case Op::Sum: {
                double* aa = adj(n.a);
                const double g0 = g[0];
                for (int i = 0; i < nodes_[n.a].len; ++i) aa[i] += g0;
                break;
            }
            case Op::Dot: {
                const double* av = val(n.a);
                const double* bv = val(n.b);
                double* aa = adj(n.a);
                double* ba = adj(n.b);
                const double g0 = g[0];
                for (int i = 0; i < nodes_[n.a].len; ++i) {
                    aa[i] += bv[i] * g0;
                    ba[i] += av[i] * g0;
                }
                break;
            }
            case Op::Concat: {
                int off = 0;
                for (NodeId p : concat_children_[n.ref]) {
                    double* pa = adj(p);
                    for (int i = 0; i < nodes_[p].len; ++i) pa[i] += g[off + i];
                    off += nodes_[p].len;
                }
                break;
            }
            case Op::Slice: {
                double* aa = adj(n.a);
                const int off = static_cast<int>(n.aux);
                for (int i = 0; i < n.len; ++i) aa[off + i] += g[i];
                break;
            }
        }
    }
}

void Tape::reset() {
    nodes_.clear();
    arena_.clear();
    adjoint_.clear();
    affines_.clear();
    coeffs_.clear();
    concat_children_.clear();
}

// ---------------------------------------------------------------------------
// PlainExec
// ---------------------------------------------------------------------------

NodeId PlainExec::push(int len) {
    offs_.push_back(static_cast<int>(arena_.size()));
    lens_.push_back(len);
    arena_.resize(arena_.size() + static_cast<std::size_t>(len), 0.0);
    return static_cast<NodeId>(offs_.size() - 1);
}

NodeId PlainExec::constant(std::span<const double> v) {
    NodeId id = push(static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), val(id));
    return id;
}

NodeId PlainExec::constant(double v) { return constant(std::span<const double>(&v, 1)); }

NodeId PlainExec::zeros(int n) { return push(n); }

NodeId PlainExec::param_vector(std::size_t offset, int size) {
    auto v = params_->view(offset, static_cast<std::size_t>(size));
    return constant(v);
}

NodeId PlainExec::affine(const AffineRef& a, NodeId x) {
    if (size(x) != a.cols) throw std::invalid_argument("affine: input size mismatch");
    NodeId id = push(a.rows);
    const double* w = params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
    const double* b = a.b == no_slot
                          ? nullptr
                          : params_->view(a.b, static_cast<std::size_t>(a.rows)).data();
    affine_forward(w, b, a.rows, a.cols, val(x), val(id));
    return id;
}

NodeId PlainExec::matvec_t(const AffineRef& a, NodeId x) {
    if (size(x) != a.rows) throw std::invalid_argument("matvec_t: input size mismatch");
    NodeId id = push(a.cols);
    const double* w = params_->view(a.w, static_cast<std::size_t>(a.rows) * a.cols).data();
    matvec_t_forward(w, a.rows, a.cols, val(x), val(id));
    return id;
}

NodeId PlainExec::coeff_matvec(const CoeffMatrix& m, NodeId x) {
    if (size(x) != m.cols) throw std::invalid_argument("coeff_matvec: input size mismatch");
    NodeId id = push(m.rows);
    const double* xv = val(x);
    double* y = val(id);
    for (const auto& t : m.triplets) y[t.row] += coeff_value(t, *params_) * xv[t.col];
    return id;
}

NodeId PlainExec::add(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("add: size mismatch");
    NodeId id = push(size(a));
    for (int i = 0; i < size(a); ++i) val(id)[i] = val(a)[i] + val(b)[i];
    return id;
}

NodeId PlainExec::sub(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("sub: size mismatch");
    NodeId id = push(size(a));
    for (int i = 0; i < size(a); ++i) val(id)[i] = val(a)[i] - val(b)[i];
    return id;
}

NodeId PlainExec::mul(NodeId a, NodeId b) {
    const int na = size(a);
    const int nb = size(b);
    if (na != nb && na != 1 && nb != 1) throw std::invalid_argument("mul: size mismatch");
    const int n = std::max(na, nb);
    NodeId id = push(n);
    for (int i = 0; i < n; ++i) {
        val(id)[i] = val(a)[na == 1 ? 0 : i] * val(b)[nb == 1 ? 0 : i];
    }
    return id;
}

NodeId PlainExec::neg(NodeId a) {
    NodeId id = push(size(a));
    for (int i = 0; i < size(a); ++i) val(id)[i] = -val(a)[i];
    return id;
}

NodeId PlainExec::scale(NodeId a, double s) {
    NodeId id = push(size(a));
    for (int i = 0; i < size(a); ++i) val(id)[i] = s * val(a)[i];
    return id;
}

#define PODINN_PLAIN_UNARY(name, expr)                       \
    NodeId PlainExec::name(NodeId a) {                       \
        NodeId id = push(size(a));                           \
        for (int i = 0; i < size(a); ++i) {                  \
            const double x = val(a)[i];                      \
            (void)x;                                         \
            val(id)[i] = (expr);                             \
        }                                                    \
        return id;                                           \
    }

PODINN_PLAIN_UNARY(tanh_, std::tanh(x))
PODINN_PLAIN_UNARY(square, x* x)
PODINN_PLAIN_UNARY(sqrt_, std::sqrt(x))
PODINN_PLAIN_UNARY(exp_, std::exp(x))
PODINN_PLAIN_UNARY(sin_, std::sin(x))
PODINN_PLAIN_UNARY(cos_, std::cos(x))
PODINN_PLAIN_UNARY(abs_, std::abs(x))
PODINN_PLAIN_UNARY(signed_cbrt, std::cbrt(x))
PODINN_PLAIN_UNARY(reciprocal, 1.0 / x)
PODINN_PLAIN_UNARY(one_minus_square, 1.0 - x * x)

#undef PODINN_PLAIN_UNARY

NodeId PlainExec::sum(NodeId a) {
    NodeId id = push(1);
    double acc = 0.0;
    for (int i = 0; i < size(a); ++i) acc += val(a)[i];
    *val(id) = acc;
    return id;
}

NodeId PlainExec::dot(NodeId a, NodeId b) {
    if (size(a) != size(b)) throw std::invalid_argument("dot: size mismatch");
    NodeId id = push(1);
    double acc = 0.0;
    for (int i = 0; i < size(a); ++i) acc += val(a)[i] * val(b)[i];
    *val(id) = acc;
    return id;
}

NodeId PlainExec::concat(std::span<const NodeId> parts) {
    int n = 0;
    for (NodeId p : parts) n += size(p);
    NodeId id = push(n);
    double* y = val(id);
    for (NodeId p : parts) {
        std::copy(val(p), val(p) + size(p), y);
        y += size(p);
    }
    return id;
}

NodeId PlainExec::slice(NodeId a, int offset, int len) {
    if (offset < 0 || len < 0 || offset + len > size(a)) {
        throw std::invalid_argument("slice: range out of bounds");
    }
    NodeId id = push(len);
    std::copy(val(a) + offset, val(a) + offset + len, val(id));
    return id;
}

std::span<const double> PlainExec::value(NodeId id) const {
    return {val(id), static_cast<std::size_t>(lens_[static_cast<std::size_t>(id)])};
}

void PlainExec::reset() {
    offs_.clear();
    lens_.clear();
    arena_.clear();
}

}  // namespace podinn::ad
