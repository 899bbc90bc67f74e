#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "podinn/params.hpp"

namespace podinn::ad {

/// Weight/bias slices of an affine map inside a ParamSet.
struct AffineRef {
    std::size_t w = no_slot;  ///< row-major rows x cols
    std::size_t b = no_slot;  ///< rows, or no_slot for a pure matvec
    int rows = 0;
    int cols = 0;
};

/// Sparse signed-coefficient matrix; each triplet is either a constant or a
/// signed reference into the ParamSet. Used for bivector bundle maps.
struct CoeffTriplet {
    int row = 0;
    int col = 0;
    double sign = 1.0;               ///< multiplies the slot value
    std::size_t slot = no_slot;      ///< no_slot -> constant `value`
    double value = 0.0;
};

struct CoeffMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<CoeffTriplet> triplets;
};

enum class Op : std::uint8_t {
    Input,
    Constant,
    ParamVec,
    Affine,
    MatvecT,
    CoeffMatvec,
    Add,
    Sub,
    Mul,
    Neg,
    ScaleConst,
    Tanh,
    Square,
    Sqrt,
    Exp,
    Sin,
    Cos,
    Abs,
    SignedCbrt,
    Reciprocal,
    OneMinusSquare,
    Sum,
    Dot,
    Concat,
    Slice,
};

using NodeId = std::int32_t;

/// Recording tape for reverse-mode differentiation over vector-valued
/// primitives. Nodes are appended in topological order; backward() walks
/// the list in reverse and accumulates leaf/parameter adjoints.
///
/// A tape is single-threaded; distinct tapes may run on distinct threads.
class Tape {
public:
    explicit Tape(const ParamSet* params) : params_(params) {}

    // -- leaves ------------------------------------------------------------
    NodeId input(std::span<const double> v);
    NodeId constant(std::span<const double> v);
    NodeId constant(double v);
    NodeId zeros(int n);
    NodeId param_vector(std::size_t offset, int size);
    NodeId param_scalar(std::size_t slot) { return param_vector(slot, 1); }

    // -- linear maps ---------------------------------------------------------
    NodeId affine(const AffineRef& a, NodeId x);    ///< W x + b
    NodeId matvec_t(const AffineRef& a, NodeId x);  ///< W^T x
    NodeId coeff_matvec(const CoeffMatrix& m, NodeId x);

    // -- arithmetic ----------------------------------------------------------
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  ///< elementwise; broadcasts a length-1 side
    NodeId neg(NodeId a);
    NodeId scale(NodeId a, double s);

    // -- elementwise nonlinearities -------------------------------------------
    NodeId tanh_(NodeId a);
    NodeId square(NodeId a);
    NodeId sqrt_(NodeId a);
    NodeId exp_(NodeId a);
    NodeId sin_(NodeId a);
    NodeId cos_(NodeId a);
    NodeId abs_(NodeId a);
    NodeId signed_cbrt(NodeId a);  ///< sgn(x)|x|^{1/3}
    NodeId reciprocal(NodeId a);
    NodeId one_minus_square(NodeId a);

    // -- reductions / shaping --------------------------------------------------
    NodeId sum(NodeId a);
    NodeId dot(NodeId a, NodeId b);
    NodeId concat(std::span<const NodeId> parts);
    NodeId slice(NodeId a, int offset, int len);

    [[nodiscard]] std::span<const double> value(NodeId id) const;
    [[nodiscard]] double scalar_value(NodeId id) const { return value(id)[0]; }
    [[nodiscard]] int size(NodeId id) const { return nodes_[check(id)].len; }
    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }

    /// Reverse pass from a scalar root. Parameter adjoints are accumulated
    /// into `param_grad` (length params->size()); leaf adjoints are readable
    /// through adjoint() until the next mutation.
    void backward(NodeId root, std::span<double> param_grad);

    [[nodiscard]] std::span<const double> adjoint(NodeId id) const;

    /// Drop all nodes but keep arena capacity.
    void reset();

private:
    struct Node {
        Op op;
        NodeId a = -1;
        NodeId b = -1;
        int val = 0;  ///< offset into the value arena
        int len = 0;
        double aux = 0.0;  ///< scalar payload (scale factor, slice offset)
        int ref = -1;      ///< index into affines_/coeffs_/concat_children_
    };

    NodeId push(Op op, int len, NodeId a = -1, NodeId b = -1);
    NodeId check(NodeId id) const;
    NodeId unary(Op op, NodeId a);
    double* val(NodeId id) { return arena_.data() + nodes_[id].val; }
    const double* val(NodeId id) const { return arena_.data() + nodes_[id].val; }
    double* adj(NodeId id) { return adjoint_.data() + nodes_[id].val; }

    const ParamSet* params_;
    std::vector<Node> nodes_;
    std::vector<double> arena_;
    std::vector<double> adjoint_;
    std::vector<AffineRef> affines_;
    std::vector<CoeffMatrix> coeffs_;
    std::vector<std::vector<NodeId>> concat_children_;
};

/// Eager executor with the same surface as Tape, minus backward(). Model
/// code is written once against either backend; this one is the fast path
/// for rollouts and data generation. reset() per field evaluation keeps the
/// arena bounded.
class PlainExec {
public:
    explicit PlainExec(const ParamSet* params) : params_(params) {}

    NodeId input(std::span<const double> v) { return constant(v); }
    NodeId constant(std::span<const double> v);
    NodeId constant(double v);
    NodeId zeros(int n);
    NodeId param_vector(std::size_t offset, int size);
    NodeId param_scalar(std::size_t slot) { return param_vector(slot, 1); }

    NodeId affine(const AffineRef& a, NodeId x);
    NodeId matvec_t(const AffineRef& a, NodeId x);
    NodeId coeff_matvec(const CoeffMatrix& m, NodeId x);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId scale(NodeId a, double s);

    NodeId tanh_(NodeId a);
    NodeId square(NodeId a);
    NodeId sqrt_(NodeId a);
    NodeId exp_(NodeId a);
    NodeId sin_(NodeId a);
    NodeId cos_(NodeId a);
    NodeId abs_(NodeId a);
    NodeId signed_cbrt(NodeId a);
    NodeId reciprocal(NodeId a);
    NodeId one_minus_square(NodeId a);

    NodeId sum(NodeId a);
    NodeId dot(NodeId a, NodeId b);
    NodeId concat(std::span<const NodeId> parts);
    NodeId slice(NodeId a, int offset, int len);

    [[nodiscard]] std::span<const double> value(NodeId id) const;
    [[nodiscard]] double scalar_value(NodeId id) const { return value(id)[0]; }
    [[nodiscard]] int size(NodeId id) const { return lens_[static_cast<std::size_t>(id)]; }

    void reset();

private:
    NodeId push(int len);
    double* val(NodeId id) { return arena_.data() + offs_[static_cast<std::size_t>(id)]; }
    const double* val(NodeId id) const { return arena_.data() + offs_[static_cast<std::size_t>(id)]; }

    const ParamSet* params_;
    std::vector<int> offs_;
    std::vector<int> lens_;
    std::vector<double> arena_;
};

}  // namespace podinn::ad
