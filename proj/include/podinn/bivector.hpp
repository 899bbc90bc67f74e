#pragma once

#include <span>
#include <string>
#include <vector>

#include "podinn/linalg.hpp"
#include "podinn/params.hpp"
#include "podinn/ports.hpp"
#include "podinn/tape.hpp"

namespace podinn {

enum class EntryStatus { FixedZero, FixedValue, Learnable };

/// One stored strict-upper-triangle coefficient; the lower triangle is
/// implied by skewness, and absent pairs are fixed-zero.
struct BivectorEntry {
    int i = 0;  ///< row, i < j
    int j = 0;
    EntryStatus status = EntryStatus::FixedZero;
    double value = 0.0;           ///< FixedValue payload
    std::size_t slot = no_slot;   ///< Learnable payload
};

/// Skew coefficient matrix over the combined flow basis: the learnable
/// coupling object of the model. Skew-symmetry is structural (only the
/// upper triangle exists), so fixed-zero entries cannot drift and
/// pairing(e, B e) vanishes identically.
class Bivector {
public:
    Bivector() = default;
    explicit Bivector(int n) : n_(n) {}

    [[nodiscard]] int dim() const { return n_; }

    /// Set B[i][j] = v (and implicitly B[j][i] = -v). Any (i, j) order.
    void set_fixed(int i, int j, double v);

    /// Register a learnable coefficient for B[i][j]; returns the slot.
    std::size_t set_learnable(int i, int j, ParamSet& params, const std::string& name,
                              double init);

    /// Wedge-style coupling c * (d_a ^ d_b): the effort on `a` feeds the flow
    /// of `b` with +c (and the effort on `b` feeds the flow of `a` with -c).
    void couple_fixed(int a, int b, double c) { set_fixed(b, a, c); }

    [[nodiscard]] double coefficient(int i, int j, const ParamSet& params) const;
    [[nodiscard]] const BivectorEntry* find(int i, int j) const;  ///< upper-triangle lookup
    [[nodiscard]] const std::vector<BivectorEntry>& entries() const { return entries_; }

    [[nodiscard]] Matrix dense(const ParamSet& params) const;

    /// Bundle map f = B e.
    [[nodiscard]] std::vector<double> apply(std::span<const double> e,
                                            const ParamSet& params) const;

    /// Sub-block as a signed-coefficient matrix usable on both executors;
    /// rows/cols are global basis indices.
    [[nodiscard]] ad::CoeffMatrix block(std::span<const int> rows,
                                        std::span<const int> cols) const;

private:
    int n_ = 0;
    std::vector<BivectorEntry> entries_;  // strict upper triangle, unsorted
    BivectorEntry* find_mut(int i, int j);
};

/// Natural pairing sum_i e_i f_i; zero (to rounding) whenever f = B e.
double pairing(std::span<const double> e, std::span<const double> f);

/// The named blocks of the explicit causal evaluation order. B_RR is
/// structurally zero, so flows of resistive ports never depend on their own
/// efforts.
struct CausalBlocks {
    ad::CoeffMatrix ss;  ///< storage <- storage efforts
    ad::CoeffMatrix sr;  ///< storage <- resistive efforts
    ad::CoeffMatrix si;  ///< storage <- external efforts
    ad::CoeffMatrix rs;  ///< resistive <- storage efforts
    ad::CoeffMatrix ri;  ///< resistive <- external efforts
    ad::CoeffMatrix is;  ///< external reaction <- storage efforts
    ad::CoeffMatrix ir;  ///< external reaction <- resistive efforts
};

CausalBlocks causal_blocks(const Bivector& b, const PortLayout& layout);

/// Rank and kernel of the storage-storage block; rank deficiency signals
/// constrained (degenerate) dynamics.
RankResult degeneracy_rank(const Bivector& b, const PortLayout& layout,
                           const ParamSet& params, double rel_tol = 1e-8);

}  // namespace podinn
