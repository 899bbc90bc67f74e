#include "podinn/bivector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace podinn {

namespace {

void check_pair(int i, int j, int n) {
    if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
        throw std::invalid_argument("bivector: bad index pair");
    }
}

}  // namespace

BivectorEntry* Bivector::find_mut(int i, int j) {
    for (auto& e : entries_) {
        if (e.i == i && e.j == j) return &e;
    }
    return nullptr;
}

const BivectorEntry* Bivector::find(int i, int j) const {
    for (const auto& e : entries_) {
        if (e.i == i && e.j == j) return &e;
    }
    return nullptr;
}

void Bivector::set_fixed(int i, int j, double v) {
    check_pair(i, j, n_);
    if (i > j) {
        std::swap(i, j);
        v = -v;
    }
    if (BivectorEntry* e = find_mut(i, j)) {
        e->status = EntryStatus::FixedValue;
        e->value = v;
        e->slot = no_slot;
        return;
    }
    entries_.push_back({i, j, EntryStatus::FixedValue, v, no_slot});
}

std::size_t Bivector::set_learnable(int i, int j, ParamSet& params, const std::string& name,
                                    double init) {
    check_pair(i, j, n_);
    if (i > j) std::swap(i, j);  // sign convention owned by the stored upper entry
    if (find_mut(i, j) != nullptr) {
        throw std::invalid_argument("bivector: entry already set");
    }
    const std::size_t slot = params.add_scalar(name, init);
    entries_.push_back({i, j, EntryStatus::Learnable, 0.0, slot});
    return slot;
}

double Bivector::coefficient(int i, int j, const ParamSet& params) const {
    check_pair(i, j, n_);
    double sign = 1.0;
    if (i > j) {
        std::swap(i, j);
        sign = -1.0;
    }
    const BivectorEntry* e = find(i, j);
    if (e == nullptr || e->status == EntryStatus::FixedZero) return 0.0;
    const double v = e->status == EntryStatus::FixedValue ? e->value : params[e->slot];
    return sign * v;
}

Matrix Bivector::dense(const ParamSet& params) const {
    Matrix m(n_, n_);
    for (const auto& e : entries_) {
        const double v =
            e.status == EntryStatus::FixedValue
                ? e.value
                : (e.status == EntryStatus::Learnable ? params[e.slot] : 0.0);
        m.at(e.i, e.j) = v;
        m.at(e.j, e.i) = -v;
    }
    return m;
}

std::vector<double> Bivector::apply(std::span<const double> e, const ParamSet& params) const {
    if (static_cast<int>(e.size()) != n_) {
        throw std::invalid_argument("bivector apply: effort dimension mismatch");
    }
    std::vector<double> f(static_cast<std::size_t>(n_), 0.0);
    for (const auto& en : entries_) {
        const double v =
            en.status == EntryStatus::FixedValue
                ? en.value
                : (en.status == EntryStatus::Learnable ? params[en.slot] : 0.0);
        f[en.i] += v * e[en.j];
        f[en.j] -= v * e[en.i];
    }
    return f;
}

ad::CoeffMatrix Bivector::block(std::span<const int> rows, std::span<const int> cols) const {
    std::vector<int> row_of(static_cast<std::size_t>(n_), -1);
    std::vector<int> col_of(static_cast<std::size_t>(n_), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) row_of[rows[k]] = static_cast<int>(k);
    for (std::size_t k = 0; k < cols.size(); ++k) col_of[cols[k]] = static_cast<int>(k);

    ad::CoeffMatrix m;
    m.rows = static_cast<int>(rows.size());
    m.cols = static_cast<int>(cols.size());
    for (const auto& e : entries_) {
        if (e.status == EntryStatus::FixedZero) continue;
        auto emit = [&](int gi, int gj, double sign) {
            const int r = row_of[gi];
            const int c = col_of[gj];
            if (r < 0 || c < 0) return;
            ad::CoeffTriplet t;
            t.row = r;
            t.col = c;
            if (e.status == EntryStatus::Learnable) {
                t.slot = e.slot;
                t.sign = sign;
            } else {
                t.value = sign * e.value;
            }
            m.triplets.push_back(t);
        };
        emit(e.i, e.j, 1.0);
        emit(e.j, e.i, -1.0);
    }
    return m;
}

double pairing(std::span<const double> e, std::span<const double> f) {
    if (e.size() != f.size()) {
        throw std::invalid_argument("pairing: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) acc += e[i] * f[i];
    return acc;
}

CausalBlocks causal_blocks(const Bivector& b, const PortLayout& layout) {
    if (b.dim() != layout.n_total()) {
        throw std::invalid_argument("causal_blocks: bivector/layout dimension mismatch");
    }
    for (const auto& e : b.entries()) {
        const bool i_res = e.i >= layout.n_storage() &&
                           e.i < layout.n_storage() + layout.n_resistive();
        const bool j_res = e.j >= layout.n_storage() &&
                           e.j < layout.n_storage() + layout.n_resistive();
        if (i_res && j_res && e.status != EntryStatus::FixedZero) {
            throw std::invalid_argument(
                "causal_blocks: resistive-resistive coupling breaks explicit causality");
        }
    }
    std::vector<int> s(static_cast<std::size_t>(layout.n_storage()));
    std::vector<int> r(static_cast<std::size_t>(layout.n_resistive()));
    std::vector<int> x(static_cast<std::size_t>(layout.n_external()));
    std::iota(s.begin(), s.end(), 0);
    std::iota(r.begin(), r.end(), layout.n_storage());
    std::iota(x.begin(), x.end(), layout.n_storage() + layout.n_resistive());

    CausalBlocks out;
    out.ss = b.block(s, s);
    out.sr = b.block(s, r);
    out.si = b.block(s, x);
    out.rs = b.block(r, s);
    out.ri = b.block(r, x);
    out.is = b.block(x, s);
    out.ir = b.block(x, r);
    return out;
}

RankResult degeneracy_rank(const Bivector& b, const PortLayout& layout,
                           const ParamSet& params, double rel_tol) {
    const int ns = layout.n_storage();
    Matrix full = b.dense(params);
    Matrix ss(ns, ns);
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) ss.at(i, j) = full.at(i, j);
    }
    return numerical_rank(ss, rel_tol);
}

}  // namespace podinn
