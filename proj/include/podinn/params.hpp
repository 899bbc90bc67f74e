#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace podinn {

inline constexpr std::size_t no_slot = std::numeric_limits<std::size_t>::max();

/// Flat vector of trainable parameters plus a layout descriptor mapping
/// named component parameters to contiguous slices.
class ParamSet {
public:
    struct Slice {
        std::string name;
        std::size_t offset = 0;
        std::size_t size = 0;
    };

    /// Reserve a named slice and return its offset.
    std::size_t add(const std::string& name, std::size_t size, double fill = 0.0) {
        for (const auto& s : slices_) {
            if (s.name == name) {
                throw std::invalid_argument("duplicate parameter slice: " + name);
            }
        }
        const std::size_t offset = values_.size();
        slices_.push_back({name, offset, size});
        values_.resize(offset + size, fill);
        return offset;
    }

    std::size_t add_scalar(const std::string& name, double value) {
        return add(name, 1, value);
    }

    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    [[nodiscard]] std::span<const double> view(std::size_t offset, std::size_t size) const {
        if (offset + size > values_.size()) {
            throw std::out_of_range("parameter view out of range");
        }
        return {values_.data() + offset, size};
    }
    [[nodiscard]] std::span<double> view(std::size_t offset, std::size_t size) {
        if (offset + size > values_.size()) {
            throw std::out_of_range("parameter view out of range");
        }
        return {values_.data() + offset, size};
    }

    [[nodiscard]] const Slice& slice(const std::string& name) const {
        for (const auto& s : slices_) {
            if (s.name == name) return s;
        }
        throw std::out_of_range("no parameter slice named " + name);
    }
    [[nodiscard]] bool has_slice(const std::string& name) const {
        for (const auto& s : slices_) {
            if (s.name == name) return true;
        }
        return false;
    }
    [[nodiscard]] const std::vector<Slice>& slices() const { return slices_; }

    /// Copy of all values, in layout order.
    [[nodiscard]] std::vector<double> flatten() const { return values_; }

    /// Overwrite all values from a flat vector of matching length.
    void unflatten(std::span<const double> flat) {
        if (flat.size() != values_.size()) {
            throw std::invalid_argument("flat parameter vector has wrong length");
        }
        values_.assign(flat.begin(), flat.end());
    }

    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    std::vector<double> values_;
    std::vector<Slice> slices_;
};

}  // namespace podinn
