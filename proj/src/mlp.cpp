#include "podinn/mlp.hpp"

#include <cmath>

namespace podinn {

Mlp Mlp::create(ParamSet& params, const std::string& name, int in,
                const std::vector<int>& hidden, int out, DrawStream& rng, Activation act) {
    Mlp net;
    net.activation = act;
    net.in = in;
    net.out = out;
    std::vector<int> dims;
    dims.push_back(in);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(out);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int rows = dims[l + 1];
        const int cols = dims[l];
        ad::AffineRef ref;
        ref.rows = rows;
        ref.cols = cols;
        const std::string tag = name + ".L" + std::to_string(l);
        ref.w = params.add(tag + ".w", static_cast<std::size_t>(rows) * cols);
        ref.b = params.add(tag + ".b", static_cast<std::size_t>(rows));
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        auto w = params.view(ref.w, static_cast<std::size_t>(rows) * cols);
        for (auto& v : w) v = rng.uniform(-bound, bound);
        auto b = params.view(ref.b, static_cast<std::size_t>(rows));
        for (auto& v : b) v = rng.uniform(-bound, bound);
        net.layers.push_back(ref);
    }
    return net;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::size_t>(l.rows) * l.cols + l.rows;
    }
    return n;
}

}  // namespace podinn
