#pragma once

#include <string>
#include <vector>

#include "podinn/params.hpp"
#include "podinn/rng.hpp"
#include "podinn/tape.hpp"

namespace podinn {

enum class Activation { Tanh, Square };

/// Fully connected network held as slices of a ParamSet. Weights initialize
/// uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases likewise.
struct Mlp {
    std::vector<ad::AffineRef> layers;  ///< final layer is linear
    Activation activation = Activation::Tanh;
    int in = 0;
    int out = 0;

    static Mlp create(ParamSet& params, const std::string& name, int in,
                      const std::vector<int>& hidden, int out, DrawStream& rng,
                      Activation act = Activation::Tanh);

    /// Forward pass; returns a vector node of length `out`.
    template <class Ex>
    ad::NodeId forward(Ex& ex, ad::NodeId x) const {
        ad::NodeId h = x;
        for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
            ad::NodeId z = ex.affine(layers[l], h);
            h = activation == Activation::Tanh ? ex.tanh_(z) : ex.square(z);
        }
        return ex.affine(layers.back(), h);
    }

    /// Closed-form gradient of the scalar output w.r.t. the input, recorded
    /// as a chain of transposed-weight applications and activation-derivative
    /// scalings. One backward pass through this expression yields parameter
    /// gradients of any scalar built from it (no second-order tape needed).
    template <class Ex>
    ad::NodeId input_gradient(Ex& ex, ad::NodeId x) const {
        if (out != 1) throw std::invalid_argument("input_gradient: network output must be scalar");
        std::vector<ad::NodeId> pre;   // pre-activations per hidden layer
        std::vector<ad::NodeId> post;  // activations per hidden layer
        ad::NodeId h = x;
        for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
            ad::NodeId z = ex.affine(layers[l], h);
            pre.push_back(z);
            h = activation == Activation::Tanh ? ex.tanh_(z) : ex.square(z);
            post.push_back(h);
        }
        // Seed with the final linear layer's weight row: W_L^T * 1.
        ad::NodeId one = ex.constant(1.0);
        ad::NodeId g = ex.matvec_t(layers.back(), one);
        for (std::size_t l = layers.size() - 1; l-- > 0;) {
            ad::NodeId dact = activation == Activation::Tanh
                                  ? ex.one_minus_square(post[l])   // 1 - tanh^2(z)
                                  : ex.scale(pre[l], 2.0);         // d/dz z^2
            g = ex.matvec_t(layers[l], ex.mul(dact, g));
        }
        return g;
    }

    [[nodiscard]] std::size_t parameter_count() const;
};

}  // namespace podinn
