#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dvc/tensor.hpp"

namespace dvc::ag {

// Reverse-mode autodiff over a dynamically built DAG. Nodes own their value;
// gradients are allocated on demand during backward(). Leaves created with
// param_leaf() share value/grad storage with an optimizer-side parameter, so
// backward() accumulates straight into it.
struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad() {
        if (!grad.defined()) grad = Tensor::zeros(value.shape());
        return grad;
    }
};

using Var = std::shared_ptr<Node>;

Var leaf(Tensor value, bool requires_grad = false);
Var param_leaf(const Tensor& value, const Tensor& grad);
Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Backpropagate from a scalar node (seeds its grad with 1).
void backward(const Var& root);

inline const Tensor& val(const Var& v) { return v->value; }
inline float scalar(const Var& v) { return v->value.at(0); }

// ---- elementwise / reduction ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var relu(const Var& x);
Var sum(const Var& x);
Var mse(const Var& a, const Var& b);  // mean squared error, scalar
Var add_const(const Var& x, const Tensor& c);
Var detach(const Var& x);

// ---- shape / structure ----
Var concat_channels(const std::vector<Var>& xs);

// ---- conv / resampling ----
// x: [Cin,H,W], w: [Cout,Cin,kh,kw], b: [Cout]
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
// x: [Cin,H,W], w: [Cin,Cout,kh,kw], b: [Cout]; out spatial = stride*in + ...
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad);
Var avg_pool2(const Var& x);
// Bilinear 2x upsample (half-pixel grid); value_scale multiplies samples
// (flow fields pass 2 so displacements stay in output-resolution pixels).
Var upsample2_bilinear(const Var& x, float value_scale = 1.0f);
// Backward warp via bilinear sampling, border clamped.
// src: [C,H,W], flow: [2,H,W] (channel 0 = dx, channel 1 = dy).
Var warp(const Var& src, const Var& flow);

// Divisive normalization: y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
// (inverse=false) or y_i = x_i * sqrt(...) (inverse=true).
// x: [C,H,W], beta: [C], gamma: [C,C].
Var gdn(const Var& x, const Var& beta, const Var& gamma, bool inverse);

// ---- plain tensor helpers (no graph) ----
Tensor warp_tensor(const Tensor& src, const Tensor& flow);
Tensor avg_pool2_tensor(const Tensor& x);
Tensor upsample2_bilinear_tensor(const Tensor& x, float value_scale = 1.0f);
Tensor clamp01(const Tensor& x);
Tensor round_half_away(const Tensor& x);

}  // namespace dvc::ag
