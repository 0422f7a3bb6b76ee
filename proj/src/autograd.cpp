#include "dvc/autograd.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "dvc/kernels.hpp"

namespace dvc::ag {

namespace {

void check(bool cond, const char* msg) {
    if (!cond) throw std::runtime_error(msg);
}

// im2col/col2im with explicit output grid. cols is [(C*kh*kw) x (oh*ow)].
void im2col(const float* x, int C, int H, int W, int kh, int kw, int stride, int pad,
            int oh, int ow, float* cols) {
    const int64_t plane = static_cast<int64_t>(oh) * ow;
#pragma omp parallel for schedule(static)
    for (int r = 0; r < C * kh * kw; ++r) {
        const int c = r / (kh * kw);
        const int ky = (r / kw) % kh;
        const int kx = r % kw;
        const float* src = x + static_cast<int64_t>(c) * H * W;
        float* dst = cols + static_cast<int64_t>(r) * plane;
        for (int i = 0; i < oh; ++i) {
            const int y = i * stride + ky - pad;
            if (y < 0 || y >= H) {
                std::memset(dst + static_cast<int64_t>(i) * ow, 0, sizeof(float) * ow);
                continue;
            }
            const float* srow = src + static_cast<int64_t>(y) * W;
            float* drow = dst + static_cast<int64_t>(i) * ow;
            for (int j = 0; j < ow; ++j) {
                const int xx = j * stride + kx - pad;
                drow[j] = (xx >= 0 && xx < W) ? srow[xx] : 0.0f;
            }
        }
    }
}

// Adjoint of im2col: accumulates into x.
void col2im(const float* cols, int C, int H, int W, int kh, int kw, int stride, int pad,
            int oh, int ow, float* x) {
    const int64_t plane = static_cast<int64_t>(oh) * ow;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        float* dst = x + static_cast<int64_t>(c) * H * W;
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                const int r = (c * kh + ky) * kw + kx;
                const float* src = cols + static_cast<int64_t>(r) * plane;
                for (int i = 0; i < oh; ++i) {
                    const int y = i * stride + ky - pad;
                    if (y < 0 || y >= H) continue;
                    float* drow = dst + static_cast<int64_t>(y) * W;
                    const float* srow = src + static_cast<int64_t>(i) * ow;
                    for (int j = 0; j < ow; ++j) {
                        const int xx = j * stride + kx - pad;
                        if (xx >= 0 && xx < W) drow[xx] += srow[j];
                    }
                }
            }
        }
    }
}

void add_bias_rows(float* y, const float* b, int C, int64_t plane) {
    for (int c = 0; c < C; ++c) {
        const float bc = b[c];
        float* row = y + c * plane;
        for (int64_t i = 0; i < plane; ++i) row[i] += bc;
    }
}

void bias_grad(const float* dy, float* db, int C, int64_t plane) {
    for (int c = 0; c < C; ++c) db[c] += static_cast<float>(kern::ops().sum(dy + c * plane, plane));
}

}  // namespace

Var leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

Var param_leaf(const Tensor& value, const Tensor& grad) {
    auto n = std::make_shared<Node>();
    n->value = value;  // shares storage
    n->grad = grad;    // shares storage
    n->requires_grad = true;
    return n;
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) n->backward_fn = std::move(backward_fn);
    return n;
}

void backward(const Var& root) {
    check(root->value.numel() == 1, "backward: root must be scalar");
    // iterative post-order DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->ensure_grad().fill(1.0f);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && n->grad.defined()) n->backward_fn(*n);
    }
}

// ---------------- elementwise ----------------

Var add(const Var& a, const Var& b) {
    check(a->value.same_shape(b->value), "add: shape mismatch");
    Tensor y(a->value.shape());
    kern::ops().add(a->value.data(), b->value.data(), y.data(), y.numel());
    return make_node(std::move(y), {a, b}, [](Node& n) {
        const auto& g = n.grad;
        for (int i = 0; i < 2; ++i)
            if (n.parents[i]->requires_grad)
                kern::ops().axpy(1.0f, g.data(), n.parents[i]->ensure_grad().data(), g.numel());
    });
}

Var sub(const Var& a, const Var& b) {
    check(a->value.same_shape(b->value), "sub: shape mismatch");
    Tensor y(a->value.shape());
    kern::ops().sub(a->value.data(), b->value.data(), y.data(), y.numel());
    return make_node(std::move(y), {a, b}, [](Node& n) {
        const auto& g = n.grad;
        if (n.parents[0]->requires_grad)
            kern::ops().axpy(1.0f, g.data(), n.parents[0]->ensure_grad().data(), g.numel());
        if (n.parents[1]->requires_grad)
            kern::ops().axpy(-1.0f, g.data(), n.parents[1]->ensure_grad().data(), g.numel());
    });
}

Var mul(const Var& a, const Var& b) {
    check(a->value.same_shape(b->value), "mul: shape mismatch");
    Tensor y(a->value.shape());
    kern::ops().mul(a->value.data(), b->value.data(), y.data(), y.numel());
    return make_node(std::move(y), {a, b}, [](Node& n) {
        const auto& g = n.grad;
        const int64_t m = g.numel();
        if (n.parents[0]->requires_grad) {
            float* da = n.parents[0]->ensure_grad().data();
            const float* bv = n.parents[1]->value.data();
            const float* gp = g.data();
            for (int64_t i = 0; i < m; ++i) da[i] += gp[i] * bv[i];
        }
        if (n.parents[1]->requires_grad) {
            float* db = n.parents[1]->ensure_grad().data();
            const float* av = n.parents[0]->value.data();
            const float* gp = g.data();
            for (int64_t i = 0; i < m; ++i) db[i] += gp[i] * av[i];
        }
    });
}

Var scale(const Var& a, float s) {
    Tensor y(a->value.shape());
    kern::ops().scale(s, a->value.data(), y.data(), y.numel());
    return make_node(std::move(y), {a}, [s](Node& n) {
        if (n.parents[0]->requires_grad)
            kern::ops().axpy(s, n.grad.data(), n.parents[0]->ensure_grad().data(), n.grad.numel());
    });
}

Var relu(const Var& x) {
    Tensor y(x->value.shape());
    kern::ops().relu(x->value.data(), y.data(), y.numel());
    return make_node(std::move(y), {x}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        kern::ops().relu_bwd(n.parents[0]->value.data(), n.grad.data(),
                             n.parents[0]->ensure_grad().data(), n.grad.numel());
    });
}

Var sum(const Var& x) {
    Tensor y({1});
    y.at(0) = static_cast<float>(kern::ops().sum(x->value.data(), x->value.numel()));
    return make_node(std::move(y), {x}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        const float g = n.grad.at(0);
        float* dx = n.parents[0]->ensure_grad().data();
        const int64_t m = n.parents[0]->value.numel();
        for (int64_t i = 0; i < m; ++i) dx[i] += g;
    });
}

Var mse(const Var& a, const Var& b) {
    check(a->value.same_shape(b->value), "mse: shape mismatch");
    const int64_t m = a->value.numel();
    Tensor y({1});
    y.at(0) = static_cast<float>(kern::ops().sum_sq_diff(a->value.data(), b->value.data(), m) /
                                 static_cast<double>(m));
    return make_node(std::move(y), {a, b}, [m](Node& n) {
        const float g = n.grad.at(0) * 2.0f / static_cast<float>(m);
        const float* av = n.parents[0]->value.data();
        const float* bv = n.parents[1]->value.data();
        if (n.parents[0]->requires_grad) {
            float* da = n.parents[0]->ensure_grad().data();
            for (int64_t i = 0; i < m; ++i) da[i] += g * (av[i] - bv[i]);
        }
        if (n.parents[1]->requires_grad) {
            float* db = n.parents[1]->ensure_grad().data();
            for (int64_t i = 0; i < m; ++i) db[i] -= g * (av[i] - bv[i]);
        }
    });
}

Var add_const(const Var& x, const Tensor& c) {
    check(x->value.same_shape(c), "add_const: shape mismatch");
    Tensor y(x->value.shape());
    kern::ops().add(x->value.data(), c.data(), y.data(), y.numel());
    return make_node(std::move(y), {x}, [](Node& n) {
        if (n.parents[0]->requires_grad)
            kern::ops().axpy(1.0f, n.grad.data(), n.parents[0]->ensure_grad().data(), n.grad.numel());
    });
}

Var detach(const Var& x) { return leaf(x->value, false); }

Var concat_channels(const std::vector<Var>& xs) {
    check(!xs.empty(), "concat: empty");
    const int H = xs[0]->value.dim(1), W = xs[0]->value.dim(2);
    int C = 0;
    for (const auto& x : xs) {
        check(x->value.ndim() == 3 && x->value.dim(1) == H && x->value.dim(2) == W,
              "concat: spatial mismatch");
        C += x->value.dim(0);
    }
    Tensor y({C, H, W});
    const int64_t plane = static_cast<int64_t>(H) * W;
    int64_t off = 0;
    for (const auto& x : xs) {
        std::memcpy(y.data() + off, x->value.data(), sizeof(float) * x->value.numel());
        off += x->value.numel();
    }
    std::vector<Var> parents(xs.begin(), xs.end());
    return make_node(std::move(y), std::move(parents), [plane](Node& n) {
        int64_t off2 = 0;
        for (auto& p : n.parents) {
            const int64_t m = p->value.numel();
            if (p->requires_grad)
                kern::ops().axpy(1.0f, n.grad.data() + off2, p->ensure_grad().data(), m);
            off2 += m;
        }
    });
}

// ---------------- convolution ----------------

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    check(xs.size() == 3 && ws.size() == 4, "conv2d: bad ranks");
    const int Cin = xs[0], H = xs[1], W = xs[2];
    const int Cout = ws[0], kh = ws[2], kw = ws[3];
    check(ws[1] == Cin, "conv2d: channel mismatch");
    const int oh = (H + 2 * pad - kh) / stride + 1;
    const int ow = (W + 2 * pad - kw) / stride + 1;
    check(oh > 0 && ow > 0, "conv2d: empty output");
    const int K = Cin * kh * kw;
    const int64_t plane = static_cast<int64_t>(oh) * ow;

    Tensor cols({K, static_cast<int>(plane)});
    im2col(x->value.data(), Cin, H, W, kh, kw, stride, pad, oh, ow, cols.data());
    Tensor y({Cout, oh, ow});
    kern::ops().gemm(Cout, K, static_cast<int>(plane), w->value.data(), cols.data(), y.data(), false);
    add_bias_rows(y.data(), b->value.data(), Cout, plane);

    const int stride_ = stride, pad_ = pad;
    return make_node(std::move(y), {x, w, b},
                     [Cin, H, W, Cout, kh, kw, oh, ow, K, plane, stride_, pad_](Node& n) {
        const Var& xp = n.parents[0];
        const Var& wp = n.parents[1];
        const Var& bp = n.parents[2];
        const float* dy = n.grad.data();
        if (bp->requires_grad) bias_grad(dy, bp->ensure_grad().data(), Cout, plane);
        if (wp->requires_grad) {
            Tensor cols({K, static_cast<int>(plane)});
            im2col(xp->value.data(), Cin, H, W, kh, kw, stride_, pad_, oh, ow, cols.data());
            kern::ops().gemm_nt(Cout, static_cast<int>(plane), K, dy, cols.data(),
                                wp->ensure_grad().data(), true);
        }
        if (xp->requires_grad) {
            Tensor dcols({K, static_cast<int>(plane)});
            kern::ops().gemm_tn(K, Cout, static_cast<int>(plane), wp->value.data(), dy,
                                dcols.data(), false);
            col2im(dcols.data(), Cin, H, W, kh, kw, stride_, pad_, oh, ow,
                   xp->ensure_grad().data());
        }
    });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad) {
    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    check(xs.size() == 3 && ws.size() == 4, "conv_transpose2d: bad ranks");
    const int Cin = xs[0], H = xs[1], W = xs[2];
    check(ws[0] == Cin, "conv_transpose2d: channel mismatch");
    const int Cout = ws[1], kh = ws[2], kw = ws[3];
    const int oh = (H - 1) * stride - 2 * pad + kh + out_pad;
    const int ow = (W - 1) * stride - 2 * pad + kw + out_pad;
    const int K2 = Cout * kh * kw;
    const int64_t plane = static_cast<int64_t>(H) * W;

    Tensor cols({K2, static_cast<int>(plane)});
    // cols = W^T * x, with W as [Cin x K2]
    kern::ops().gemm_tn(K2, Cin, static_cast<int>(plane), w->value.data(), x->value.data(),
                        cols.data(), false);
    Tensor y({Cout, oh, ow});
    col2im(cols.data(), Cout, oh, ow, kh, kw, stride, pad, H, W, y.data());
    add_bias_rows(y.data(), b->value.data(), Cout, static_cast<int64_t>(oh) * ow);

    const int stride_ = stride, pad_ = pad;
    return make_node(std::move(y), {x, w, b},
                     [Cin, H, W, Cout, kh, kw, oh, ow, K2, plane, stride_, pad_](Node& n) {
        const Var& xp = n.parents[0];
        const Var& wp = n.parents[1];
        const Var& bp = n.parents[2];
        const float* dy = n.grad.data();
        if (bp->requires_grad)
            bias_grad(dy, bp->ensure_grad().data(), Cout, static_cast<int64_t>(oh) * ow);
        const bool need_w = wp->requires_grad, need_x = xp->requires_grad;
        if (!need_w && !need_x) return;
        Tensor dcols({K2, static_cast<int>(plane)});
        im2col(dy, Cout, oh, ow, kh, kw, stride_, pad_, H, W, dcols.data());
        if (need_w)
            kern::ops().gemm_nt(Cin, static_cast<int>(plane), K2, xp->value.data(), dcols.data(),
                                wp->ensure_grad().data(), true);
        if (need_x)
            kern::ops().gemm(Cin, K2, static_cast<int>(plane), wp->value.data(), dcols.data(),
                             xp->ensure_grad().data(), true);
    });
}

// ---------------- pooling / upsampling / warp ----------------

Tensor avg_pool2_tensor(const Tensor& x) {
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    if (H % 2 || W % 2) throw std::runtime_error("avg_pool2: odd dims");
    Tensor y({C, H / 2, W / 2});
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < H / 2; ++i) {
            for (int j = 0; j < W / 2; ++j) {
                const float s = x(c, 2 * i, 2 * j) + x(c, 2 * i, 2 * j + 1) +
                                x(c, 2 * i + 1, 2 * j) + x(c, 2 * i + 1, 2 * j + 1);
                y(c, i, j) = 0.25f * s;
            }
        }
    }
    return y;
}

Var avg_pool2(const Var& x) {
    Tensor y = avg_pool2_tensor(x->value);
    return make_node(std::move(y), {x}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& dx = n.parents[0]->ensure_grad();
        const int C = dx.dim(0), H = dx.dim(1), W = dx.dim(2);
        const Tensor& g = n.grad;
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < H / 2; ++i)
                for (int j = 0; j < W / 2; ++j) {
                    const float v = 0.25f * g(c, i, j);
                    dx(c, 2 * i, 2 * j) += v;
                    dx(c, 2 * i, 2 * j + 1) += v;
                    dx(c, 2 * i + 1, 2 * j) += v;
                    dx(c, 2 * i + 1, 2 * j + 1) += v;
                }
    });
}

namespace {
struct Lerp {
    int a, b;   // clamped source indices
    float fb;   // weight of b; weight of a is 1-fb
};
inline Lerp lerp_coeff(int out_idx, int in_size) {
    const float s = 0.5f * (static_cast<float>(out_idx) + 0.5f) - 0.5f;
    float f = std::floor(s);
    int i0 = static_cast<int>(f);
    float frac = s - f;
    int a = i0 < 0 ? 0 : (i0 >= in_size ? in_size - 1 : i0);
    int i1 = i0 + 1;
    int b = i1 < 0 ? 0 : (i1 >= in_size ? in_size - 1 : i1);
    return {a, b, frac};
}
}  // namespace

Tensor upsample2_bilinear_tensor(const Tensor& x, float value_scale) {
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int OH = 2 * H, OW = 2 * W;
    Tensor y({C, OH, OW});
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int oy = 0; oy < OH; ++oy) {
            const Lerp ly = lerp_coeff(oy, H);
            for (int ox = 0; ox < OW; ++ox) {
                const Lerp lx = lerp_coeff(ox, W);
                const float v = (1 - ly.fb) * ((1 - lx.fb) * x(c, ly.a, lx.a) + lx.fb * x(c, ly.a, lx.b)) +
                                ly.fb * ((1 - lx.fb) * x(c, ly.b, lx.a) + lx.fb * x(c, ly.b, lx.b));
                y(c, oy, ox) = value_scale * v;
            }
        }
    }
    return y;
}

Var upsample2_bilinear(const Var& x, float value_scale) {
    Tensor y = upsample2_bilinear_tensor(x->value, value_scale);
    return make_node(std::move(y), {x}, [value_scale](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& dx = n.parents[0]->ensure_grad();
        const int C = dx.dim(0), H = dx.dim(1), W = dx.dim(2);
        const Tensor& g = n.grad;
        for (int c = 0; c < C; ++c)
            for (int oy = 0; oy < 2 * H; ++oy) {
                const Lerp ly = lerp_coeff(oy, H);
                for (int ox = 0; ox < 2 * W; ++ox) {
                    const Lerp lx = lerp_coeff(ox, W);
                    const float gv = value_scale * g(c, oy, ox);
                    dx(c, ly.a, lx.a) += (1 - ly.fb) * (1 - lx.fb) * gv;
                    dx(c, ly.a, lx.b) += (1 - ly.fb) * lx.fb * gv;
                    dx(c, ly.b, lx.a) += ly.fb * (1 - lx.fb) * gv;
                    dx(c, ly.b, lx.b) += ly.fb * lx.fb * gv;
                }
            }
    });
}

namespace {
struct SampleCoeff {
    int x0, x1, y0, y1;
    float fx, fy;
    bool gx, gy;  // whether the coordinate is in the differentiable interior
};

inline SampleCoeff sample_coeff(float xs, float ys, int W, int H) {
    SampleCoeff s;
    s.gx = xs > 0.0f && xs < static_cast<float>(W - 1);
    s.gy = ys > 0.0f && ys < static_cast<float>(H - 1);
    float xc = xs < 0.0f ? 0.0f : (xs > static_cast<float>(W - 1) ? static_cast<float>(W - 1) : xs);
    float yc = ys < 0.0f ? 0.0f : (ys > static_cast<float>(H - 1) ? static_cast<float>(H - 1) : ys);
    const float xf = std::floor(xc), yf = std::floor(yc);
    s.fx = xc - xf;
    s.fy = yc - yf;
    s.x0 = static_cast<int>(xf);
    s.y0 = static_cast<int>(yf);
    s.x1 = s.x0 + 1 < W ? s.x0 + 1 : W - 1;
    s.y1 = s.y0 + 1 < H ? s.y0 + 1 : H - 1;
    return s;
}
}  // namespace

Tensor warp_tensor(const Tensor& src, const Tensor& flow) {
    const int C = src.dim(0), H = src.dim(1), W = src.dim(2);
    if (flow.dim(0) != 2 || flow.dim(1) != H || flow.dim(2) != W)
        throw std::runtime_error("warp: flow shape mismatch");
    Tensor y({C, H, W});
#pragma omp parallel for schedule(static)
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const SampleCoeff s = sample_coeff(static_cast<float>(j) + flow(0, i, j),
                                               static_cast<float>(i) + flow(1, i, j), W, H);
            for (int c = 0; c < C; ++c) {
                const float v00 = src(c, s.y0, s.x0), v01 = src(c, s.y0, s.x1);
                const float v10 = src(c, s.y1, s.x0), v11 = src(c, s.y1, s.x1);
                y(c, i, j) = (1 - s.fy) * ((1 - s.fx) * v00 + s.fx * v01) +
                             s.fy * ((1 - s.fx) * v10 + s.fx * v11);
            }
        }
    }
    return y;
}

Var warp(const Var& src, const Var& flow) {
    Tensor y = warp_tensor(src->value, flow->value);
    return make_node(std::move(y), {src, flow}, [](Node& n) {
        const Var& sp = n.parents[0];
        const Var& fp = n.parents[1];
        const Tensor& src = sp->value;
        const Tensor& flow = fp->value;
        const Tensor& g = n.grad;
        const int C = src.dim(0), H = src.dim(1), W = src.dim(2);
        const bool need_src = sp->requires_grad, need_flow = fp->requires_grad;
        if (!need_src && !need_flow) return;
        Tensor* ds = need_src ? &sp->ensure_grad() : nullptr;
        Tensor* df = need_flow ? &fp->ensure_grad() : nullptr;
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                const SampleCoeff s = sample_coeff(static_cast<float>(j) + flow(0, i, j),
                                                   static_cast<float>(i) + flow(1, i, j), W, H);
                float du = 0.0f, dv = 0.0f;
                for (int c = 0; c < C; ++c) {
                    const float gv = g(c, i, j);
                    if (gv == 0.0f) continue;
                    const float v00 = src(c, s.y0, s.x0), v01 = src(c, s.y0, s.x1);
                    const float v10 = src(c, s.y1, s.x0), v11 = src(c, s.y1, s.x1);
                    if (ds) {
                        (*ds)(c, s.y0, s.x0) += gv * (1 - s.fy) * (1 - s.fx);
                        (*ds)(c, s.y0, s.x1) += gv * (1 - s.fy) * s.fx;
                        (*ds)(c, s.y1, s.x0) += gv * s.fy * (1 - s.fx);
                        (*ds)(c, s.y1, s.x1) += gv * s.fy * s.fx;
                    }
                    if (df) {
                        du += gv * ((1 - s.fy) * (v01 - v00) + s.fy * (v11 - v10));
                        dv += gv * ((1 - s.fx) * (v10 - v00) + s.fx * (v11 - v01));
                    }
                }
                if (df) {
                    if (s.gx) (*df)(0, i, j) += du;
                    if (s.gy) (*df)(1, i, j) += dv;
                }
            }
        }
    });
}

// ---------------- divisive normalization ----------------

Var gdn(const Var& x, const Var& beta, const Var& gamma, bool inverse) {
    const int C = x->value.dim(0);
    check(beta->value.numel() == C && gamma->value.ndim() == 2 && gamma->value.dim(0) == C &&
              gamma->value.dim(1) == C,
          "gdn: parameter shape mismatch");
    const int64_t plane = x->value.numel() / C;
    Tensor x2(x->value.shape());
    kern::ops().mul(x->value.data(), x->value.data(), x2.data(), x2.numel());
    Tensor s(x->value.shape());
    kern::ops().gemm(C, C, static_cast<int>(plane), gamma->value.data(), x2.data(), s.data(), false);
    add_bias_rows(s.data(), beta->value.data(), C, plane);
    Tensor y(x->value.shape());
    if (inverse)
        kern::ops().mul_sqrt(x->value.data(), s.data(), y.data(), y.numel());
    else
        kern::ops().div_sqrt(x->value.data(), s.data(), y.data(), y.numel());

    // keep the normalizer for backward
    auto s_keep = std::make_shared<Tensor>(std::move(s));
    return make_node(std::move(y), {x, beta, gamma}, [s_keep, inverse, C, plane](Node& n) {
        const Var& xp = n.parents[0];
        const Var& bp = n.parents[1];
        const Var& gp = n.parents[2];
        const Tensor& s = *s_keep;
        const Tensor& g = n.grad;
        const Tensor& xv = xp->value;
        const int64_t m = xv.numel();

        // ds = dL/ds, and the direct x term
        Tensor ds(xv.shape());
        {
            const float* sv = s.data();
            const float* gv = g.data();
            const float* xd = xv.data();
            float* dsp = ds.data();
            float* dxp = xp->requires_grad ? xp->ensure_grad().data() : nullptr;
            for (int64_t i = 0; i < m; ++i) {
                const float rs = std::sqrt(sv[i]);
                if (inverse) {
                    if (dxp) dxp[i] += gv[i] * rs;
                    dsp[i] = 0.5f * gv[i] * xd[i] / rs;
                } else {
                    if (dxp) dxp[i] += gv[i] / rs;
                    dsp[i] = -0.5f * gv[i] * xd[i] / (sv[i] * rs);
                }
            }
        }
        if (bp->requires_grad) bias_grad(ds.data(), bp->ensure_grad().data(), C, plane);
        Tensor x2(xv.shape());
        kern::ops().mul(xv.data(), xv.data(), x2.data(), m);
        if (gp->requires_grad)
            kern::ops().gemm_nt(C, static_cast<int>(plane), C, ds.data(), x2.data(),
                                gp->ensure_grad().data(), true);
        if (xp->requires_grad) {
            Tensor t(xv.shape());
            kern::ops().gemm_tn(C, C, static_cast<int>(plane), gp->value.data(), ds.data(),
                                t.data(), false);
            float* dxp = xp->ensure_grad().data();
            const float* tv = t.data();
            const float* xd = xv.data();
            for (int64_t i = 0; i < m; ++i) dxp[i] += 2.0f * xd[i] * tv[i];
        }
    });
}

// ---------------- plain helpers ----------------

Tensor clamp01(const Tensor& x) {
    Tensor y = x.clone();
    float* p = y.data();
    for (int64_t i = 0; i < y.numel(); ++i) p[i] = p[i] < 0.0f ? 0.0f : (p[i] > 1.0f ? 1.0f : p[i]);
    return y;
}

Tensor round_half_away(const Tensor& x) {
    Tensor y(x.shape());
    const float* p = x.data();
    float* q = y.data();
    for (int64_t i = 0; i < x.numel(); ++i) q[i] = std::round(p[i]);  // round() is half-away-from-zero
    return y;
}

}  // namespace dvc::ag
