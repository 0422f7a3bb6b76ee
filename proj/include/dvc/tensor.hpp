#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvc {

// Dense float tensor, row-major, up to 4 dims. Storage is shared between
// copies; clone() makes it private. Shapes use (C,H,W) order for images and
// feature grids, channel 0 of a flow field is horizontal displacement.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        int64_t n = 1;
        for (int d : shape_) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dim");
            n *= d;
        }
        numel_ = n;
        data_ = std::make_shared<std::vector<float>>(static_cast<size_t>(n), 0.0f);
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int> shape, float v) {
        Tensor t(std::move(shape));
        for (auto& x : *t.data_) x = v;
        return t;
    }

    static Tensor from(std::vector<int> shape, std::vector<float> values) {
        Tensor t(std::move(shape));
        if (static_cast<int64_t>(values.size()) != t.numel_)
            throw std::invalid_argument("Tensor::from: size mismatch");
        *t.data_ = std::move(values);
        return t;
    }

    bool defined() const { return data_ != nullptr; }
    int64_t numel() const { return numel_; }
    const std::vector<int>& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

    float* data() { return data_->data(); }
    const float* data() const { return data_->data(); }

    float& at(int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
    float at(int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

    // 3D accessor (C,H,W)
    float& operator()(int c, int y, int x) {
        return (*data_)[static_cast<size_t>((static_cast<int64_t>(c) * shape_[1] + y) * shape_[2] + x)];
    }
    float operator()(int c, int y, int x) const {
        return (*data_)[static_cast<size_t>((static_cast<int64_t>(c) * shape_[1] + y) * shape_[2] + x)];
    }
    // 2D accessor
    float& operator()(int i, int j) {
        return (*data_)[static_cast<size_t>(static_cast<int64_t>(i) * shape_[1] + j)];
    }
    float operator()(int i, int j) const {
        return (*data_)[static_cast<size_t>(static_cast<int64_t>(i) * shape_[1] + j)];
    }

    Tensor clone() const {
        Tensor t;
        t.shape_ = shape_;
        t.numel_ = numel_;
        t.data_ = std::make_shared<std::vector<float>>(*data_);
        return t;
    }

    // Same storage, new shape (numel must match).
    Tensor reshaped(std::vector<int> shape) const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        if (n != numel_) throw std::invalid_argument("Tensor::reshaped: numel mismatch");
        Tensor t;
        t.shape_ = std::move(shape);
        t.numel_ = numel_;
        t.data_ = data_;
        return t;
    }

    void fill(float v) {
        for (auto& x : *data_) x = v;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shape_str() const;

private:
    std::shared_ptr<std::vector<float>> data_;
    std::vector<int> shape_;
    int64_t numel_ = 0;
};

// Deterministic RNG used everywhere (seeded mt19937_64 plus fixed transforms,
// so runs reproduce across stdlib versions).
class Rng {
public:
    explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed ? seed : 1) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0, u2 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    void fill_uniform(Tensor& t, float lo, float hi) {
        float* p = t.data();
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = static_cast<float>(uniform(lo, hi));
    }

    void fill_normal(Tensor& t, float mean, float stddev) {
        float* p = t.data();
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = static_cast<float>(mean + stddev * normal());
    }

private:
    uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace dvc
