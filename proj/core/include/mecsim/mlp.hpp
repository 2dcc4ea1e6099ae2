#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mecsim/rng.hpp"

namespace mecsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Fully connected network with ReLU hidden layers and a linear output.
/// Samples are matrix columns. All parameters live in a single flat vector
/// so optimizers, target averaging, and finite-difference probes treat every
/// network the same way.
class Mlp {
  public:
    /// widths = {input, hidden..., output}; at least one layer.
    explicit Mlp(std::vector<int> widths);

    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }
    int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
    int param_count() const { return static_cast<int>(params_.size()); }

    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    /// He-uniform weights on hidden layers (zero bias); small uniform
    /// weights and biases on the output layer.
    void init(Rng& rng);

    /// x is input_dim x batch; returns output_dim x batch.
    Mat forward(const Mat& x) const;

    /// Activation record of one forward pass, consumed by backward().
    struct Tape {
        std::vector<Mat> pre;  // pre-activation of each layer
        std::vector<Mat> post; // post[l] is the input of layer l; post[0] = x
    };

    Mat forward(const Mat& x, Tape& tape) const;

    /// Reverse pass from dL/dy (output_dim x batch). Accumulates parameter
    /// gradients into `param_grad` when non-null (must be zeroed by the
    /// caller beforehand if accumulation is not wanted) and returns dL/dx
    /// when `want_input_grad` is set, otherwise an empty matrix.
    Mat backward(const Tape& tape, const Mat& grad_out, Vec* param_grad,
                 bool want_input_grad = false) const;

    const std::vector<int>& widths() const { return widths_; }

  private:
    // Per-layer views into the flat vector: W (out x in, column-major)
    // followed by b (out).
    Eigen::Map<const Mat> weight(int layer) const;
    Eigen::Map<const Vec> bias(int layer) const;
    Eigen::Map<Mat> weight_grad(Vec& g, int layer) const;
    Eigen::Map<Vec> bias_grad(Vec& g, int layer) const;

    std::vector<int> widths_;
    std::vector<int> offsets_; // flat offset of each layer's W block
    Vec params_;
};

/// Flat-vector gradient step. SGD is stateless; Adam keeps first/second
/// moments sized on first use.
class Optimizer {
  public:
    static Optimizer sgd(double lr);
    static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                          double eps = 1e-8);

    void step(Vec& params, const Vec& grad);
    double learning_rate() const { return lr_; }

    // checkpoint support
    const Vec& moment1() const { return m_; }
    const Vec& moment2() const { return v_; }
    std::int64_t steps() const { return t_; }
    void restore(Vec m, Vec v, std::int64_t t) {
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

  private:
    enum class Kind { Sgd, Adam };
    Kind kind_ = Kind::Sgd;
    double lr_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    Vec m_, v_;
    std::int64_t t_ = 0;
};

} // namespace mecsim
