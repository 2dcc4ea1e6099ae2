#include "mecsim/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace mecsim {

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output");
    for (int w : widths_)
        if (w < 1) throw std::invalid_argument("Mlp: non-positive layer width");
    int total = 0;
    for (int l = 0; l + 1 < static_cast<int>(widths_.size()); ++l) {
        offsets_.push_back(total);
        total += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_ = Vec::Zero(total);
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
    return {params_.data() + offsets_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<const Vec> Mlp::bias(int layer) const {
    return {params_.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
            widths_[layer + 1]};
}

Eigen::Map<Mat> Mlp::weight_grad(Vec& g, int layer) const {
    return {g.data() + offsets_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<Vec> Mlp::bias_grad(Vec& g, int layer) const {
    return {g.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
            widths_[layer + 1]};
}

void Mlp::init(Rng& rng) {
    const int L = num_layers();
    for (int l = 0; l < L; ++l) {
        const int fan_in = widths_[l];
        const int rows = widths_[l + 1];
        double* w = params_.data() + offsets_[l];
        double* b = w + rows * fan_in;
        if (l + 1 < L) {
            const double limit = std::sqrt(6.0 / fan_in);
            for (int i = 0; i < rows * fan_in; ++i) w[i] = rng.uniform(-limit, limit);
            for (int i = 0; i < rows; ++i) b[i] = 0.0;
        } else {
            // small output layer keeps initial values and log-stds near zero
            for (int i = 0; i < rows * fan_in; ++i) w[i] = rng.uniform(-3e-3, 3e-3);
            for (int i = 0; i < rows; ++i) b[i] = rng.uniform(-3e-3, 3e-3);
        }
    }
}

Mat Mlp::forward(const Mat& x) const {
    Tape tape;
    return forward(x, tape);
}

Mat Mlp::forward(const Mat& x, Tape& tape) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("Mlp::forward: input dim mismatch");
    const int L = num_layers();
    tape.pre.resize(L);
    tape.post.resize(L + 1);
    tape.post[0] = x;
    for (int l = 0; l < L; ++l) {
        tape.pre[l] = (weight(l) * tape.post[l]).colwise() + bias(l);
        tape.post[l + 1] = (l + 1 < L) ? tape.pre[l].cwiseMax(0.0) : tape.pre[l];
    }
    return tape.post[L];
}

Mat Mlp::backward(const Tape& tape, const Mat& grad_out, Vec* param_grad,
                  bool want_input_grad) const {
    const int L = num_layers();
    if (grad_out.rows() != output_dim() || tape.post.size() != std::size_t(L + 1))
        throw std::invalid_argument("Mlp::backward: tape/gradient shape mismatch");
    if (param_grad && param_grad->size() != params_.size())
        throw std::invalid_argument("Mlp::backward: param_grad size mismatch");

    Mat delta = grad_out; // dL/d pre[L-1], output layer is linear
    for (int l = L - 1; l >= 0; --l) {
        if (param_grad) {
            weight_grad(*param_grad, l).noalias() += delta * tape.post[l].transpose();
            bias_grad(*param_grad, l).noalias() += delta.rowwise().sum();
        }
        if (l == 0) {
            if (want_input_grad) return weight(0).transpose() * delta;
            break;
        }
        delta = (weight(l).transpose() * delta)
                    .cwiseProduct((tape.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return {};
}

Optimizer Optimizer::sgd(double lr) {
    Optimizer o;
    o.kind_ = Kind::Sgd;
    o.lr_ = lr;
    return o;
}

Optimizer Optimizer::adam(double lr, double beta1, double beta2, double eps) {
    Optimizer o;
    o.kind_ = Kind::Adam;
    o.lr_ = lr;
    o.beta1_ = beta1;
    o.beta2_ = beta2;
    o.eps_ = eps;
    return o;
}

void Optimizer::step(Vec& params, const Vec& grad) {
    if (kind_ == Kind::Sgd) {
        params -= lr_ * grad;
        return;
    }
    if (m_.size() != params.size()) {
        m_ = Vec::Zero(params.size());
        v_ = Vec::Zero(params.size());
        t_ = 0;
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, double(t_));
    const double c2 = 1.0 - std::pow(beta2_, double(t_));
    params.array() -=
        lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

} // namespace mecsim
