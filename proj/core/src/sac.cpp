#include "mecsim/sac.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "mecsim/errors.hpp"

namespace mecsim {

void SacConfig::validate() const {
    if (hidden.empty()) throw ConfigError("SacConfig: need at least one hidden layer");
    for (int h : hidden)
        if (h < 1) throw ConfigError("SacConfig: non-positive hidden width");
    if (!(lr > 0) || !(lr_alpha > 0)) throw ConfigError("SacConfig: learning rates must be positive");
    if (!(target_smoothing > 0) || target_smoothing > 1)
        throw ConfigError("SacConfig: target_smoothing outside (0,1]");
    if (target_update_every < 1 || update_every < 1 || updates_per_step < 1)
        throw ConfigError("SacConfig: cadence fields must be >= 1");
    if (batch_size < 1) throw ConfigError("SacConfig: batch_size must be >= 1");
    if (buffer_capacity < static_cast<std::size_t>(batch_size))
        throw ConfigError("SacConfig: buffer smaller than one batch");
    if (warmup_steps < 0) throw ConfigError("SacConfig: warmup_steps must be >= 0");
    if (!(log_std_min < log_std_max)) throw ConfigError("SacConfig: log_std bounds inverted");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("SacConfig: optimizer must be adam or sgd");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[cursor_] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

void ReplayBuffer::restore(std::vector<Transition> data, std::size_t cursor) {
    if (data.size() > capacity_ || (data.size() == capacity_ && cursor >= capacity_) ||
        (data.size() < capacity_ && cursor != 0))
        throw TrainingError("ReplayBuffer::restore: inconsistent size/cursor");
    data_ = std::move(data);
    cursor_ = cursor;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
    if (batch < 1 || static_cast<std::size_t>(batch) > data_.size())
        throw TrainingError("ReplayBuffer: batch larger than stored transitions");
    // Floyd's sampling: k distinct uniform indices in O(k).
    const std::size_t n = data_.size();
    std::vector<std::size_t> out;
    out.reserve(batch);
    std::unordered_set<std::size_t> seen;
    for (std::size_t j = n - batch; j < n; ++j) {
        const std::size_t t = rng.uniform_index(j + 1);
        if (seen.insert(t).second)
            out.push_back(t);
        else {
            seen.insert(j);
            out.push_back(j);
        }
    }
    return out;
}

Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw TrainingError("make_batch: empty index list");
    const Transition& first = buffer.at(indices[0]);
    const int xdim = static_cast<int>(first.state.size());
    const int adim = static_cast<int>(first.action.size());
    const int B = static_cast<int>(indices.size());
    Batch b{Mat(xdim, B), Mat(adim, B), Vec(B), Mat(xdim, B)};
    for (int c = 0; c < B; ++c) {
        const Transition& t = buffer.at(indices[c]);
        for (int i = 0; i < xdim; ++i) {
            b.states(i, c) = t.state[i];
            b.next_states(i, c) = t.next_state[i];
        }
        for (int i = 0; i < adim; ++i) b.actions(i, c) = t.action[i];
        b.rewards(c) = t.reward;
    }
    return b;
}

namespace {

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> w;
    w.push_back(in);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

Mat stack_rows(const Mat& top, const Mat& bottom) {
    Mat m(top.rows() + bottom.rows(), top.cols());
    m.topRows(top.rows()) = top;
    m.bottomRows(bottom.rows()) = bottom;
    return m;
}

constexpr double kHalfLog2Pi = 0.9189385332046727; // log(2*pi)/2

/// Forward pass of the squashed-Gaussian head with everything the losses
/// need for their reverse passes.
struct PolicyForward {
    Mlp::Tape tape;
    Mat mu, rho, sigma, U, a;
    Mat clamp_mask; // 1 where the raw log-std lies strictly inside its bounds
    const Mat* eps = nullptr;
    Vec log_probs;
};

PolicyForward run_policy(const Mlp& policy, const Mat& states, const Mat& noise,
                         const SacConfig& cfg) {
    PolicyForward fw;
    const Mat out = policy.forward(states, fw.tape);
    const int A = static_cast<int>(out.rows()) / 2;
    if (noise.rows() != A || noise.cols() != states.cols())
        throw TrainingError("policy_sample: noise shape mismatch");
    fw.mu = out.topRows(A);
    const Mat rho_raw = out.bottomRows(A);
    fw.rho = rho_raw.array().min(cfg.log_std_max).max(cfg.log_std_min).matrix();
    fw.clamp_mask = ((rho_raw.array() > cfg.log_std_min).cast<double>() *
                     (rho_raw.array() < cfg.log_std_max).cast<double>())
                        .matrix();
    fw.sigma = fw.rho.array().exp().matrix();
    fw.eps = &noise;
    fw.U = (fw.mu.array() + fw.sigma.array() * noise.array()).matrix();
    fw.a = fw.U.array().tanh().matrix();
    // log pi(a|x) = sum_i [ -eps_i^2/2 - rho_i - log(2pi)/2
    //                       - 2 log 2 + 2 U_i + 2 softplus(-2 U_i) ]
    // where the last three terms are -log(1 - tanh(U)^2) in stable form.
    const auto z = (-2.0 * fw.U.array());
    const auto softplus = z.max(0.0) + (-z.abs()).exp().log1p();
    const auto terms = -0.5 * noise.array().square() - fw.rho.array() - kHalfLog2Pi -
                       2.0 * std::log(2.0) + 2.0 * fw.U.array() + 2.0 * softplus;
    fw.log_probs = terms.colwise().sum().transpose();
    return fw;
}

/// Pushes gradients w.r.t. mu and (unclamped) log-std back into the policy
/// parameters.
void policy_backward(const Mlp& policy, const PolicyForward& fw, const Mat& gmu,
                     const Mat& grho, Vec* grad) {
    Mat gout(gmu.rows() * 2, gmu.cols());
    gout.topRows(gmu.rows()) = gmu;
    gout.bottomRows(grho.rows()) = grho.cwiseProduct(fw.clamp_mask);
    policy.backward(fw.tape, gout, grad);
}

Mat draw_noise(int rows, int cols, Rng& rng) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

Optimizer make_optimizer(const SacConfig& cfg, double lr) {
    return cfg.optimizer == "adam" ? Optimizer::adam(lr) : Optimizer::sgd(lr);
}

} // namespace

SacNets::SacNets(int num_tasks, const std::vector<int>& hidden)
    : value(widths(encoded_state_dim(num_tasks), hidden, 1)),
      target_value(widths(encoded_state_dim(num_tasks), hidden, 1)),
      q1(widths(encoded_state_dim(num_tasks) + raw_action_dim(num_tasks), hidden, 1)),
      q2(widths(encoded_state_dim(num_tasks) + raw_action_dim(num_tasks), hidden, 1)),
      policy(widths(encoded_state_dim(num_tasks), hidden, 2 * raw_action_dim(num_tasks))) {
    if (num_tasks < 1) throw ConfigError("SacNets: need at least one task");
}

void SacNets::init(Rng& rng) {
    value.init(rng);
    q1.init(rng);
    q2.init(rng);
    policy.init(rng);
    target_value.params() = value.params();
}

double SacNets::alpha() const { return std::exp(log_alpha); }

SquashedSample policy_sample(const Mlp& policy, const Mat& states, const Mat& noise,
                             const SacConfig& cfg) {
    PolicyForward fw = run_policy(policy, states, noise, cfg);
    return {std::move(fw.a), std::move(fw.log_probs)};
}

Mat policy_mean(const Mlp& policy, const Mat& states) {
    const Mat out = policy.forward(states);
    return out.topRows(out.rows() / 2).array().tanh().matrix();
}

double value_loss(const SacNets& nets, const Mat& states, const Mat& noise,
                  const SacConfig& cfg, Vec* grad) {
    const int B = static_cast<int>(states.cols());
    const PolicyForward fw = run_policy(nets.policy, states, noise, cfg);
    const Mat input = stack_rows(states, fw.a);
    const Mat qmin = nets.q1.forward(input).cwiseMin(nets.q2.forward(input));
    const Mat target = qmin - nets.alpha() * fw.log_probs.transpose(); // 1 x B
    Mlp::Tape tape;
    const Mat v = nets.value.forward(states, tape);
    const Mat resid = v - target;
    const double loss = 0.5 * resid.squaredNorm() / B;
    if (grad) nets.value.backward(tape, resid / B, grad);
    return loss;
}

double q_loss(const Mlp& q, const Mlp& target_value, const Batch& batch, double discount,
              Vec* grad) {
    const int B = batch.size();
    const Mat vbar = target_value.forward(batch.next_states); // 1 x B
    const Mat y = batch.rewards.transpose() + discount * vbar;
    Mlp::Tape tape;
    const Mat qv = q.forward(stack_rows(batch.states, batch.actions), tape);
    const Mat resid = qv - y;
    const double loss = 0.5 * resid.squaredNorm() / B;
    if (grad) q.backward(tape, resid / B, grad);
    return loss;
}

double policy_loss(const SacNets& nets, const Mat& states, const Mat& noise,
                   const SacConfig& cfg, Vec* grad, Vec* log_probs_out) {
    const int B = static_cast<int>(states.cols());
    const int A = static_cast<int>(noise.rows());
    const PolicyForward fw = run_policy(nets.policy, states, noise, cfg);
    const Mat input = stack_rows(states, fw.a);
    Mlp::Tape t1, t2;
    const Mat q1 = nets.q1.forward(input, t1);
    const Mat q2 = nets.q2.forward(input, t2);
    const double alpha = nets.alpha();

    Mat sel1 = Mat::Zero(1, B), sel2 = Mat::Zero(1, B);
    double qmin_sum = 0.0;
    for (int b = 0; b < B; ++b) {
        if (q1(0, b) <= q2(0, b)) {
            sel1(0, b) = 1.0;
            qmin_sum += q1(0, b);
        } else {
            sel2(0, b) = 1.0;
            qmin_sum += q2(0, b);
        }
    }
    const double loss = (alpha * fw.log_probs.sum() - qmin_sum) / B;
    if (log_probs_out) *log_probs_out = fw.log_probs;
    if (grad) {
        // dQmin/da through whichever net won the min, per sample.
        Mat ga = nets.q1.backward(t1, sel1, nullptr, true).bottomRows(A);
        ga += nets.q2.backward(t2, sel2, nullptr, true).bottomRows(A);
        const auto one_minus_a2 = 1.0 - fw.a.array().square();
        const auto se = fw.sigma.array() * fw.eps->array();
        // d log pi / d mu = 2 a;  d log pi / d rho = -1 + 2 a sigma eps;
        // the Q path enters through a = tanh(U), dU/dmu = 1, dU/drho = sigma eps.
        const Mat gmu =
            ((alpha * 2.0 * fw.a.array() - ga.array() * one_minus_a2) / B).matrix();
        const Mat grho =
            ((alpha * (-1.0 + 2.0 * fw.a.array() * se) - ga.array() * one_minus_a2 * se) / B)
                .matrix();
        policy_backward(nets.policy, fw, gmu, grho, grad);
    }
    return loss;
}

double temperature_objective(double log_alpha, const Vec& log_probs, double target_entropy,
                             double* grad) {
    const double drift = log_probs.mean() + target_entropy; // mean(log pi) - (-H)
    if (grad) *grad = -drift;
    return -log_alpha * drift;
}

void target_update(const Vec& online, Vec& target, double xi) {
    target = xi * online + (1.0 - xi) * target;
}

SacAgent::SacAgent(int num_tasks, SacConfig cfg, std::uint64_t seed)
    : num_tasks_(num_tasks), cfg_(std::move(cfg)), nets_(num_tasks, cfg_.hidden),
      buffer_(cfg_.buffer_capacity), action_rng_(derive_seed(seed, 1)),
      batch_rng_(derive_seed(seed, 2)), opt_value_(make_optimizer(cfg_, cfg_.lr)),
      opt_q1_(make_optimizer(cfg_, cfg_.lr)), opt_q2_(make_optimizer(cfg_, cfg_.lr)),
      opt_policy_(make_optimizer(cfg_, cfg_.lr)), opt_alpha_(make_optimizer(cfg_, cfg_.lr_alpha)),
      target_entropy_(cfg_.target_entropy.value_or(-double(raw_action_dim(num_tasks)))) {
    cfg_.validate();
    nets_.log_alpha = cfg_.init_log_alpha;
    Rng init_rng(derive_seed(seed, 0));
    nets_.init(init_rng);
}

RawAction SacAgent::act(const EncodedState& state) {
    const int A = raw_action_dim(num_tasks_);
    RawAction raw(A);
    if (steps_ < cfg_.warmup_steps) {
        for (double& v : raw) v = action_rng_.uniform(-1.0, 1.0);
        return raw;
    }
    const Eigen::Map<const Vec> x(state.data(), static_cast<Eigen::Index>(state.size()));
    const Mat noise = draw_noise(A, 1, action_rng_);
    const SquashedSample s = policy_sample(nets_.policy, x, noise, cfg_);
    for (int i = 0; i < A; ++i) raw[i] = s.actions(i, 0);
    return raw;
}

RawAction SacAgent::act_mean(const EncodedState& state) const {
    const int A = raw_action_dim(num_tasks_);
    const Eigen::Map<const Vec> x(state.data(), static_cast<Eigen::Index>(state.size()));
    const Mat a = policy_mean(nets_.policy, x);
    RawAction raw(A);
    for (int i = 0; i < A; ++i) raw[i] = a(i, 0);
    return raw;
}

void SacAgent::observe(Transition t) {
    buffer_.push(std::move(t));
    ++steps_;
}

bool SacAgent::can_update() const {
    return steps_ >= cfg_.warmup_steps &&
           buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size);
}

UpdateStats SacAgent::update() {
    if (!can_update()) throw TrainingError("SacAgent::update called before warmup/buffer fill");
    const auto indices = buffer_.sample_indices(cfg_.batch_size, batch_rng_);
    const Batch batch = make_batch(buffer_, indices);
    const int A = raw_action_dim(num_tasks_);
    const int B = batch.size();
    UpdateStats st;

    Vec gv = Vec::Zero(nets_.value.param_count());
    st.value_loss = value_loss(nets_, batch.states, draw_noise(A, B, batch_rng_), cfg_, &gv);
    opt_value_.step(nets_.value.params(), gv);

    Vec g1 = Vec::Zero(nets_.q1.param_count());
    st.q1_loss = q_loss(nets_.q1, nets_.target_value, batch, cfg_.discount, &g1);
    Vec g2 = Vec::Zero(nets_.q2.param_count());
    st.q2_loss = q_loss(nets_.q2, nets_.target_value, batch, cfg_.discount, &g2);
    opt_q1_.step(nets_.q1.params(), g1);
    opt_q2_.step(nets_.q2.params(), g2);

    Vec gp = Vec::Zero(nets_.policy.param_count());
    Vec log_probs;
    st.policy_loss =
        policy_loss(nets_, batch.states, draw_noise(A, B, batch_rng_), cfg_, &gp, &log_probs);
    opt_policy_.step(nets_.policy.params(), gp);

    double galpha = 0.0;
    temperature_objective(nets_.log_alpha, log_probs, target_entropy_, &galpha);
    Vec la(1), gla(1);
    la << nets_.log_alpha;
    gla << galpha;
    opt_alpha_.step(la, gla);
    nets_.log_alpha = la(0);

    st.alpha = nets_.alpha();
    st.entropy = -log_probs.mean();

    ++grad_passes_;
    if (grad_passes_ % cfg_.target_update_every == 0)
        target_update(nets_.value.params(), nets_.target_value.params(), cfg_.target_smoothing);

    if (!std::isfinite(st.value_loss + st.q1_loss + st.q2_loss + st.policy_loss + st.alpha))
        throw TrainingError("SacAgent::update: non-finite loss (value=" +
                            std::to_string(st.value_loss) + " q1=" + std::to_string(st.q1_loss) +
                            " q2=" + std::to_string(st.q2_loss) +
                            " policy=" + std::to_string(st.policy_loss) + ")");
    return st;
}

namespace {

constexpr char kMagic[9] = "MECSAC01";

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void put_vec(std::ostream& os, const Vec& v) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vec get_vec(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    Vec v(static_cast<Eigen::Index>(n));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

void put_dvec(std::ostream& os, const std::vector<double>& v) {
    put<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_dvec(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

void put_optimizer(std::ostream& os, const Optimizer& o) {
    put_vec(os, o.moment1());
    put_vec(os, o.moment2());
    put<std::int64_t>(os, o.steps());
}

void get_optimizer(std::istream& is, Optimizer& o) {
    Vec m = get_vec(is);
    Vec v = get_vec(is);
    const auto t = get<std::int64_t>(is);
    o.restore(std::move(m), std::move(v), t);
}

} // namespace

void SacAgent::save(std::ostream& os) const {
    os.write(kMagic, 8);
    put<std::int32_t>(os, num_tasks_);
    put<std::uint64_t>(os, cfg_.hidden.size());
    for (int h : cfg_.hidden) put<std::int32_t>(os, h);
    put(os, cfg_.lr);
    put(os, cfg_.lr_alpha);
    put(os, cfg_.discount);
    put(os, cfg_.target_smoothing);
    put<std::int32_t>(os, cfg_.target_update_every);
    put<std::int32_t>(os, cfg_.batch_size);
    put<std::uint64_t>(os, cfg_.buffer_capacity);
    put<std::int32_t>(os, cfg_.warmup_steps);
    put<std::int32_t>(os, cfg_.update_every);
    put<std::int32_t>(os, cfg_.updates_per_step);
    put(os, cfg_.log_std_min);
    put(os, cfg_.log_std_max);
    put(os, cfg_.init_log_alpha);
    put<std::uint8_t>(os, cfg_.target_entropy.has_value() ? 1 : 0);
    put(os, cfg_.target_entropy.value_or(0.0));
    put_string(os, cfg_.optimizer);

    put_vec(os, nets_.value.params());
    put_vec(os, nets_.target_value.params());
    put_vec(os, nets_.q1.params());
    put_vec(os, nets_.q2.params());
    put_vec(os, nets_.policy.params());
    put(os, nets_.log_alpha);

    put_optimizer(os, opt_value_);
    put_optimizer(os, opt_q1_);
    put_optimizer(os, opt_q2_);
    put_optimizer(os, opt_policy_);
    put_optimizer(os, opt_alpha_);

    put(os, target_entropy_);
    put<std::int64_t>(os, steps_);
    put<std::int64_t>(os, grad_passes_);
    put_string(os, action_rng_.serialize());
    put_string(os, batch_rng_.serialize());

    put<std::uint64_t>(os, buffer_.size());
    put<std::uint64_t>(os, buffer_.cursor());
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const Transition& t = buffer_.at(i);
        put_dvec(os, t.state);
        put_dvec(os, t.action);
        put(os, t.reward);
        put_dvec(os, t.next_state);
    }
    if (!os) throw TrainingError("SacAgent::save: stream failure");
}

SacAgent SacAgent::load(std::istream& is) {
    char magic[9] = {};
    is.read(magic, 8);
    if (std::string(magic) != kMagic) throw TrainingError("SacAgent::load: bad magic");
    const int num_tasks = get<std::int32_t>(is);
    SacConfig cfg;
    cfg.hidden.resize(get<std::uint64_t>(is));
    for (int& h : cfg.hidden) h = get<std::int32_t>(is);
    cfg.lr = get<double>(is);
    cfg.lr_alpha = get<double>(is);
    cfg.discount = get<double>(is);
    cfg.target_smoothing = get<double>(is);
    cfg.target_update_every = get<std::int32_t>(is);
    cfg.batch_size = get<std::int32_t>(is);
    cfg.buffer_capacity = get<std::uint64_t>(is);
    cfg.warmup_steps = get<std::int32_t>(is);
    cfg.update_every = get<std::int32_t>(is);
    cfg.updates_per_step = get<std::int32_t>(is);
    cfg.log_std_min = get<double>(is);
    cfg.log_std_max = get<double>(is);
    cfg.init_log_alpha = get<double>(is);
    const bool has_te = get<std::uint8_t>(is) != 0;
    const double te = get<double>(is);
    if (has_te) cfg.target_entropy = te;
    cfg.optimizer = get_string(is);

    SacAgent agent(num_tasks, cfg, 0);
    agent.nets_.value.params() = get_vec(is);
    agent.nets_.target_value.params() = get_vec(is);
    agent.nets_.q1.params() = get_vec(is);
    agent.nets_.q2.params() = get_vec(is);
    agent.nets_.policy.params() = get_vec(is);
    agent.nets_.log_alpha = get<double>(is);

    get_optimizer(is, agent.opt_value_);
    get_optimizer(is, agent.opt_q1_);
    get_optimizer(is, agent.opt_q2_);
    get_optimizer(is, agent.opt_policy_);
    get_optimizer(is, agent.opt_alpha_);

    agent.target_entropy_ = get<double>(is);
    agent.steps_ = get<std::int64_t>(is);
    agent.grad_passes_ = get<std::int64_t>(is);
    agent.action_rng_.deserialize(get_string(is));
    agent.batch_rng_.deserialize(get_string(is));

    const auto n = get<std::uint64_t>(is);
    const auto cursor = get<std::uint64_t>(is);
    std::vector<Transition> data;
    data.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Transition t;
        t.state = get_dvec(is);
        t.action = get_dvec(is);
        t.reward = get<double>(is);
        t.next_state = get_dvec(is);
        data.push_back(std::move(t));
    }
    agent.buffer_.restore(std::move(data), cursor);
    if (!is) throw TrainingError("SacAgent::load: stream failure");
    return agent;
}

} // namespace mecsim
