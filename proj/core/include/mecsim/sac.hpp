#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/codec.hpp"
#include "mecsim/mlp.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

struct SacConfig {
    std::vector<int> hidden{256, 256};
    double lr = 1e-4;       // value, Q, and policy step size
    double lr_alpha = 1e-4; // temperature step size
    double discount = 0.99; // mirrors SystemConfig::discount at training time
    double target_smoothing = 0.005;
    int target_update_every = 1; // gradient passes between EMA applications
    int batch_size = 256;
    std::size_t buffer_capacity = 10000000;
    int warmup_steps = 1000; // uniform random actions before the policy acts
    int update_every = 1;    // environment steps per gradient pass
    int updates_per_step = 1;
    double log_std_min = -20.0;
    double log_std_max = 2.0;
    double init_log_alpha = 0.0;
    std::optional<double> target_entropy; // defaults to -(1+3F)
    std::string optimizer = "adam";       // "adam" | "sgd"

    void validate() const;
};

/// Replay record. The action is the raw pre-correction policy output; the
/// reward is what the corrected action earned in the environment.
struct Transition {
    EncodedState state;
    RawAction action;
    double reward = 0.0;
    EncodedState next_state;
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t); // FIFO eviction once full
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t cursor() const { return cursor_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

    /// Uniform without replacement; batch must not exceed size.
    std::vector<std::size_t> sample_indices(int batch, Rng& rng) const;

    /// Checkpoint restore; `data` must not exceed capacity.
    void restore(std::vector<Transition> data, std::size_t cursor);

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> data_;
};

/// Column-per-sample minibatch.
struct Batch {
    Mat states;
    Mat actions;
    Vec rewards;
    Mat next_states;
    int size() const { return static_cast<int>(rewards.size()); }
};

Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices);

/// The five networks plus the scalar temperature. Policy outputs stack the
/// mean over the log-std, each of action dimension.
struct SacNets {
    Mlp value, target_value, q1, q2, policy;
    double log_alpha = 0.0;

    SacNets(int num_tasks, const std::vector<int>& hidden);
    void init(Rng& rng); // target copies the freshly initialized value net
    double alpha() const;
};

struct SquashedSample {
    Mat actions;   // tanh-squashed, rows = action dims
    Vec log_probs; // per sample, includes the tanh correction
};

/// a = tanh(mu + sigma*noise) with sigma = exp(clamp(log_std)). `noise` is
/// standard normal, action_dim x batch.
SquashedSample policy_sample(const Mlp& policy, const Mat& states, const Mat& noise,
                             const SacConfig& cfg);

/// Deterministic evaluation head tanh(mu).
Mat policy_mean(const Mlp& policy, const Mat& states);

/// Mean over the batch of 1/2 (V(x) - (min Q(x,a~) - alpha log pi(a~|x)))^2
/// with a~ resampled through `noise`. Writes dLoss/dparams(value) into
/// `grad` when non-null.
double value_loss(const SacNets& nets, const Mat& states, const Mat& noise,
                  const SacConfig& cfg, Vec* grad);

/// Mean of 1/2 (Q(x,a) - (r + discount * targetV(x')))^2 for one Q net.
double q_loss(const Mlp& q, const Mlp& target_value, const Batch& batch, double discount,
              Vec* grad);

/// Mean of alpha*log pi(a~|x) - min Q(x,a~), reparameterized through
/// `noise`; the gradient flows through both the log-density and the Q input.
/// Optionally exports the sampled log-probabilities for the temperature
/// update.
double policy_loss(const SacNets& nets, const Mat& states, const Mat& noise,
                   const SacConfig& cfg, Vec* grad, Vec* log_probs_out = nullptr);

/// J(log alpha) = -log_alpha * mean(log_probs + target_entropy); descending
/// this grows alpha while entropy sits below target.
double temperature_objective(double log_alpha, const Vec& log_probs, double target_entropy,
                             double* grad);

/// target <- xi * online + (1 - xi) * target
void target_update(const Vec& online, Vec& target, double xi);

struct UpdateStats {
    double value_loss = 0.0;
    double q1_loss = 0.0;
    double q2_loss = 0.0;
    double policy_loss = 0.0;
    double alpha = 0.0;
    double entropy = 0.0; // mean of -log pi over the batch
};

/// Off-policy learner tying the pieces together. Interaction protocol per
/// environment step: act() -> codec -> env -> observe(); call update() every
/// `update_every` steps once can_update().
class SacAgent {
  public:
    SacAgent(int num_tasks, SacConfig cfg, std::uint64_t seed);

    /// Sampled action; uniform in [-1,1]^d during warmup.
    RawAction act(const EncodedState& state);
    RawAction act_mean(const EncodedState& state) const;

    void observe(Transition t);
    bool can_update() const;
    UpdateStats update(); // throws TrainingError on non-finite losses

    std::int64_t steps_observed() const { return steps_; }
    double alpha() const { return nets_.alpha(); }
    double target_entropy() const { return target_entropy_; }
    const SacNets& nets() const { return nets_; }
    SacNets& nets() { return nets_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const SacConfig& config() const { return cfg_; }

    /// Bit-exact checkpoint: parameters, optimizer moments, temperature,
    /// counters, RNG state, and buffer contents.
    void save(std::ostream& os) const;
    static SacAgent load(std::istream& is);

  private:
    int num_tasks_;
    SacConfig cfg_;
    SacNets nets_;
    ReplayBuffer buffer_;
    Rng action_rng_, batch_rng_;
    Optimizer opt_value_, opt_q1_, opt_q2_, opt_policy_, opt_alpha_;
    double target_entropy_;
    std::int64_t steps_ = 0;
    std::int64_t grad_passes_ = 0;
};

} // namespace mecsim
