#pragma once

#include <string>
#include <vector>

#include "mecsim/request.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

/// Which constraint an action violates.
enum class Constraint {
    CoreBound,        // cores outside [0,M], or cores > 0 with output cached
    CoreLatency,      // cores too low to serve the request within the slot
    DeltaInputBound,  // input cache delta outside its state-dependent bounds
    DeltaOutputBound, // output cache delta outside its state-dependent bounds
    Capacity,         // post-update cache exceeds C
    Shape,            // vector lengths do not match the task count
};

std::string to_string(Constraint c);

struct Violation {
    Constraint which;
    int task; // -1 when not task-specific
    std::string detail;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
    std::string message() const;
};

/// Minimum cores that finish `input_bits * cycles_per_bit` cycles within one
/// slot: ceil(I*w / (tau*f_D)).
int min_cores(const TaskSpec& task, const SystemConfig& cfg);

/// Smallest core count yielding a valid action for the requested task when
/// its output is uncached. Equals min_cores when the input is cached; when
/// the input must be downloaded, the transmission-time budget
/// tau - I*w/(c*f_D) must be strictly positive, which can push the minimum
/// one core higher.
int min_workable_cores(const TaskSpec& task, const SystemConfig& cfg, bool input_cached);

struct ReactiveCost {
    double bandwidth = 0.0; // B^R
    double energy = 0.0;    // E^R
};

/// Reactive service cost of the requested task with `cores` allocated.
/// Output cached -> (0,0). Input cached -> compute energy only. Neither
/// cached -> download bandwidth plus compute energy. Throws
/// InvalidActionError when cores cannot serve the request in time.
ReactiveCost reactive_cost(const SystemState& state, int cores, const SystemConfig& cfg);

/// Minimum bandwidth to deliver all pushed inputs by the end of the slot:
/// sum_f I_f*b_f / tau.
double proactive_cost(const std::vector<std::uint8_t>& push, const SystemConfig& cfg);

/// Membership test for the valid action space Pi(X). Returns diagnostics,
/// never throws.
ValidationResult validate_action(const SystemState& state, const SystemAction& action,
                                 const SystemConfig& cfg);

/// Componentwise cache update S += delta. The action must already be
/// validated; bits leaving {0,1} indicate a contract violation upstream and
/// throw std::logic_error.
CacheState apply_cache_update(const CacheState& cache, const SystemAction& action);

/// Full per-slot cost of a validated action.
CostBreakdown action_cost(const SystemState& state, const SystemAction& action,
                          const SystemConfig& cfg);

struct StepResult {
    SystemState next;
    CostBreakdown cost;
    double reward = 0.0;
};

/// Advances the MDP one slot: validates the action (throws
/// InvalidActionError otherwise), prices it, applies the cache update, and
/// installs `next_request`. reward = -kappa * weighted cost.
StepResult step(const SystemState& state, const SystemAction& action, int next_request,
                const SystemConfig& cfg);

/// Convenience wrapper owning the current state and the request chain.
/// Instances are self-contained; run as many in parallel as you like.
class Environment {
  public:
    Environment(SystemConfig cfg, TransitionMatrix chain,
                CacheState initial_cache = CacheState{});

    /// Draws the initial request from the chain's limiting distribution and
    /// resets the cache to the configured initial contents.
    void reset(Rng& rng);

    StepResult step(const SystemAction& action, Rng& rng);

    const SystemState& state() const { return state_; }
    const SystemConfig& config() const { return cfg_; }
    const TransitionMatrix& chain() const { return chain_; }

  private:
    SystemConfig cfg_;
    TransitionMatrix chain_;
    CacheState initial_cache_;
    std::vector<double> limiting_;
    SystemState state_;
};

} // namespace mecsim
