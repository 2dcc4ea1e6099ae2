#pragma once

#include <string>
#include <vector>

#include "mecsim/types.hpp"

namespace mecsim {

/// SAC state vector: F-slot request block followed by F input-cache bits and
/// F output-cache bits, all coded as -1/+1.
using EncodedState = std::vector<double>;

/// SAC action vector in [-1,1]^(1+3F): cores scalar, push block, input-delta
/// block, output-delta block.
using RawAction = std::vector<double>;

inline int encoded_state_dim(int num_tasks) { return 3 * num_tasks; }
inline int raw_action_dim(int num_tasks) { return 1 + 3 * num_tasks; }

EncodedState encode_state(const SystemState& state);
SystemState decode_state(const EncodedState& encoded);

/// Uniform thresholding of a natural-range value onto the integer grid
/// {set_min..set_max}: set_min + floor((eta - set_min)/step) with
/// step = (max-min)/(max-min+1), clamped into the set.
int quantize_component(double eta, int set_min, int set_max);

/// Projects a raw SAC action onto the discrete grid. Components are first
/// affinely rescaled from [-1,1] to their natural ranges ([0,M] cores,
/// [0,1] push, [-1,1] deltas). The result is generally not yet valid; run
/// correct() before handing it to the environment. `state` does not enter
/// the projection; state-dependent bounds are the correction's job.
SystemAction quantize(const RawAction& raw, const SystemState& state, const SystemConfig& cfg);

/// Rule-by-rule record of a correction, for the trace-correction CLI and
/// test forensics.
struct CorrectionTrace {
    struct Entry {
        std::string rule;
        SystemAction after;
        std::vector<std::string> notes;
    };
    std::vector<Entry> entries;
    std::string format() const;
};

/// Repairs a quantized action into the valid action space. Rules applied in
/// order: clip deltas (7), core bounds (1), no pushing cached tasks (2),
/// single push (3), pushed input must be cached (4), opportunistic reactive
/// caching (6), capacity eviction (5), final re-clip (7). The raw action
/// supplies the preference ordering used by rules 3, 5, and 6. The mask
/// zeroes disabled blocks before the rules run and disables rule 6 additions
/// when caching is off. Postcondition: validate_action passes.
SystemAction correct(const SystemState& state, const SystemAction& quantized,
                     const RawAction& raw, const SystemConfig& cfg,
                     const ActionMask& mask = ActionMask::ptdfc(),
                     CorrectionTrace* trace = nullptr);

/// quantize + correct in one call.
SystemAction raw_to_action(const SystemState& state, const RawAction& raw,
                           const SystemConfig& cfg,
                           const ActionMask& mask = ActionMask::ptdfc(),
                           CorrectionTrace* trace = nullptr);

} // namespace mecsim
