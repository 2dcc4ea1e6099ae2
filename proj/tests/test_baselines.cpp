#include <doctest.h>

#include <stdexcept>

#include "mecsim/baselines.hpp"
#include "mecsim/env.hpp"
#include "mecsim/rng.hpp"

using namespace mecsim;

namespace {

constexpr double kWeighted6 = 3479080.421052632; // uncached service at 6 cores
constexpr double kPushCost = 800000.0;           // 16000 bits / 0.02 s

SystemState empty_state(int request, const SystemConfig& cfg) {
    return SystemState{request, CacheState::empty(cfg.num_tasks())};
}

// num_cores=3 with a task whose transmission budget dies exactly at the
// 2-core compute minimum, so the uncached minimum is 3
SystemConfig split_cfg() {
    SystemConfig cfg = SystemConfig::defaults();
    cfg.num_cores = 3;
    cfg.core_freq = 1e8;
    cfg.tasks.assign(4, TaskSpec{2000, 1000, 2000});
    cfg.validate();
    return cfg;
}

} // namespace

TEST_CASE("book rejects bad tasks and rewinding slots") {
    RecencyFrequencyBook book(4);
    CHECK_THROWS_AS(book.record(4, 0), std::out_of_range);
    CHECK_THROWS_AS(book.record(-1, 0), std::out_of_range);

    book.record(2, 10);
    book.record(2, 10); // same slot is fine (two policies sharing a book)
    CHECK_THROWS_AS(book.record(2, 9), std::logic_error);
    CHECK(book.last_used[2] == 10);
    CHECK(book.use_count[2] == 2);
    CHECK(book.last_used[0] == -1);
}

TEST_CASE("idle book yields plain reactive service with a kept input") {
    const SystemConfig cfg = SystemConfig::defaults();
    RecencyFrequencyBook book(4);
    const SystemState state = empty_state(0, cfg);

    for (auto* policy : {&mru_lru_policy, &mfu_lfu_policy}) {
        const SystemAction act = (*policy)(state, book, cfg);
        CHECK(act.reactive_cores == 6); // 0.75 * 8
        CHECK(act.push == std::vector<std::uint8_t>{0, 0, 0, 0});
        // free ride: the downloaded input fits, keep it
        CHECK(act.delta_input == std::vector<std::int8_t>{1, 0, 0, 0});
        CHECK(act.delta_output == std::vector<std::int8_t>{0, 0, 0, 0});
        CHECK(action_cost(state, act, cfg).weighted ==
              doctest::Approx(kWeighted6).epsilon(1e-12));
    }
}

TEST_CASE("cached output turns service off") {
    const SystemConfig cfg = SystemConfig::defaults();
    RecencyFrequencyBook book(4);
    SystemState state = empty_state(1, cfg);
    state.cache.output_cached[1] = 1;

    const SystemAction act = mru_lru_policy(state, book, cfg);
    CHECK(act.reactive_cores == 0);
    CHECK(act.delta_input == std::vector<std::int8_t>{0, 0, 0, 0});
    CHECK(action_cost(state, act, cfg).weighted == 0.0);
}

TEST_CASE("fixed core count is raised to the workable minimum") {
    const SystemConfig cfg = split_cfg();
    RecencyFrequencyBook book(4);

    SystemState state = empty_state(0, cfg);
    CHECK(mru_lru_policy(state, book, cfg).reactive_cores == 3);

    state.cache.input_cached[0] = 1; // no download, compute bound only
    CHECK(mru_lru_policy(state, book, cfg).reactive_cores == 2);
}

TEST_CASE("push picks the best ranked idle task") {
    const SystemConfig cfg = SystemConfig::defaults();
    RecencyFrequencyBook book(4);
    book.record(1, 5);
    book.record(3, 2);
    book.record(2, 9);
    book.record(2, 12);
    const SystemState state = empty_state(0, cfg);

    SUBCASE("recency flavor takes the most recent") {
        const SystemAction act = mru_lru_policy(state, book, cfg);
        CHECK(act.push == std::vector<std::uint8_t>{0, 0, 1, 0});
        CHECK(act.delta_input[2] == 1); // pushed input lands in the cache
    }
    SUBCASE("frequency flavor takes the most used, ties to the lower index") {
        book.record(1, 13); // counts: task1=2, task2=2, task3=1
        const SystemAction act = mfu_lfu_policy(state, book, cfg);
        CHECK(act.push == std::vector<std::uint8_t>{0, 1, 0, 0});
    }
    SUBCASE("the request and data holders are not candidates") {
        SystemState s2 = empty_state(2, cfg); // task 2 (most recent) is served
        s2.cache.input_cached[1] = 1;         // task 1 already holds data
        SystemAction act = mru_lru_policy(s2, book, cfg);
        CHECK(act.push == std::vector<std::uint8_t>{0, 0, 0, 1}); // falls to task 3

        s2.cache.input_cached[3] = 1; // nothing pushable left (task 0 never used)
        act = mru_lru_policy(s2, book, cfg);
        CHECK(act.push == std::vector<std::uint8_t>{0, 0, 0, 0});
    }
}

TEST_CASE("push evicts by rank until the input fits") {
    const SystemConfig cfg = SystemConfig::defaults(); // C = 40000, I = 16000
    RecencyFrequencyBook book(4);
    book.record(1, 5);
    book.record(2, 9);
    book.record(3, 20);

    SystemState state = empty_state(0, cfg);
    state.cache.input_cached[1] = 1;
    state.cache.input_cached[2] = 1; // used = 32000, push adds 16000

    SUBCASE("least recently used goes first") {
        const SystemAction act = mru_lru_policy(state, book, cfg);
        CHECK(act.push == std::vector<std::uint8_t>{0, 0, 0, 1});
        CHECK(act.delta_input == std::vector<std::int8_t>{0, -1, 0, 1});
        CHECK(action_cost(state, act, cfg).weighted ==
              doctest::Approx(kWeighted6 + kPushCost).epsilon(1e-12));
    }
    SUBCASE("least frequently used goes first") {
        book.record(1, 21); // counts: task1=2, task2=1
        const SystemAction act = mfu_lfu_policy(state, book, cfg);
        CHECK(act.delta_input == std::vector<std::int8_t>{0, 0, -1, 1});
    }
    SUBCASE("equal counts evict the lower index") {
        const SystemAction act = mfu_lfu_policy(state, book, cfg);
        CHECK(act.delta_input == std::vector<std::int8_t>{0, -1, 0, 1});
    }
}

TEST_CASE("oversized push is abandoned cleanly") {
    SystemConfig cfg = SystemConfig::defaults();
    cfg.tasks[3] = TaskSpec{50000, 1000, 10}; // input larger than the cache
    cfg.validate();

    RecencyFrequencyBook book(4);
    book.record(1, 1);
    book.record(3, 2); // most recent, hence the push candidate
    SystemState state = empty_state(0, cfg);
    state.cache.input_cached[1] = 1;

    const SystemAction act = mru_lru_policy(state, book, cfg);
    CHECK(act.push == std::vector<std::uint8_t>{0, 0, 0, 0});
    // the eviction staged for the push must be rolled back too
    CHECK(act.delta_input == std::vector<std::int8_t>{1, 0, 0, 0});
    CHECK(act.delta_output == std::vector<std::int8_t>{0, 0, 0, 0});
}

TEST_CASE("heuristic actions always validate") {
    const SystemConfig cfg = SystemConfig::defaults();
    const int F = cfg.num_tasks();
    Rng rng(404);

    for (int trial = 0; trial < 1000; ++trial) {
        SystemState state;
        state.request = static_cast<int>(rng.uniform_index(F));
        state.cache = CacheState::empty(F);
        for (int f = 0; f < F; ++f) {
            if (rng.uniform() < 0.5) {
                state.cache.input_cached[f] = 1;
                if (!state.cache.fits(cfg)) state.cache.input_cached[f] = 0;
            }
            if (rng.uniform() < 0.5) {
                state.cache.output_cached[f] = 1;
                if (!state.cache.fits(cfg)) state.cache.output_cached[f] = 0;
            }
        }
        RecencyFrequencyBook book(F);
        std::int64_t slot = 0;
        const int events = static_cast<int>(rng.uniform_index(10));
        for (int e = 0; e < events; ++e)
            book.record(static_cast<int>(rng.uniform_index(F)), slot++);

        for (auto* policy : {&mru_lru_policy, &mfu_lfu_policy}) {
            const SystemAction act = (*policy)(state, book, cfg);
            const ValidationResult check = validate_action(state, act, cfg);
            REQUIRE_MESSAGE(check.ok(), check.message());
            CHECK((act.reactive_cores == 0) == (state.cache.output_cached[state.request] != 0));
            for (int f = 0; f < F; ++f) CHECK(act.delta_output[f] <= 0);
        }
    }
}
