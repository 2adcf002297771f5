#pragma once

// Human-resource allocation MDP: officers are assigned to (event, task)
// slots one slot per step; the reward is the negative makespan of the
// partial assignment normalized by an upper bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace vqr::hrap {

struct HrapConfig {
    int officers = 3;
    int events = 2;
    int tasks = 2; // per event
    int value_lo = 1;
    int value_hi = 20;
    std::uint64_t seed = 0;

    int slots() const { return events * tasks; }

    void validate() const {
        if (officers < 1 || events < 1 || tasks < 1)
            throw ConfigError("hrap: officers, events and tasks must all be >= 1");
        if (value_lo < 1) throw ConfigError("hrap: value_lo must be >= 1");
        if (value_hi < value_lo) throw ConfigError("hrap: value_hi must be >= value_lo");
    }

    friend bool operator==(const HrapConfig&, const HrapConfig&) = default;
};

/// One sampled problem. Immutable once built; events are indexed in
/// ascending start-time order.
class HrapInstance {
public:
    HrapInstance() = default;
    HrapInstance(HrapConfig config, std::vector<int> capability, std::vector<int> event_times,
                 std::vector<int> transition)
        : config_(config), capability_(std::move(capability)),
          event_times_(std::move(event_times)), transition_(std::move(transition)) {
        check();
    }

    const HrapConfig& config() const { return config_; }
    int officers() const { return config_.officers; }
    int events() const { return config_.events; }
    int tasks() const { return config_.tasks; }
    int slots() const { return config_.slots(); }

    /// Time for officer o (0-based) on task t of event e (both 0-based).
    int capability(int o, int e, int t) const {
        return capability_[static_cast<std::size_t>((o * events() + e) * tasks() + t)];
    }
    /// Travel time between locations; 0 is the depot, 1..E are events.
    int transition(int from, int to) const {
        return transition_[static_cast<std::size_t>(from * (events() + 1) + to)];
    }
    int event_time(int e) const { return event_times_[static_cast<std::size_t>(e)]; }

    const std::vector<int>& capability_flat() const { return capability_; }
    const std::vector<int>& event_times() const { return event_times_; }
    const std::vector<int>& transition_flat() const { return transition_; }

    friend bool operator==(const HrapInstance&, const HrapInstance&) = default;

private:
    void check() const {
        config_.validate();
        const auto o = static_cast<std::size_t>(officers());
        const auto e = static_cast<std::size_t>(events());
        const auto t = static_cast<std::size_t>(tasks());
        if (capability_.size() != o * e * t) throw SchemaError("hrap: capability has wrong size");
        if (event_times_.size() != e) throw SchemaError("hrap: event_times has wrong size");
        if (transition_.size() != (e + 1) * (e + 1)) throw SchemaError("hrap: transition has wrong size");
        if (!std::is_sorted(event_times_.begin(), event_times_.end()))
            throw SchemaError("hrap: event_times must be ascending");
        for (int i = 0; i <= events(); ++i) {
            if (transition(i, i) != 0) throw SchemaError("hrap: transition diagonal must be zero");
            for (int j = 0; j < i; ++j)
                if (transition(i, j) != transition(j, i))
                    throw SchemaError("hrap: transition must be symmetric");
        }
    }

    HrapConfig config_;
    std::vector<int> capability_;
    std::vector<int> event_times_;
    std::vector<int> transition_;
};

inline HrapInstance generate_instance(const HrapConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, "hrap-instance"));
    std::uniform_int_distribution<int> value(config.value_lo, config.value_hi);

    std::vector<int> capability(static_cast<std::size_t>(config.officers * config.slots()));
    for (auto& c : capability) c = value(rng);

    std::vector<int> times(static_cast<std::size_t>(config.events));
    for (auto& w : times) w = value(rng);
    std::sort(times.begin(), times.end());

    const int n = config.events + 1;
    std::vector<int> transition(static_cast<std::size_t>(n * n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int m = value(rng);
            transition[static_cast<std::size_t>(i * n + j)] = m;
            transition[static_cast<std::size_t>(j * n + i)] = m;
        }
    return HrapInstance(config, std::move(capability), std::move(times), std::move(transition));
}

/// Upper bound on the makespan: (max C + max M) * E * T.
inline long psi(const HrapInstance& inst) {
    const auto& c = inst.capability_flat();
    const auto& m = inst.transition_flat();
    const long max_c = *std::max_element(c.begin(), c.end());
    const long max_m = *std::max_element(m.begin(), m.end());
    const long slots = inst.slots();
    return max_c * slots + max_m * slots;
}

inline constexpr int kUnassigned = -1;

/// Completion time of the slowest event over the assigned slots.
///
/// Slot k belongs to event k / T and task k % T. Each officer starts at the
/// depot and visits the events it serves in start-time order; the hop into
/// an event is charged to that event. Unassigned slots are skipped, so the
/// value is monotone in the set of assigned slots.
inline long partial_makespan(const HrapInstance& inst, const std::vector<int>& assignment) {
    require(static_cast<int>(assignment.size()) == inst.slots(), "makespan: assignment has wrong length");
    const int T = inst.tasks();
    std::vector<int> location(static_cast<std::size_t>(inst.officers()), 0);
    std::vector<char> serving(static_cast<std::size_t>(inst.officers()));
    long worst = 0;
    for (int e = 0; e < inst.events(); ++e) {
        long total = 0;
        std::fill(serving.begin(), serving.end(), 0);
        for (int t = 0; t < T; ++t) {
            const int o = assignment[static_cast<std::size_t>(e * T + t)];
            if (o == kUnassigned) continue;
            if (o < 0 || o >= inst.officers()) throw ActionError("makespan: officer index out of range");
            total += inst.capability(o, e, t);
            serving[static_cast<std::size_t>(o)] = 1;
        }
        for (int o = 0; o < inst.officers(); ++o) {
            if (!serving[static_cast<std::size_t>(o)]) continue;
            total += inst.transition(location[static_cast<std::size_t>(o)], e + 1);
            location[static_cast<std::size_t>(o)] = e + 1;
        }
        worst = std::max(worst, total);
    }
    return worst;
}

inline long makespan(const HrapInstance& inst, const std::vector<int>& assignment) {
    require(static_cast<int>(assignment.size()) == inst.slots(), "makespan: assignment has wrong length");
    if (std::find(assignment.begin(), assignment.end(), kUnassigned) != assignment.end())
        throw ContractError("makespan: every slot must be assigned");
    return partial_makespan(inst, assignment);
}

enum class ObservationMode { literal, augmented };

/// Episode state: which slots have been filled so far.
struct AssignmentState {
    std::shared_ptr<const HrapInstance> instance;
    int slot_index = 0;
    std::vector<int> assignment;
    bool done = false;

    explicit AssignmentState(std::shared_ptr<const HrapInstance> inst)
        : instance(std::move(inst)),
          assignment(static_cast<std::size_t>(instance->slots()), kUnassigned),
          done(instance->slots() == 0) {}
};

inline std::size_t observation_size(const HrapConfig& c, ObservationMode mode) {
    const auto base = static_cast<std::size_t>(c.officers * c.slots() + c.events + (c.events + 1) * (c.events + 1));
    return mode == ObservationMode::literal ? base : base + 2 * static_cast<std::size_t>(c.slots());
}

/// Flattened capability, event times and transition matrix scaled by
/// 1/value_hi; augmented mode appends a one-hot of the current slot and the
/// assignment as (officer + 1) / O, 0 for unassigned.
inline std::vector<double> encode_state(const AssignmentState& state, ObservationMode mode) {
    const HrapInstance& inst = *state.instance;
    const double scale = 1.0 / inst.config().value_hi;
    std::vector<double> obs;
    obs.reserve(observation_size(inst.config(), mode));
    for (int v : inst.capability_flat()) obs.push_back(v * scale);
    for (int v : inst.event_times()) obs.push_back(v * scale);
    for (int v : inst.transition_flat()) obs.push_back(v * scale);
    if (mode == ObservationMode::augmented) {
        for (int k = 0; k < inst.slots(); ++k) obs.push_back(k == state.slot_index ? 1.0 : 0.0);
        for (int a : state.assignment)
            obs.push_back(a == kUnassigned ? 0.0 : static_cast<double>(a + 1) / inst.officers());
    }
    return obs;
}

struct StepOutcome {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
};

/// Fresh instance for one episode, seeded by `episode_seed`.
inline std::pair<AssignmentState, std::vector<double>> reset(const HrapConfig& config, std::uint64_t episode_seed,
                                                             ObservationMode mode = ObservationMode::augmented) {
    HrapConfig c = config;
    c.seed = episode_seed;
    AssignmentState state(std::make_shared<const HrapInstance>(generate_instance(c)));
    auto obs = encode_state(state, mode);
    return {std::move(state), std::move(obs)};
}

inline double normalized_reward(const HrapInstance& inst, long makespan_value) {
    return -static_cast<double>(makespan_value) / static_cast<double>(psi(inst));
}

/// Assign `officer` (0-based) to the current slot.
inline StepOutcome step(AssignmentState& state, int officer, ObservationMode mode = ObservationMode::augmented) {
    if (state.done) throw EpisodeFinishedError("step: episode already finished");
    const HrapInstance& inst = *state.instance;
    if (officer < 0 || officer >= inst.officers()) throw ActionError("step: officer index out of range");
    state.assignment[static_cast<std::size_t>(state.slot_index)] = officer;
    ++state.slot_index;
    state.done = state.slot_index == inst.slots();
    StepOutcome out;
    out.reward = normalized_reward(inst, partial_makespan(inst, state.assignment));
    out.done = state.done;
    out.observation = encode_state(state, mode);
    return out;
}

struct OracleResult {
    std::vector<int> assignment;
    long makespan = 0;
};

inline constexpr double kOracleLimit = 1e6;

/// Exhaustive search over all O^(E*T) assignments. Ties resolve to the
/// lexicographically smallest assignment.
inline OracleResult brute_force_best(const HrapInstance& inst) {
    const double space = std::pow(static_cast<double>(inst.officers()), inst.slots());
    if (space > kOracleLimit) throw SearchSpaceError("brute_force_best: search space exceeds 1e6 assignments");
    std::vector<int> current(static_cast<std::size_t>(inst.slots()), 0);
    OracleResult best{current, std::numeric_limits<long>::max()};
    for (;;) {
        const long m = partial_makespan(inst, current);
        if (m < best.makespan) best = {current, m};
        // odometer increment, last slot fastest: visits lexicographic order
        int k = inst.slots() - 1;
        while (k >= 0 && ++current[static_cast<std::size_t>(k)] == inst.officers())
            current[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    return best;
}

/// Mean final-step reward of uniformly random assignments on fresh instances.
inline double random_baseline(const HrapConfig& config, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw ConfigError("random_baseline: episodes must be >= 1");
    Rng rng = make_rng(seed, "random-policy");
    std::uniform_int_distribution<int> pick(0, config.officers - 1);
    double sum = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto [state, obs] = reset(config, derive_seed(seed, "baseline-episode", static_cast<std::uint64_t>(ep)),
                                  ObservationMode::literal);
        double last = 0.0;
        while (!state.done) last = step(state, pick(rng), ObservationMode::literal).reward;
        sum += last;
    }
    return sum / episodes;
}

// JSON serialization

inline void to_json(nlohmann::json& j, const HrapConfig& c) {
    j = {{"officers", c.officers}, {"events", c.events},     {"tasks", c.tasks},
         {"value_lo", c.value_lo}, {"value_hi", c.value_hi}, {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, HrapConfig& c) {
    j.at("officers").get_to(c.officers);
    j.at("events").get_to(c.events);
    j.at("tasks").get_to(c.tasks);
    j.at("value_lo").get_to(c.value_lo);
    j.at("value_hi").get_to(c.value_hi);
    j.at("seed").get_to(c.seed);
}

inline nlohmann::json instance_to_json(const HrapInstance& inst) {
    using nlohmann::json;
    json cap = json::array();
    for (int o = 0; o < inst.officers(); ++o) {
        json per_event = json::array();
        for (int e = 0; e < inst.events(); ++e) {
            json per_task = json::array();
            for (int t = 0; t < inst.tasks(); ++t) per_task.push_back(inst.capability(o, e, t));
            per_event.push_back(std::move(per_task));
        }
        cap.push_back(std::move(per_event));
    }
    json trans = json::array();
    for (int i = 0; i <= inst.events(); ++i) {
        json row = json::array();
        for (int j = 0; j <= inst.events(); ++j) row.push_back(inst.transition(i, j));
        trans.push_back(std::move(row));
    }
    return {{"capability", cap}, {"event_times", inst.event_times()}, {"transition", trans}, {"config", inst.config()}};
}

inline HrapInstance instance_from_json(const nlohmann::json& j) {
    try {
        auto config = j.at("config").get<HrapConfig>();
        std::vector<int> cap;
        for (const auto& per_event : j.at("capability"))
            for (const auto& per_task : per_event)
                for (const auto& v : per_task) cap.push_back(v.get<int>());
        auto times = j.at("event_times").get<std::vector<int>>();
        std::vector<int> trans;
        for (const auto& row : j.at("transition"))
            for (const auto& v : row) trans.push_back(v.get<int>());
        return HrapInstance(config, std::move(cap), std::move(times), std::move(trans));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("hrap instance json: ") + e.what());
    }
}

} // namespace vqr::hrap
