#include "catch_amalgamated.hpp"

#include <set>

#include <vqr/hrap.hpp>

using namespace vqr;
using namespace vqr::hrap;

namespace {

HrapInstance tiny(int c, int m) {
    return HrapInstance(HrapConfig{1, 1, 1}, {c}, {1}, {0, m, m, 0});
}

// Enumerates every assignment independently of the library's odometer.
long enumerate_min(const HrapInstance& inst) {
    const int slots = inst.slots();
    long total = 1;
    for (int k = 0; k < slots; ++k) total *= inst.officers();
    long best = std::numeric_limits<long>::max();
    std::vector<int> a(static_cast<std::size_t>(slots));
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int k = slots - 1; k >= 0; --k) {
            a[static_cast<std::size_t>(k)] = static_cast<int>(c % inst.officers());
            c /= inst.officers();
        }
        best = std::min(best, makespan(inst, a));
    }
    return best;
}

} // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS((HrapConfig{0, 2, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((HrapConfig{1, 0, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((HrapConfig{1, 1, 0}.validate()), ConfigError);
    HrapConfig c;
    c.value_hi = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("instance sampling is seeded and well formed") {
    HrapConfig c{3, 4, 2, 1, 20, 42};
    const auto a = generate_instance(c);
    CHECK(a == generate_instance(c));
    c.seed = 43;
    CHECK_FALSE(a == generate_instance(c));
    CHECK(std::is_sorted(a.event_times().begin(), a.event_times().end()));
    for (int v : a.capability_flat()) CHECK((v >= 1 && v <= 20));
    for (int i = 0; i <= a.events(); ++i) {
        CHECK(a.transition(i, i) == 0);
        for (int j = 0; j <= a.events(); ++j) {
            CHECK(a.transition(i, j) == a.transition(j, i));
            if (i != j) CHECK((a.transition(i, j) >= 1 && a.transition(i, j) <= 20));
        }
    }
}

TEST_CASE("malformed instances are rejected") {
    HrapConfig c{1, 2, 1};
    CHECK_THROWS_AS(HrapInstance(c, {1}, {1, 2}, std::vector<int>(9, 0)), SchemaError);
    CHECK_THROWS_AS(HrapInstance(c, {1, 1}, {3, 2}, std::vector<int>(9, 0)), SchemaError);
    CHECK_THROWS_AS(HrapInstance(c, {1, 1}, {1, 2}, {0, 1, 2, 3, 0, 4, 2, 4, 0}), SchemaError);
    CHECK_THROWS_AS(HrapInstance(c, {1, 1}, {1, 2}, {1, 1, 2, 1, 0, 4, 2, 4, 0}), SchemaError);
}

TEST_CASE("makespan charges both depot hops to the shared event") {
    // one event, two tasks, officer 0 takes 4 on task 0, officer 1 takes 6 on task 1
    HrapInstance inst(HrapConfig{2, 1, 2}, {4, 9, 9, 6}, {1}, {0, 2, 2, 0});
    CHECK(makespan(inst, {0, 1}) == 14);
    CHECK(makespan(inst, {0, 0}) == 4 + 9 + 2);
}

TEST_CASE("officer travels between events in start order") {
    // two events, one task each; depot->1 = 3, 1->2 = 5, depot->2 = 7
    HrapInstance inst(HrapConfig{2, 2, 1}, {2, 2, 4, 4}, {1, 2}, {0, 3, 7, 3, 0, 5, 7, 5, 0});
    CHECK(makespan(inst, {0, 0}) == std::max(2 + 3, 2 + 5));
    CHECK(makespan(inst, {0, 1}) == std::max(2 + 3, 4 + 7));
    CHECK(partial_makespan(inst, {kUnassigned, 0}) == 2 + 7);
    CHECK_THROWS_AS(makespan(inst, {0, kUnassigned}), ContractError);
    CHECK_THROWS_AS(makespan(inst, {0, 2}), ActionError);
}

TEST_CASE("single-slot step reward") {
    auto inst = std::make_shared<const HrapInstance>(tiny(5, 3));
    CHECK(psi(*inst) == 8);
    AssignmentState s(inst);
    const auto out = step(s, 0);
    CHECK(out.reward == Catch::Approx(-1.0));
    CHECK(out.done);
    CHECK_THROWS_AS(step(s, 0), EpisodeFinishedError);
}

TEST_CASE("invalid actions do not mutate the state") {
    auto [s, obs] = reset(HrapConfig{3, 2, 2}, 1);
    CHECK_THROWS_AS(step(s, 3), ActionError);
    CHECK_THROWS_AS(step(s, -1), ActionError);
    CHECK(s.slot_index == 0);
    CHECK(encode_state(s, ObservationMode::augmented) == obs);
}

TEST_CASE("observation layout") {
    CHECK(observation_size(HrapConfig{5, 4, 4}, ObservationMode::literal) == 109);
    CHECK(observation_size(HrapConfig{3, 2, 2}, ObservationMode::augmented) == 12 + 2 + 9 + 8);
    auto [s, obs] = reset(HrapConfig{3, 2, 2}, 9);
    const auto& inst = *s.instance;
    CHECK(obs.size() == 31);
    CHECK(obs[0] == Catch::Approx(inst.capability(0, 0, 0) / 20.0));
    CHECK(obs[12] == Catch::Approx(inst.event_time(0) / 20.0));
    CHECK(obs[23] == 1.0);
    const auto next = step(s, 2).observation;
    CHECK(next[23] == 0.0);
    CHECK(next[24] == 1.0);
    CHECK(next[27] == Catch::Approx(1.0));
    CHECK(next[28] == 0.0);
}

TEST_CASE("episode length, reward bounds and oracle consistency") {
    const HrapConfig cfg{3, 2, 2};
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto [s, obs] = reset(cfg, seed);
        const long m_star = brute_force_best(*s.instance).makespan;
        CHECK(m_star == enumerate_min(*s.instance));
        int steps = 0;
        double r = 0.0, prev = 0.0;
        while (!s.done) {
            r = step(s, static_cast<int>(rng() % 3)).reward;
            CHECK(r <= prev + 1e-15); // partial makespan never shrinks
            CHECK((r >= -1.0 && r <= 0.0));
            prev = r;
            ++steps;
        }
        CHECK(steps == 4);
        CHECK(-r * psi(*s.instance) >= m_star - 1e-9);
    }
}

TEST_CASE("replaying the oracle assignment reproduces the optimum reward") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        auto [s, obs] = reset(HrapConfig{2, 3, 2}, seed);
        const auto best = brute_force_best(*s.instance);
        double r = 0.0;
        for (int a : best.assignment) r = step(s, a).reward;
        CHECK(r == Catch::Approx(-static_cast<double>(best.makespan) / psi(*s.instance)));
    }
}

TEST_CASE("oracle ties resolve to the lexicographically smallest assignment") {
    HrapInstance inst(HrapConfig{2, 1, 1}, {5, 5}, {1}, {0, 3, 3, 0});
    CHECK(brute_force_best(inst).assignment == std::vector<int>{0});
}

TEST_CASE("oracle refuses oversized search spaces") {
    const auto inst = generate_instance(HrapConfig{5, 4, 4});
    CHECK_THROWS_AS(brute_force_best(inst), SearchSpaceError);
}

TEST_CASE("instance json round trip") {
    const auto inst = generate_instance(HrapConfig{3, 2, 2, 1, 20, 5});
    CHECK(instance_from_json(instance_to_json(inst)) == inst);
    auto j = instance_to_json(inst);
    j.erase("transition");
    CHECK_THROWS_AS(instance_from_json(j), SchemaError);
}

TEST_CASE("random baseline is deterministic and within bounds") {
    const double a = random_baseline(HrapConfig{3, 2, 2}, 200, 1);
    CHECK(a == random_baseline(HrapConfig{3, 2, 2}, 200, 1));
    CHECK((a > -1.0 && a < 0.0));
}
