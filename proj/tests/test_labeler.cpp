#include <cmath>

#include "doctest.h"
#include "traject/errors.hpp"
#include "traject/geometry.hpp"
#include "traject/labeler.hpp"
#include "traject/rng.hpp"

using namespace traject;

namespace {

constexpr double kPi = 3.14159265358979323846;

// 10-sample future starting at `from`, moving at constant velocity.
Trajectory future_line(const std::string& id, Vec2 from, Vec2 vel) {
    Trajectory t;
    t.agent_id = id;
    t.dt = kDt;
    for (int k = 0; k < kFutureLen; ++k) {
        t.states.push_back({from.x + vel.x * kDt * k, from.y + vel.y * kDt * k, vel.x, vel.y});
    }
    return t;
}

Scene crossing_scene(double arrival_gap_s) {
    // Agent 0 northbound through (0,0); agent 1 eastbound, delayed by
    // arrival_gap_s relative to agent 0's arrival at the conflict point.
    Scene s;
    s.scene_id = "cross";
    const double v = 4.0;
    auto add_agent = [&](const std::string& id, Vec2 start, Vec2 vel) {
        SceneAgent a;
        a.id = id;
        for (int k = 0; k < kPastLen; ++k) {
            const double t = (k - (kPastLen - 1)) * kDt;
            a.past.push_back({start.x + vel.x * t, start.y + vel.y * t, vel.x, vel.y});
        }
        for (int k = 1; k <= kFutureLen; ++k) {
            const double t = k * kDt;
            a.future.push_back({start.x + vel.x * t, start.y + vel.y * t, vel.x, vel.y});
        }
        s.agents.push_back(std::move(a));
    };
    // Agent 0 reaches (0,0) 2 s into the future.
    add_agent("a0", {0, -2.0 * v}, {0, v});
    // Agent 1 reaches (0,0) (2 + gap) s into the future.
    add_agent("a1", {-(2.0 + arrival_gap_s) * v, 0}, {v, 0});
    return s;
}

}  // namespace

TEST_CASE("label_pair matches the analytic arrival-order oracle") {
    // i crosses (0,0) at t=2.0, j at t=3.5.
    auto i = future_line("i", {0, -8}, {0, 4});
    auto j = future_line("j", {-14, 0}, {4, 0});
    CHECK(label_pair(i, j) == InteractionLabel::Going);
    CHECK(label_pair(j, i) == InteractionLabel::Yielding);
}

TEST_CASE("non-crossing parallel futures are IGNORING both ways") {
    auto i = future_line("i", {0, 0}, {4, 0});
    auto j = future_line("j", {0, 10}, {4, 0});
    CHECK(label_pair(i, j) == InteractionLabel::Ignoring);
    CHECK(label_pair(j, i) == InteractionLabel::Ignoring);
}

TEST_CASE("simultaneous arrivals break ties toward the smaller id") {
    auto i = future_line("agent_a", {0, -8}, {0, 4});
    auto j = future_line("agent_b", {-8, 0}, {4, 0});
    // Both reach (0,0) at exactly t=2.
    CHECK(label_pair(i, j) == InteractionLabel::Going);
    CHECK(label_pair(j, i) == InteractionLabel::Yielding);
}

TEST_CASE("near-tie within epsilon also uses the id tie-break") {
    auto i = future_line("a", {0, -8}, {0, 4});
    // j arrives 0.1 s later: inside the 0.25 s tie window.
    auto j = future_line("b", {-8.4, 0}, {4, 0});
    CHECK(label_pair(i, j) == InteractionLabel::Going);
    CHECK(label_pair(j, i) == InteractionLabel::Yielding);
    // Outside the window the real order decides: j arrives 1 s later.
    auto j2 = future_line("b", {-12, 0}, {4, 0});
    CHECK(label_pair(i, j2) == InteractionLabel::Going);
    CHECK(label_pair(j2, i) == InteractionLabel::Yielding);
}

TEST_CASE("label_pair rejects mismatched horizons") {
    auto i = future_line("i", {0, 0}, {1, 0});
    auto j = future_line("j", {0, 1}, {1, 0});
    j.states.pop_back();
    CHECK_THROWS_AS(label_pair(i, j), DataError);
}

TEST_CASE("labels are invariant under rigid transforms") {
    Rng rng(606);
    int non_ignoring = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto i = future_line("i", {rng.uniform(-10, 10), rng.uniform(-10, 10)},
                             {rng.uniform(-5, 5), rng.uniform(-5, 5)});
        auto j = future_line("j", {rng.uniform(-10, 10), rng.uniform(-10, 10)},
                             {rng.uniform(-5, 5), rng.uniform(-5, 5)});
        const InteractionLabel base = label_pair(i, j);
        if (base != InteractionLabel::Ignoring) ++non_ignoring;

        const double theta = rng.uniform(-kPi, kPi);
        const Vec2 shift{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        auto transform = [&](Trajectory t) {
            for (AgentState& s : t.states) {
                const double c = std::cos(theta), sn = std::sin(theta);
                const double x = c * s.x - sn * s.y + shift.x;
                const double y = sn * s.x + c * s.y + shift.y;
                const double vx = c * s.vx - sn * s.vy;
                const double vy = sn * s.vx + c * s.vy;
                s = {x, y, vx, vy};
            }
            return t;
        };
        CHECK(label_pair(transform(i), transform(j)) == base);
    }
    CHECK(non_ignoring > 10);  // the sampled boxes collide often enough
}

TEST_CASE("label_scene labels exactly the in-radius pairs, antisymmetric") {
    Scene s = crossing_scene(1.5);
    Scene labeled = label_scene(s);
    CHECK(labeled.has_labels);
    REQUIRE(labeled.labels.size() == 2);
    CHECK(labeled.labels.at({0, 1}) == InteractionLabel::Going);
    CHECK(labeled.labels.at({1, 0}) == InteractionLabel::Yielding);
    CHECK(validate_scene(labeled).empty());
}

TEST_CASE("agents beyond 100 m get no labels") {
    Scene s;
    s.scene_id = "far";
    for (int a = 0; a < 2; ++a) {
        SceneAgent agent;
        agent.id = "a" + std::to_string(a);
        const double x0 = a * 150.0;
        for (int k = 0; k < kPastLen; ++k) agent.past.push_back({x0 + 2.0 * k, 0, 4, 0});
        for (int k = 0; k < kFutureLen; ++k) {
            agent.future.push_back({x0 + 2.0 * (kPastLen + k), 0, 4, 0});
        }
        s.agents.push_back(std::move(agent));
    }
    Scene labeled = label_scene(s);
    CHECK(labeled.has_labels);
    CHECK(labeled.labels.empty());
    CHECK(validate_scene(labeled).empty());
}

TEST_CASE("three mutually close agents get all six ordered labels") {
    Scene s;
    s.scene_id = "trio";
    const double headings[3] = {0.0, 2.0, 4.0};
    for (int a = 0; a < 3; ++a) {
        SceneAgent agent;
        agent.id = "a" + std::to_string(a);
        const double vx = 4.0 * std::cos(headings[a]);
        const double vy = 4.0 * std::sin(headings[a]);
        const double x0 = 20.0 * std::cos(2.1 * a);
        const double y0 = 20.0 * std::sin(2.1 * a);
        for (int k = 0; k < kPastLen; ++k) {
            const double t = (k - (kPastLen - 1)) * kDt;
            agent.past.push_back({x0 + vx * t, y0 + vy * t, vx, vy});
        }
        for (int k = 1; k <= kFutureLen; ++k) {
            const double t = k * kDt;
            agent.future.push_back({x0 + vx * t, y0 + vy * t, vx, vy});
        }
        s.agents.push_back(std::move(agent));
    }
    Scene labeled = label_scene(s);
    CHECK(labeled.labels.size() == 6);
    CHECK(validate_scene(labeled).empty());
}

TEST_CASE("label_scene without futures is a data error") {
    Scene s = crossing_scene(1.0);
    s.agents[0].future.clear();
    CHECK_THROWS_AS(label_scene(s), DataError);
}

TEST_CASE("labeling is deterministic") {
    Scene a = label_scene(crossing_scene(0.0));
    Scene b = label_scene(crossing_scene(0.0));
    CHECK(a.labels == b.labels);
}
