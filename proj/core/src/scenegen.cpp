#include "traject/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "traject/errors.hpp"
#include "traject/geometry.hpp"
#include "traject/labeler.hpp"
#include "traject/rng.hpp"

namespace traject {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSubstep = 0.05;
constexpr int kSubstepsPerSample = 10;  // kDt / kSubstep
constexpr int kNumSubsteps = kSubstepsPerSample * (kWindowLen - 1);
constexpr double kComfortAccel = 4.0;
constexpr double kHardAccel = 8.0;
constexpr double kResumeAccel = 2.0;
constexpr double kCreepFloor = 0.25;
constexpr int kMaxAttempts = 100;
constexpr double kNever = 1e18;

Vec2 rotate(Vec2 p, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Open-loop speed profile along a lane: cruise at v0, brake at a_b from
/// t_brake down to v_slow, hold, then accelerate back toward v0 once the
/// distance mark is passed. Constant-speed agents use t_brake = kNever.
struct TrapezoidSpec {
    double v0 = 0.0;
    double t_brake = kNever;
    double a_b = 0.0;
    double v_slow = 0.0;
    double mark = kNever;
};

/// Distance/speed at every substep boundary, size kNumSubsteps + 1.
struct SimTrack {
    std::vector<double> s;
    std::vector<double> v;
};

SimTrack sim_trapezoid(const TrapezoidSpec& p) {
    SimTrack tr;
    tr.s.assign(kNumSubsteps + 1, 0.0);
    tr.v.assign(kNumSubsteps + 1, p.v0);
    double s = 0.0;
    double v = p.v0;
    bool passed = false;
    for (int k = 0; k < kNumSubsteps; ++k) {
        const double t = k * kSubstep;
        if (s >= p.mark) passed = true;
        if (passed) {
            v = std::min(p.v0, v + kResumeAccel * kSubstep);
        } else if (t >= p.t_brake) {
            v = std::max(p.v_slow, v - p.a_b * kSubstep);
        }
        s += v * kSubstep;
        tr.s[k + 1] = s;
        tr.v[k + 1] = v;
    }
    return tr;
}

/// Cruise at v0, then from t_change move the speed toward v_target at a
/// fixed rate. Handles both braking and accelerating leaders.
SimTrack sim_speed_change(double v0, double t_change, double accel, double v_target) {
    SimTrack tr;
    tr.s.assign(kNumSubsteps + 1, 0.0);
    tr.v.assign(kNumSubsteps + 1, v0);
    double s = 0.0;
    double v = v0;
    for (int k = 0; k < kNumSubsteps; ++k) {
        if (k * kSubstep >= t_change) {
            const double step = accel * kSubstep;
            v += std::clamp(v_target - v, -step, step);
        }
        s += v * kSubstep;
        tr.s[k + 1] = s;
        tr.v[k + 1] = v;
    }
    return tr;
}

/// Brake to a standstill at a_b from t_brake, hold, then pull away at a_r
/// from t_resume toward v_target. The resume trigger is a time, not a
/// distance mark, so the track can wait out another agent.
SimTrack sim_wait_resume(double v0, double t_brake, double a_b, double t_resume, double a_r,
                         double v_target) {
    SimTrack tr;
    tr.s.assign(kNumSubsteps + 1, 0.0);
    tr.v.assign(kNumSubsteps + 1, v0);
    double s = 0.0;
    double v = v0;
    for (int k = 0; k < kNumSubsteps; ++k) {
        const double t = k * kSubstep;
        if (t >= t_resume) {
            v = std::min(v_target, v + a_r * kSubstep);
        } else if (t >= t_brake) {
            v = std::max(0.0, v - a_b * kSubstep);
        }
        s += v * kSubstep;
        tr.s[k + 1] = s;
        tr.v[k + 1] = v;
    }
    return tr;
}

/// Follower with gap/speed feedback toward the leader's track. Gains are
/// soft on purpose: the response to a leader speed change builds up over
/// seconds instead of mirroring it instantly. One-way coupling: the leader
/// is simulated first and never reacts back.
SimTrack sim_follower(const SimTrack& leader, double gap0, double v0, double gap_des) {
    constexpr double kv = 0.5;
    constexpr double kd = 0.25;
    SimTrack tr;
    tr.s.assign(kNumSubsteps + 1, 0.0);
    tr.v.assign(kNumSubsteps + 1, v0);
    double s = 0.0;
    double v = v0;
    for (int k = 0; k < kNumSubsteps; ++k) {
        const double gap = gap0 + leader.s[k] - s;
        double a = kv * (leader.v[k] - v) + kd * (gap - gap_des);
        a = std::clamp(a, -kComfortAccel, kComfortAccel);
        v = std::max(0.0, v + a * kSubstep);
        s += v * kSubstep;
        tr.s[k + 1] = s;
        tr.v[k + 1] = v;
    }
    return tr;
}

/// Interpolated time at which the track first reaches `mark` meters,
/// or kNever if it never does.
double arrival_time(const SimTrack& tr, double mark) {
    for (int k = 1; k <= kNumSubsteps; ++k) {
        if (tr.s[k] >= mark) {
            const double prev = tr.s[k - 1];
            const double frac = (mark - prev) / (tr.s[k] - prev);
            return (k - 1 + frac) * kSubstep;
        }
    }
    return kNever;
}

/// Solves for the hold speed that makes the trapezoid reach `mark` at
/// `t_target` under the same integrator the scene uses. Returns a negative
/// value when even creeping at `floor` arrives too early.
double solve_hold_speed(double v0, double t_brake, double a_b, double mark, double t_target,
                        double floor) {
    auto arrival = [&](double vs) {
        return arrival_time(sim_trapezoid({v0, t_brake, a_b, vs, mark}), mark);
    };
    if (arrival(floor) < t_target) return -1.0;
    double lo = floor;   // arrives at or after t_target
    double hi = v0;      // arrives at or before t_target (mark <= v0 * t_target)
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (arrival(mid) > t_target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

/// Hold-speed solve with braking escalation: comfort decel first, then
/// harder up to the hard limit. The brake point never moves, so speed
/// profiles stay untouched before it. Negative when infeasible even at the
/// hard limit.
double solve_with_escalation(double v0, double t_brake, double* a_b, double mark,
                             double t_target, double floor) {
    double vs = solve_hold_speed(v0, t_brake, *a_b, mark, t_target, floor);
    if (vs >= 0.0) return vs;
    *a_b = std::min(2.0 * *a_b, kHardAccel);
    vs = solve_hold_speed(v0, t_brake, *a_b, mark, t_target, floor);
    if (vs >= 0.0) return vs;
    *a_b = kHardAccel;
    return solve_hold_speed(v0, t_brake, *a_b, mark, t_target, floor);
}

SceneAgent make_lane_agent(std::string id, Vec2 origin, Vec2 dir, const SimTrack& tr) {
    SceneAgent ag;
    ag.id = std::move(id);
    for (int k = 0; k < kWindowLen; ++k) {
        const int idx = k * kSubstepsPerSample;
        AgentState st;
        st.x = origin.x + dir.x * tr.s[idx];
        st.y = origin.y + dir.y * tr.s[idx];
        st.vx = dir.x * tr.v[idx];
        st.vy = dir.y * tr.v[idx];
        if (k < kPastLen) {
            ag.past.push_back(st);
        } else {
            ag.future.push_back(st);
        }
    }
    return ag;
}

/// Gaussian position noise on every sample; velocities are recomputed from
/// the noisy positions by finite differences so states stay self-consistent.
void apply_noise(Scene& scene, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (auto& ag : scene.agents) {
        std::vector<double> px(kWindowLen), py(kWindowLen);
        for (int k = 0; k < kWindowLen; ++k) {
            const AgentState& st = k < kPastLen ? ag.past[k] : ag.future[k - kPastLen];
            px[k] = st.x + sigma * rng.normal();
            py[k] = st.y + sigma * rng.normal();
        }
        for (int k = 0; k < kWindowLen; ++k) {
            const int a = std::max(0, k - 1);
            const int b = std::min(kWindowLen - 1, k + 1);
            const double span = (b - a) * scene.dt;
            AgentState& st = k < kPastLen ? ag.past[k] : ag.future[k - kPastLen];
            st.x = px[k];
            st.y = py[k];
            st.vx = (px[b] - px[a]) / span;
            st.vy = (py[b] - py[a]) / span;
        }
    }
}

void check_config(const ScenarioConfig& cfg) {
    if (cfg.num_agents < 2 || cfg.num_agents > 6) {
        throw DataError("scenario num_agents must be in [2, 6], got " +
                        std::to_string(cfg.num_agents));
    }
    if (!(cfg.speed_min > 0.0) || !(cfg.speed_max >= cfg.speed_min)) {
        throw DataError("scenario speed range must satisfy 0 < min <= max");
    }
    if (cfg.noise_sigma < 0.0) throw DataError("scenario noise_sigma must be >= 0");
}

InteractionLabel label_at(const Scene& labeled, int i, int j) {
    auto it = labeled.labels.find({i, j});
    if (it == labeled.labels.end()) return InteractionLabel::Ignoring;
    return it->second;
}

[[noreturn]] void give_up(const char* which, uint64_t seed) {
    std::ostringstream os;
    os << which << ": no feasible scenario after " << kMaxAttempts << " attempts (seed " << seed
       << ")";
    throw DataError(os.str());
}

std::string default_id(ScenarioKind k, uint64_t seed) {
    return std::string(kind_name(k)) + "-s" + std::to_string(seed);
}

uint64_t attempt_seed(uint64_t seed, int attempt) {
    return seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(attempt);
}

}  // namespace

const char* kind_name(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Crossing: return "crossing";
    case ScenarioKind::Following: return "following";
    case ScenarioKind::Independent: return "independent";
    case ScenarioKind::MultiIntersection: return "multi";
    }
    return "unknown";
}

ScenarioKind kind_from_name(const std::string& name) {
    if (name == "crossing") return ScenarioKind::Crossing;
    if (name == "following") return ScenarioKind::Following;
    if (name == "independent") return ScenarioKind::Independent;
    if (name == "multi") return ScenarioKind::MultiIntersection;
    throw std::invalid_argument("unknown scenario kind: " + name);
}

Scene gen_crossing(const ScenarioConfig& cfg, int yielder) {
    check_config(cfg);
    if (yielder != 0 && yielder != 1) {
        throw DataError("crossing yielder must be 0 or 1, got " + std::to_string(yielder));
    }
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt_seed(cfg.seed, attempt));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double turn = rng.below(2) ? 0.5 * kPi : -0.5 * kPi;
        const Vec2 center{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
        const double v_go = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double v_yl = rng.uniform(cfg.speed_min, cfg.speed_max);
        // Both agents hold speed through the whole observed past. The goer
        // clears the conflict point mid-future; the yielder would nominally
        // arrive a beat later and sheds the rest of the margin by braking
        // only after the current time.
        const double t_go = rng.uniform(6.3, 7.6);
        const double d_nom = rng.uniform(0.3, 1.1);
        const double gap = rng.uniform(std::max(1.0, d_nom + 0.3), 2.0);
        const double t_yl = t_go + gap;
        const double t_brake = rng.uniform(5.15, 5.6);
        double a_b = rng.uniform(2.0, kComfortAccel);

        const double mark_go = v_go * t_go;
        const double mark_yl = v_yl * (t_go + d_nom);
        const double v_slow =
            solve_with_escalation(v_yl, t_brake, &a_b, mark_yl, t_yl, kCreepFloor);
        if (v_slow < 0.0) continue;

        const SimTrack track_go = sim_trapezoid({v_go, kNever, 0.0, v_go, mark_go});
        const SimTrack track_yl = sim_trapezoid({v_yl, t_brake, a_b, v_slow, mark_yl});
        const double arr_go = arrival_time(track_go, mark_go);
        const double arr_yl = arrival_time(track_yl, mark_yl);
        if (std::abs(arr_go - t_go) > 0.2 || std::abs(arr_yl - t_yl) > 0.2) continue;
        if (arr_yl - arr_go < 0.5) continue;

        const Vec2 dir_go = rotate({1.0, 0.0}, phi);
        const Vec2 dir_yl = rotate({1.0, 0.0}, phi + turn);
        Scene scene;
        scene.scene_id = default_id(cfg.kind, cfg.seed);
        scene.agents.resize(2);
        const int goer = 1 - yielder;
        scene.agents[goer] =
            make_lane_agent("a" + std::to_string(goer), center - dir_go * mark_go, dir_go,
                            track_go);
        scene.agents[yielder] =
            make_lane_agent("a" + std::to_string(yielder), center - dir_yl * mark_yl, dir_yl,
                            track_yl);

        const Scene labeled = label_scene(scene);
        if (label_at(labeled, goer, yielder) != InteractionLabel::Going ||
            label_at(labeled, yielder, goer) != InteractionLabel::Yielding) {
            continue;
        }
        apply_noise(scene, cfg.noise_sigma, rng);
        return scene;
    }
    give_up("gen_crossing", cfg.seed);
}

Scene gen_crossing_wait(const ScenarioConfig& cfg, int waiter) {
    check_config(cfg);
    if (waiter != 0 && waiter != 1) {
        throw DataError("crossing waiter must be 0 or 1, got " + std::to_string(waiter));
    }
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt_seed(cfg.seed, attempt));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double turn = rng.below(2) ? 0.5 * kPi : -0.5 * kPi;
        const Vec2 center{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
        const double v_go = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double v_w = rng.uniform(cfg.speed_min, cfg.speed_max);
        // The waiter brakes to a stop short of the conflict point well before
        // the current time and pulls away again only once the goer has
        // cleared. It never reaches the conflict inside the window, so the
        // pair reads as non-interacting even though the restart time is set
        // entirely by the goer.
        const double t_go = rng.uniform(6.2, 7.2);
        const double t_resume = t_go + rng.uniform(0.35, 0.55);
        const double a_r = rng.uniform(2.0, 2.5);
        const double a_b = rng.uniform(3.2, 4.0);
        const double latest_brake = 4.7 - v_w / a_b;
        if (latest_brake < 1.5) continue;
        const double t_brake = rng.uniform(1.5, std::min(3.4, latest_brake));
        const double m_short = rng.uniform(12.0, 16.0);

        const SimTrack track_w = sim_wait_resume(v_w, t_brake, a_b, t_resume, a_r, v_w);
        const int idx_resume = static_cast<int>(t_resume / kSubstep);
        const double s_stop = track_w.s[idx_resume];
        const double s_end = track_w.s.back();
        const double mark_w = s_stop + m_short;
        if (s_end > mark_w - kDNear - 1.0) continue;
        if (s_end - s_stop < 1.5) continue;

        const double mark_go = v_go * t_go;
        const SimTrack track_go = sim_trapezoid({v_go, kNever, 0.0, v_go, mark_go});

        const Vec2 dir_go = rotate({1.0, 0.0}, phi);
        const Vec2 dir_w = rotate({1.0, 0.0}, phi + turn);
        Scene scene;
        scene.scene_id = default_id(cfg.kind, cfg.seed) + "-wait";
        scene.agents.resize(2);
        const int goer = 1 - waiter;
        scene.agents[goer] =
            make_lane_agent("a" + std::to_string(goer), center - dir_go * mark_go, dir_go,
                            track_go);
        scene.agents[waiter] =
            make_lane_agent("a" + std::to_string(waiter), center - dir_w * mark_w, dir_w,
                            track_w);

        const Scene labeled = label_scene(scene);
        if (label_at(labeled, goer, waiter) != InteractionLabel::Ignoring ||
            label_at(labeled, waiter, goer) != InteractionLabel::Ignoring) {
            continue;
        }
        apply_noise(scene, cfg.noise_sigma, rng);
        return scene;
    }
    give_up("gen_crossing_wait", cfg.seed);
}

Scene gen_crossing_symmetric(const ScenarioConfig& cfg) {
    check_config(cfg);
    Rng rng(splitmix64(cfg.seed ^ 0x51B6C7A2D90EULL));
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double turn = rng.below(2) ? 0.5 * kPi : -0.5 * kPi;
    const Vec2 center{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
    const double v0 = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double v1 = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double t_pass = rng.uniform(6.5, 8.0);
    const double jitter = rng.uniform(-0.05, 0.05);

    const double mark0 = v0 * t_pass;
    const double mark1 = v1 * (t_pass + jitter);
    const Vec2 dir0 = rotate({1.0, 0.0}, phi);
    const Vec2 dir1 = rotate({1.0, 0.0}, phi + turn);
    Scene scene;
    scene.scene_id = default_id(cfg.kind, cfg.seed) + "-sym";
    scene.agents.push_back(make_lane_agent("a0", center - dir0 * mark0, dir0,
                                           sim_trapezoid({v0, kNever, 0.0, v0, mark0})));
    scene.agents.push_back(make_lane_agent("a1", center - dir1 * mark1, dir1,
                                           sim_trapezoid({v1, kNever, 0.0, v1, mark1})));
    apply_noise(scene, cfg.noise_sigma, rng);
    return scene;
}

Scene gen_following(const ScenarioConfig& cfg) {
    check_config(cfg);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt_seed(cfg.seed, attempt));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 base{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
        const double v_lead = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double gap0 = rng.uniform(5.0, std::min(14.0, 3.2 * v_lead));
        const double v_fol = std::max(1.0, v_lead + rng.uniform(-1.0, 1.0));
        // The leader settles onto a new cruise speed just before the current
        // time; the soft follower gains push most of the catch-up into the
        // future half of the window.
        const bool brakes = rng.below(10) < 7;
        const double v2 = brakes ? v_lead * rng.uniform(0.55, 0.75)
                                 : std::min(v_lead * rng.uniform(1.15, 1.3),
                                            cfg.speed_max + 1.5);
        const double t_change = rng.uniform(3.4, 3.8);
        const double a_tr = std::max(2.8, std::abs(v2 - v_lead) / (4.9 - t_change));

        const SimTrack lead = sim_speed_change(v_lead, t_change, a_tr, v2);
        const SimTrack fol = sim_follower(lead, gap0, v_fol, gap0);

        double min_gap = gap0;
        double max_speed = v_fol;
        for (int k = 0; k <= kNumSubsteps; ++k) {
            min_gap = std::min(min_gap, gap0 + lead.s[k] - fol.s[k]);
            max_speed = std::max(max_speed, fol.v[k]);
        }
        if (min_gap < 2.0 || max_speed > cfg.speed_max + 3.0) continue;

        const Vec2 dir = rotate({1.0, 0.0}, phi);
        Scene scene;
        scene.scene_id = default_id(cfg.kind, cfg.seed);
        scene.agents.push_back(make_lane_agent("a0", base, dir, lead));
        scene.agents.push_back(make_lane_agent("a1", base - dir * gap0, dir, fol));

        const Scene labeled = label_scene(scene);
        if (label_at(labeled, 0, 1) != InteractionLabel::Going ||
            label_at(labeled, 1, 0) != InteractionLabel::Yielding) {
            continue;
        }
        apply_noise(scene, cfg.noise_sigma, rng);
        return scene;
    }
    give_up("gen_following", cfg.seed);
}

Scene gen_following_exact(const ScenarioConfig& cfg, double leader_speed, double follower_speed,
                          double gap) {
    check_config(cfg);
    if (!(leader_speed > 0.0) || !(follower_speed >= 0.0) || !(gap > 0.0)) {
        throw DataError("gen_following_exact: speeds and gap must be positive");
    }
    const SimTrack lead = sim_trapezoid({leader_speed, kNever, 0.0, leader_speed, kNever});
    const SimTrack fol = sim_follower(lead, gap, follower_speed, gap);
    Scene scene;
    scene.scene_id = default_id(cfg.kind, cfg.seed) + "-exact";
    scene.agents.push_back(make_lane_agent("a0", {0.0, 0.0}, {1.0, 0.0}, lead));
    scene.agents.push_back(make_lane_agent("a1", {-gap, 0.0}, {1.0, 0.0}, fol));
    Rng rng(splitmix64(cfg.seed ^ 0xF0110EULL));
    apply_noise(scene, cfg.noise_sigma, rng);
    return scene;
}

Scene gen_independent(const ScenarioConfig& cfg) {
    check_config(cfg);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt_seed(cfg.seed, attempt));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 base{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
        const Vec2 dir = rotate({1.0, 0.0}, phi);
        const Vec2 normal = rotate({0.0, 1.0}, phi);
        const double lateral = rng.uniform(5.0, 12.0) * (rng.below(2) ? 1.0 : -1.0);
        const bool same_dir = rng.below(2) == 0;
        const double v0 = rng.uniform(cfg.speed_min, cfg.speed_max);

        double v1;
        Vec2 origin1;
        Vec2 dir1;
        if (same_dir) {
            v1 = std::clamp(v0 + rng.uniform(-3.0, 3.0), cfg.speed_min, cfg.speed_max);
            origin1 = base + normal * lateral + dir * rng.uniform(-15.0, 15.0);
            dir1 = dir;
        } else {
            v1 = rng.uniform(cfg.speed_min, cfg.speed_max);
            const double t_meet = rng.uniform(3.5, 6.5);
            origin1 = base + normal * lateral + dir * ((v0 + v1) * t_meet);
            dir1 = dir * -1.0;
        }

        Scene scene;
        scene.scene_id = default_id(cfg.kind, cfg.seed);
        scene.agents.push_back(
            make_lane_agent("a0", base, dir, sim_trapezoid({v0, kNever, 0.0, v0, kNever})));
        scene.agents.push_back(
            make_lane_agent("a1", origin1, dir1, sim_trapezoid({v1, kNever, 0.0, v1, kNever})));

        const AgentState& c0 = scene.current(0);
        const AgentState& c1 = scene.current(1);
        const double dist = std::hypot(c0.x - c1.x, c0.y - c1.y);
        if (dist >= 95.0) continue;

        const Scene labeled = label_scene(scene);
        if (label_at(labeled, 0, 1) != InteractionLabel::Ignoring ||
            label_at(labeled, 1, 0) != InteractionLabel::Ignoring) {
            continue;
        }
        apply_noise(scene, cfg.noise_sigma, rng);
        return scene;
    }
    give_up("gen_independent", cfg.seed);
}

Scene gen_multi(const ScenarioConfig& cfg) {
    check_config(cfg);
    if (cfg.num_agents < 3) {
        throw DataError("gen_multi needs num_agents >= 3, got " +
                        std::to_string(cfg.num_agents));
    }
    // Right-hand lanes 1 m off the center line, one leg per compass direction.
    const Vec2 leg_dirs[4] = {{0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}};
    const int n_primary = std::min(cfg.num_agents, 4);
    const int n_follow = cfg.num_agents - n_primary;

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt_seed(cfg.seed, attempt));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 center{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
        const double lo = std::max(4.5, cfg.speed_min);
        const double hi = std::max(lo + 0.2, std::min(9.0, cfg.speed_max));

        int legs[4] = {0, 1, 2, 3};
        for (int i = 3; i > 0; --i) {
            std::swap(legs[i], legs[rng.below(static_cast<uint64_t>(i + 1))]);
        }
        const double t0 = rng.uniform(6.15, 6.45);
        const double slot_max = std::min(1.05, (9.2 - t0) / std::max(1, n_primary - 1));
        const double slot = rng.uniform(0.85, std::max(0.85 + 1e-9, slot_max));

        struct Primary {
            Vec2 origin_local;
            Vec2 dir_local;
            SimTrack track;
            double mark = 0.0;
            double t_slot = 0.0;
            int leg = 0;
            double v0 = 0.0;
        };
        std::vector<Primary> prim(n_primary);
        bool ok = true;
        for (int k = 0; k < n_primary && ok; ++k) {
            Primary& p = prim[k];
            p.leg = legs[k];
            p.dir_local = leg_dirs[p.leg];
            const Vec2 right = rotate(p.dir_local, -0.5 * kPi);
            p.v0 = rng.uniform(lo, hi);
            p.t_slot = t0 + k * slot;
            // Burdens below the slot spacing keep the unimpeded arrival order
            // equal to the slot order, so who must brake stays readable from
            // the current geometry.
            const double burden =
                k == 0 ? 0.0 : rng.uniform(0.25, std::min(0.85, slot - 0.15));
            p.mark = p.v0 * (p.t_slot - burden);
            p.origin_local = right - p.dir_local * p.mark;
            if (k == 0) {
                p.track = sim_trapezoid({p.v0, kNever, 0.0, p.v0, p.mark});
            } else {
                const double t_brake = rng.uniform(5.15, 5.5);
                double a_b = rng.uniform(2.0, kComfortAccel);
                const double v_slow =
                    solve_with_escalation(p.v0, t_brake, &a_b, p.mark, p.t_slot, 1.0);
                if (v_slow < 0.0) {
                    ok = false;
                    break;
                }
                p.track = sim_trapezoid({p.v0, t_brake, a_b, v_slow, p.mark});
            }
            if (std::abs(arrival_time(p.track, p.mark) - p.t_slot) > 0.25) ok = false;
        }
        if (!ok) continue;

        int leaders[4] = {0, 1, 2, 3};
        for (int i = n_primary - 1; i > 0; --i) {
            std::swap(leaders[i], leaders[rng.below(static_cast<uint64_t>(i + 1))]);
        }

        Scene scene;
        scene.scene_id = default_id(cfg.kind, cfg.seed);
        for (int k = 0; k < n_primary; ++k) {
            const Primary& p = prim[k];
            scene.agents.push_back(make_lane_agent("a" + std::to_string(k),
                                                   center + rotate(p.origin_local, phi),
                                                   rotate(p.dir_local, phi), p.track));
        }
        std::vector<int> follow_leader(n_follow);
        for (int f = 0; f < n_follow && ok; ++f) {
            const int li = leaders[f];
            const Primary& lead = prim[li];
            const double gap0 = rng.uniform(6.0, 9.0);
            const SimTrack track = sim_follower(lead.track, gap0, lead.v0, gap0);
            double min_gap = gap0;
            for (int k = 0; k <= kNumSubsteps; ++k) {
                min_gap = std::min(min_gap, gap0 + lead.track.s[k] - track.s[k]);
            }
            if (min_gap < 1.5) ok = false;
            follow_leader[f] = li;
            const int idx = n_primary + f;
            scene.agents.push_back(
                make_lane_agent("a" + std::to_string(idx),
                                center + rotate(lead.origin_local, phi) -
                                    rotate(lead.dir_local, phi) * gap0,
                                rotate(lead.dir_local, phi), track));
        }
        if (!ok) continue;

        const Scene labeled = label_scene(scene);
        for (int i = 0; i < n_primary && ok; ++i) {
            for (int j = i + 1; j < n_primary && ok; ++j) {
                const bool perpendicular = (prim[i].leg + prim[j].leg) % 2 == 1;
                if (!perpendicular) continue;
                if (label_at(labeled, i, j) != InteractionLabel::Going ||
                    label_at(labeled, j, i) != InteractionLabel::Yielding) {
                    ok = false;
                }
            }
        }
        for (int f = 0; f < n_follow && ok; ++f) {
            if (label_at(labeled, n_primary + f, follow_leader[f]) !=
                InteractionLabel::Yielding) {
                ok = false;
            }
        }
        if (!ok) continue;
        apply_noise(scene, cfg.noise_sigma, rng);
        return scene;
    }
    give_up("gen_multi", cfg.seed);
}

Scene gen_scene(const ScenarioConfig& cfg) {
    switch (cfg.kind) {
    case ScenarioKind::Crossing: {
        const uint64_t h = splitmix64(cfg.seed ^ 0xC105513ULL);
        const int actor = static_cast<int>(h & 1);
        if ((h >> 1) % 3 == 0) return gen_crossing_wait(cfg, actor);
        return gen_crossing(cfg, actor);
    }
    case ScenarioKind::Following: return gen_following(cfg);
    case ScenarioKind::Independent: return gen_independent(cfg);
    case ScenarioKind::MultiIntersection: return gen_multi(cfg);
    }
    throw DataError("gen_scene: unknown scenario kind");
}

DatasetMix parse_kind_mix(const std::string& spec) {
    DatasetMix mix;
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("mix item needs kind=count: " + item);
        }
        const std::string name = item.substr(0, eq);
        int count = 0;
        try {
            count = std::stoi(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad mix count in: " + item);
        }
        if (count < 0) throw std::invalid_argument("mix counts must be >= 0: " + item);
        switch (kind_from_name(name)) {
        case ScenarioKind::Crossing: mix.crossing = count; break;
        case ScenarioKind::Following: mix.following = count; break;
        case ScenarioKind::Independent: mix.independent = count; break;
        case ScenarioKind::MultiIntersection: mix.multi = count; break;
        }
    }
    return mix;
}

void gen_dataset(const DatasetMix& mix, uint64_t master_seed, const std::string& path,
                 double noise_sigma) {
    std::vector<Scene> scenes;
    scenes.reserve(static_cast<size_t>(std::max(0, mix.total())));
    const ScenarioKind kinds[4] = {ScenarioKind::Crossing, ScenarioKind::Following,
                                   ScenarioKind::Independent, ScenarioKind::MultiIntersection};
    const int counts[4] = {mix.crossing, mix.following, mix.independent, mix.multi};
    for (int ki = 0; ki < 4; ++ki) {
        const ScenarioKind kind = kinds[ki];
        const uint64_t base = splitmix64(master_seed ^ fnv1a64(kind_name(kind)));
        for (int i = 0; i < counts[ki]; ++i) {
            ScenarioConfig cfg;
            cfg.kind = kind;
            cfg.noise_sigma = noise_sigma;
            cfg.seed = splitmix64(base + static_cast<uint64_t>(i));
            if (kind == ScenarioKind::MultiIntersection) {
                cfg.num_agents = 3 + static_cast<int>(splitmix64(cfg.seed ^ 0xA9E17ULL) % 4);
            }
            Scene scene = gen_scene(cfg);
            char id[64];
            std::snprintf(id, sizeof(id), "%s_%06d", kind_name(kind), i);
            scene.scene_id = id;
            scene = label_scene(std::move(scene));
            compute_features(scene);
            scenes.push_back(std::move(scene));
        }
    }
    save_dataset(path, scenes);
}

}  // namespace traject
