#include "traject/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace traject {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double Vec2::norm() const { return std::hypot(x, y); }

double normalize_angle(double a) {
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

Frame frame_of(const AgentState& state, double fallback_heading) {
    Frame f;
    f.origin = {state.x, state.y};
    if (state.speed() >= kHeadingSpeedMin) {
        f.heading = normalize_angle(std::atan2(state.vy, state.vx));
    } else {
        f.heading = normalize_angle(fallback_heading);
    }
    return f;
}

double past_fallback_heading(const std::vector<AgentState>& past, int upto) {
    for (int t = std::min<int>(upto, static_cast<int>(past.size()) - 1); t >= 0; --t) {
        if (past[static_cast<size_t>(t)].speed() >= kHeadingSpeedMin) {
            return std::atan2(past[static_cast<size_t>(t)].vy, past[static_cast<size_t>(t)].vx);
        }
    }
    return 0.0;
}

Vec2 to_local(const Frame& frame, Vec2 point) {
    return to_local_velocity(frame, point - frame.origin);
}

Vec2 to_local_velocity(const Frame& frame, Vec2 v) {
    const double c = std::cos(frame.heading);
    const double s = std::sin(frame.heading);
    return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

Vec2 from_local(const Frame& frame, Vec2 point) {
    return from_local_velocity(frame, point) + frame.origin;
}

Vec2 from_local_velocity(const Frame& frame, Vec2 v) {
    const double c = std::cos(frame.heading);
    const double s = std::sin(frame.heading);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

std::array<double, 4> relative_edge_attr(const AgentState& src_state, const AgentState& dst_state,
                                         const Frame& src_frame) {
    (void)src_state;  // the frame already encodes the source pose
    const Vec2 p = to_local(src_frame, {dst_state.x, dst_state.y});
    const Vec2 v = to_local_velocity(src_frame, {dst_state.vx, dst_state.vy});
    return {p.x, p.y, v.x, v.y};
}

std::vector<double> agent_features_of(const SceneAgent& agent) {
    const std::vector<AgentState>& past = agent.past;
    const AgentState& cur = past.back();

    double speed_sum = 0.0;
    double path_len = 0.0;
    double heading_change = 0.0;
    double heading = 0.0;
    bool have_heading = false;
    double prev_heading = 0.0;
    for (size_t t = 0; t < past.size(); ++t) {
        speed_sum += past[t].speed();
        if (t > 0) {
            path_len += std::hypot(past[t].x - past[t - 1].x, past[t].y - past[t - 1].y);
        }
        if (past[t].speed() >= kHeadingSpeedMin) {
            heading = std::atan2(past[t].vy, past[t].vx);
            have_heading = true;
        }
        // Below the speed threshold the heading holds its previous value, so
        // stopped stretches contribute no change.
        if (t > 0) heading_change += std::abs(normalize_angle(heading - prev_heading));
        prev_heading = heading;
    }
    (void)have_heading;
    return {cur.speed(), speed_sum / static_cast<double>(past.size()), heading_change, path_len};
}

std::vector<double> pair_features_of(const SceneAgent& agent_i, const SceneAgent& agent_j) {
    const AgentState& si = agent_i.past.back();
    const AgentState& sj = agent_j.past.back();
    const Frame fi = frame_of(si, past_fallback_heading(agent_i.past,
                                                        static_cast<int>(agent_i.past.size()) - 1));
    const Frame fj = frame_of(sj, past_fallback_heading(agent_j.past,
                                                        static_cast<int>(agent_j.past.size()) - 1));

    const Vec2 dp{sj.x - si.x, sj.y - si.y};
    const Vec2 dv{sj.vx - si.vx, sj.vy - si.vy};
    const double dist = dp.norm();
    const Vec2 local = to_local(fi, {sj.x, sj.y});
    const double bearing = (local.x == 0.0 && local.y == 0.0) ? 0.0 : std::atan2(local.y, local.x);
    const double closing = dist > 1e-12 ? -dp.dot(dv) / dist : 0.0;
    const double heading_diff = normalize_angle(fj.heading - fi.heading);
    const double speed_diff = sj.speed() - si.speed();
    return {dist, bearing, closing, heading_diff, speed_diff};
}

void compute_features(Scene& scene) {
    scene.agent_features.clear();
    scene.pair_features.clear();
    for (const SceneAgent& a : scene.agents) {
        scene.agent_features.push_back(agent_features_of(a));
    }
    for (const PairKey& p : pairs_within_radius(scene)) {
        scene.pair_features[p] = pair_features_of(scene.agents[static_cast<size_t>(p.first)],
                                                  scene.agents[static_cast<size_t>(p.second)]);
    }
}

namespace {

struct SegmentHit {
    double s = 0.0;  // param on segment a
    double u = 0.0;  // param on segment b
    Vec2 point;
};

// Exact intersection of segments [p0,p1] and [q0,q1], including collinear
// overlap (resolved to the point segment a reaches first) and degenerate
// (zero-length) segments.
std::optional<SegmentHit> intersect_segments(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    const Vec2 d1 = p1 - p0;
    const Vec2 d2 = q1 - q0;
    const double a = d1.dot(d1);
    const double e = d2.dot(d2);
    const double denom = cross(d1, d2);
    const double scale = std::max(1.0, std::sqrt(a * e));

    if (std::abs(denom) > 1e-12 * scale) {
        const Vec2 w = q0 - p0;
        const double s = cross(w, d2) / denom;
        const double u = cross(w, d1) / denom;
        const double tol = 1e-9;
        if (s < -tol || s > 1.0 + tol || u < -tol || u > 1.0 + tol) return std::nullopt;
        SegmentHit hit;
        hit.s = clamp01(s);
        hit.u = clamp01(u);
        hit.point = p0 + d1 * hit.s;
        return hit;
    }

    // Parallel. Reject unless collinear.
    const Vec2 w = q0 - p0;
    const double dir_scale = std::max(1.0, std::max(std::sqrt(a), std::sqrt(e)) * w.norm());
    const Vec2 ref = a > e ? d1 : d2;
    if (std::abs(cross(w, ref)) > 1e-9 * dir_scale && (a > 1e-18 || e > 1e-18)) {
        return std::nullopt;
    }

    if (a <= 1e-18 && e <= 1e-18) {
        // Two points.
        if ((q0 - p0).norm() > 1e-9) return std::nullopt;
        return SegmentHit{0.0, 0.0, p0};
    }
    if (a <= 1e-18) {
        // a is a point on line b; check it lies within the segment.
        const double u = clamp01((p0 - q0).dot(d2) / e);
        const Vec2 on_b = q0 + d2 * u;
        if ((on_b - p0).norm() > 1e-9) return std::nullopt;
        return SegmentHit{0.0, u, p0};
    }
    if (e <= 1e-18) {
        const double s = clamp01((q0 - p0).dot(d1) / a);
        const Vec2 on_a = p0 + d1 * s;
        if ((on_a - q0).norm() > 1e-9) return std::nullopt;
        return SegmentHit{s, 0.0, q0};
    }

    // Collinear overlap: earliest point along a's direction of travel.
    const double tq0 = (q0 - p0).dot(d1) / a;
    const double tq1 = (q1 - p0).dot(d1) / a;
    const double lo = std::max(0.0, std::min(tq0, tq1));
    const double hi = std::min(1.0, std::max(tq0, tq1));
    if (lo > hi + 1e-12) return std::nullopt;
    SegmentHit hit;
    hit.s = clamp01(lo);
    hit.point = p0 + d1 * hit.s;
    hit.u = clamp01((hit.point - q0).dot(d2) / e);
    return hit;
}

// Closest points between two segments (Ericson, Real-Time Collision
// Detection, 5.1.9). Returns squared distance; s/u are the params.
double closest_point_segments(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1, double& s, double& u) {
    const Vec2 d1 = p1 - p0;
    const Vec2 d2 = q1 - q0;
    const Vec2 r = p0 - q0;
    const double a = d1.dot(d1);
    const double e = d2.dot(d2);
    const double f = d2.dot(r);
    constexpr double kEps = 1e-18;

    if (a <= kEps && e <= kEps) {
        s = u = 0.0;
    } else if (a <= kEps) {
        s = 0.0;
        u = clamp01(f / e);
    } else {
        const double c = d1.dot(r);
        if (e <= kEps) {
            u = 0.0;
            s = clamp01(-c / a);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > kEps ? clamp01((b * f - c * e) / denom) : 0.0;
            u = (b * s + f) / e;
            if (u < 0.0) {
                u = 0.0;
                s = clamp01(-c / a);
            } else if (u > 1.0) {
                u = 1.0;
                s = clamp01((b - c) / a);
            }
        }
    }
    const Vec2 ca = p0 + d1 * s;
    const Vec2 cb = q0 + d2 * u;
    return (cb - ca).dot(cb - ca);
}

}  // namespace

std::optional<PathCrossing> path_crossing(const Trajectory& traj_i, const Trajectory& traj_j,
                                          double d_near) {
    if (traj_i.dt != traj_j.dt) {
        throw std::invalid_argument("path_crossing: trajectories disagree on dt");
    }
    const double dt = traj_i.dt;
    const auto& si = traj_i.states;
    const auto& sj = traj_j.states;
    if (si.empty() || sj.empty()) return std::nullopt;

    // Single-sample trajectories degenerate to points; widen to zero-length
    // segments so the same scan covers them.
    const size_t na = std::max<size_t>(si.size() - 1, 1);
    const size_t nb = std::max<size_t>(sj.size() - 1, 1);
    auto seg = [](const std::vector<AgentState>& s, size_t k) {
        const size_t k1 = std::min(k + 1, s.size() - 1);
        return std::pair<Vec2, Vec2>{{s[k].x, s[k].y}, {s[k1].x, s[k1].y}};
    };

    std::optional<PathCrossing> best;
    for (size_t a = 0; a < na; ++a) {
        const auto [p0, p1] = seg(si, a);
        for (size_t b = 0; b < nb; ++b) {
            const auto [q0, q1] = seg(sj, b);
            const auto hit = intersect_segments(p0, p1, q0, q1);
            if (!hit) continue;
            PathCrossing c;
            c.point = hit->point;
            c.t_i = (static_cast<double>(a) + hit->s) * dt;
            c.t_j = (static_cast<double>(b) + hit->u) * dt;
            if (!best || c.t_i < best->t_i - 1e-12 ||
                (std::abs(c.t_i - best->t_i) <= 1e-12 && c.t_j < best->t_j - 1e-12)) {
                best = c;
            }
        }
    }
    if (best) return best;

    // Near-miss fallback: global closest approach of the two polylines.
    // Strict improvement keeps the first-found pair on exact ties, making
    // scan order the deterministic tie-break; the epsilon keeps a distance
    // of exactly d_near inside the threshold.
    double best_d2 = d_near * d_near * (1.0 + 1e-12);
    for (size_t a = 0; a < na; ++a) {
        const auto [p0, p1] = seg(si, a);
        for (size_t b = 0; b < nb; ++b) {
            const auto [q0, q1] = seg(sj, b);
            double s = 0.0, u = 0.0;
            const double d2 = closest_point_segments(p0, p1, q0, q1, s, u);
            if (d2 >= best_d2) continue;
            const Vec2 ca = p0 + (p1 - p0) * s;
            const Vec2 cb = q0 + (q1 - q0) * u;
            PathCrossing c;
            c.point = (ca + cb) * 0.5;
            c.t_i = (static_cast<double>(a) + s) * dt;
            c.t_j = (static_cast<double>(b) + u) * dt;
            best = c;
            best_d2 = d2;
        }
    }
    return best;
}

}  // namespace traject
