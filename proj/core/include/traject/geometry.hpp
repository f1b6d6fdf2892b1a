#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "traject/types.hpp"

namespace traject {

// Below this speed a velocity carries no usable heading.
inline constexpr double kHeadingSpeedMin = 0.1;
// Polylines approaching closer than this count as crossing (sampled paths of
// genuinely conflicting trajectories can pass between samples).
inline constexpr double kDNear = 1.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const;
};

/// Agent-centric reference frame: origin at the agent, x axis along its
/// heading. heading is normalized into (-pi, pi].
struct Frame {
    Vec2 origin;
    double heading = 0.0;
};

/// Where two future paths meet, with each agent's linearly interpolated
/// arrival time (seconds from the start of the futures).
struct PathCrossing {
    Vec2 point;
    double t_i = 0.0;
    double t_j = 0.0;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Frame at the state's position, heading from its velocity when the speed
/// is at least kHeadingSpeedMin, else `fallback_heading`.
Frame frame_of(const AgentState& state, double fallback_heading = 0.0);

/// Most recent usable heading in past[0..upto], or 0 when the agent never
/// moved; feeds frame_of's fallback for slow/stopped agents.
double past_fallback_heading(const std::vector<AgentState>& past, int upto);

Vec2 to_local(const Frame& frame, Vec2 point);
Vec2 to_local_velocity(const Frame& frame, Vec2 v);
Vec2 from_local(const Frame& frame, Vec2 point);
Vec2 from_local_velocity(const Frame& frame, Vec2 v);

/// Position and velocity of dst expressed in src's frame: the directed-edge
/// attribute vector [dx, dy, dvx, dvy].
std::array<double, 4> relative_edge_attr(const AgentState& src_state, const AgentState& dst_state,
                                         const Frame& src_frame);

inline constexpr int kAgentFeatureDim = 4;
inline constexpr int kPairFeatureDim = 5;

/// Agent features (F_a = 4): current speed, mean past speed, total absolute
/// heading change over the past, past path length.
std::vector<double> agent_features_of(const SceneAgent& agent);

/// Pair features (F_p = 5) at the current time: distance, bearing of j in
/// i's frame, closing speed, wrapped heading difference, speed difference.
std::vector<double> pair_features_of(const SceneAgent& agent_i, const SceneAgent& agent_j);

/// Fills scene.agent_features (all agents) and scene.pair_features (ordered
/// pairs within kPairRadius at the current time).
void compute_features(Scene& scene);

/// First crossing of the two position polylines in agent-i time order.
/// Exact segment intersections win; when none exists, a closest-approach
/// within d_near counts, with the midpoint of the closest points as the
/// crossing point. Arrival times are interpolated within the segments.
std::optional<PathCrossing> path_crossing(const Trajectory& traj_i, const Trajectory& traj_j,
                                          double d_near = kDNear);

}  // namespace traject
