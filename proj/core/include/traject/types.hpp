#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace traject {

// Sampling interval shared by the whole pipeline.
inline constexpr double kDt = 0.5;
// Samples per scene window: 11 past (current state last) + 10 future.
inline constexpr int kPastLen = 11;
inline constexpr int kFutureLen = 10;
inline constexpr int kWindowLen = kPastLen + kFutureLen;
// Agents closer than this at the current time form labeled/predicted pairs.
inline constexpr double kPairRadius = 100.0;

/// 2D position + velocity of one agent at one sample.
struct AgentState {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;

    bool finite() const;
    double speed() const;
};

/// A contiguous sequence of states for one agent at fixed dt.
struct Trajectory {
    std::string agent_id;
    std::vector<AgentState> states;
    double dt = kDt;
};

/// A trajectory whose first sample sits at `start_time` on the shared clock.
struct TimedTrack {
    Trajectory traj;
    double start_time = 0.0;
};

/// How agent i relates to agent j, derived from future path crossings.
/// Integer codes are fixed for serialization.
enum class InteractionLabel : int { Ignoring = 0, Going = 1, Yielding = 2 };

int label_to_int(InteractionLabel l);
InteractionLabel label_from_int(int code);
const char* label_name(InteractionLabel l);

using PairKey = std::pair<int, int>;

struct SceneAgent {
    std::string id;
    std::vector<AgentState> past;    // kPastLen samples; index 10 is the current time
    std::vector<AgentState> future;  // kFutureLen samples
};

/// One windowed multi-agent episode. Feature blocks and labels are optional
/// caches: empty feature containers mean "compute on demand"; has_labels
/// distinguishes an unlabeled scene from a labeled scene with no pairs in
/// radius.
struct Scene {
    std::string scene_id;
    double dt = kDt;
    std::vector<SceneAgent> agents;
    std::vector<std::vector<double>> agent_features;  // N x F_a when computed
    std::map<PairKey, std::vector<double>> pair_features;
    std::map<PairKey, InteractionLabel> labels;
    bool has_labels = false;

    int num_agents() const { return static_cast<int>(agents.size()); }
    const AgentState& current(int agent) const { return agents[agent].past.back(); }
};

/// Ordered pairs (i, j), i != j, whose current-time distance is strictly
/// below `radius`. Deterministic (i-major) order.
std::vector<PairKey> pairs_within_radius(const Scene& scene, double radius = kPairRadius);

/// Trajectory invariant check: non-empty, dt > 0, finite states, and
/// consecutive positions consistent with speeds up to `slack` (m/s).
/// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_trajectory(const Trajectory& traj, double slack = 5.0);

/// Scene invariant check: per-agent lengths, finiteness, unique ids, feature
/// shapes, label coverage (exactly the in-radius ordered pairs) and label
/// antisymmetry. Returns violations; empty means valid.
std::vector<std::string> validate_scene(const Scene& scene);

/// Slices aligned tracks into scene windows of kWindowLen samples advancing
/// by `stride`. Agents not covering a full window are dropped from that
/// window; windows with no agents produce no Scene.
/// Throws DataError when tracks disagree on dt or start off the sample grid.
std::vector<Scene> window_tracks(const std::vector<TimedTrack>& tracks, int stride);

/// JSON Lines dataset: one Scene per line. save_dataset writes deterministic,
/// full-precision output (byte-identical for identical scenes); load_dataset
/// throws DataError with the line number on malformed input.
void save_dataset(const std::string& path, const std::vector<Scene>& scenes);
std::vector<Scene> load_dataset(const std::string& path);

/// Single-scene JSON (de)serialization used by the dataset I/O and tests.
std::string scene_to_json_line(const Scene& scene);
Scene scene_from_json_line(const std::string& line);

}  // namespace traject
