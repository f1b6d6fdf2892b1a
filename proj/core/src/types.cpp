#include "traject/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "traject/errors.hpp"

namespace traject {

bool AgentState::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(vx) && std::isfinite(vy);
}

double AgentState::speed() const { return std::hypot(vx, vy); }

int label_to_int(InteractionLabel l) { return static_cast<int>(l); }

InteractionLabel label_from_int(int code) {
    switch (code) {
        case 0: return InteractionLabel::Ignoring;
        case 1: return InteractionLabel::Going;
        case 2: return InteractionLabel::Yielding;
        default: throw DataError("invalid interaction label code " + std::to_string(code));
    }
}

const char* label_name(InteractionLabel l) {
    switch (l) {
        case InteractionLabel::Ignoring: return "IGNORING";
        case InteractionLabel::Going: return "GOING";
        case InteractionLabel::Yielding: return "YIELDING";
    }
    return "?";
}

std::vector<PairKey> pairs_within_radius(const Scene& scene, double radius) {
    std::vector<PairKey> pairs;
    const int n = scene.num_agents();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const AgentState& a = scene.current(i);
            const AgentState& b = scene.current(j);
            if (std::hypot(b.x - a.x, b.y - a.y) < radius) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

std::vector<std::string> validate_trajectory(const Trajectory& traj, double slack) {
    std::vector<std::string> out;
    if (traj.states.empty()) {
        out.push_back("trajectory '" + traj.agent_id + "': states empty");
        return out;
    }
    if (!(traj.dt > 0.0)) {
        out.push_back("trajectory '" + traj.agent_id + "': dt must be > 0");
    }
    for (size_t t = 0; t < traj.states.size(); ++t) {
        if (!traj.states[t].finite()) {
            out.push_back("trajectory '" + traj.agent_id + "': non-finite state at index " +
                          std::to_string(t));
        }
    }
    if (!out.empty()) return out;
    for (size_t t = 0; t + 1 < traj.states.size(); ++t) {
        const AgentState& a = traj.states[t];
        const AgentState& b = traj.states[t + 1];
        const double step = std::hypot(b.x - a.x, b.y - a.y);
        const double bound = (std::max(a.speed(), b.speed()) + slack) * traj.dt;
        if (step > bound) {
            std::ostringstream os;
            os << "trajectory '" << traj.agent_id << "': step " << t << "->" << (t + 1)
               << " moves " << step << " m, exceeds speed-consistency bound " << bound << " m";
            out.push_back(os.str());
        }
    }
    return out;
}

std::vector<std::string> validate_scene(const Scene& scene) {
    std::vector<std::string> out;
    const int n = scene.num_agents();
    if (n < 1) {
        out.push_back("scene '" + scene.scene_id + "': no agents");
        return out;
    }
    if (!(scene.dt > 0.0)) out.push_back("scene '" + scene.scene_id + "': dt must be > 0");

    for (int i = 0; i < n; ++i) {
        const SceneAgent& a = scene.agents[i];
        if (static_cast<int>(a.past.size()) != kPastLen) {
            out.push_back("agent " + std::to_string(i) + ": past has " +
                          std::to_string(a.past.size()) + " samples, expected " +
                          std::to_string(kPastLen));
        }
        if (static_cast<int>(a.future.size()) != kFutureLen) {
            out.push_back("agent " + std::to_string(i) + ": future has " +
                          std::to_string(a.future.size()) + " samples, expected " +
                          std::to_string(kFutureLen));
        }
        for (size_t t = 0; t < a.past.size(); ++t) {
            if (!a.past[t].finite()) {
                out.push_back("agent " + std::to_string(i) + ": non-finite past state at index " +
                              std::to_string(t));
            }
        }
        for (size_t t = 0; t < a.future.size(); ++t) {
            if (!a.future[t].finite()) {
                out.push_back("agent " + std::to_string(i) +
                              ": non-finite future state at index " + std::to_string(t));
            }
        }
        for (int j = i + 1; j < n; ++j) {
            if (scene.agents[j].id == a.id) {
                out.push_back("agents " + std::to_string(i) + " and " + std::to_string(j) +
                              " share id '" + a.id + "'");
            }
        }
    }
    if (!out.empty()) return out;

    if (!scene.agent_features.empty() &&
        static_cast<int>(scene.agent_features.size()) != n) {
        out.push_back("agent_features rows = " + std::to_string(scene.agent_features.size()) +
                      ", expected " + std::to_string(n));
    }
    for (const auto& [key, feats] : scene.pair_features) {
        if (key.first < 0 || key.first >= n || key.second < 0 || key.second >= n ||
            key.first == key.second) {
            out.push_back("pair_features key (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ") out of range");
        }
        (void)feats;
    }

    if (scene.has_labels) {
        const std::vector<PairKey> expected = pairs_within_radius(scene);
        for (const PairKey& p : expected) {
            if (scene.labels.find(p) == scene.labels.end()) {
                out.push_back("missing label for in-radius pair (" + std::to_string(p.first) +
                              "," + std::to_string(p.second) + ")");
            }
        }
        for (const auto& [key, label] : scene.labels) {
            if (std::find(expected.begin(), expected.end(), key) == expected.end()) {
                out.push_back("label present for out-of-radius or invalid pair (" +
                              std::to_string(key.first) + "," + std::to_string(key.second) + ")");
            }
            const auto rev = scene.labels.find({key.second, key.first});
            if (rev == scene.labels.end()) continue;  // flagged by coverage above
            const InteractionLabel a = label;
            const InteractionLabel b = rev->second;
            const bool ok = (a == InteractionLabel::Ignoring && b == InteractionLabel::Ignoring) ||
                            (a == InteractionLabel::Going && b == InteractionLabel::Yielding) ||
                            (a == InteractionLabel::Yielding && b == InteractionLabel::Going);
            if (!ok) {
                out.push_back("label antisymmetry violated for pair (" +
                              std::to_string(key.first) + "," + std::to_string(key.second) +
                              "): " + label_name(a) + " vs " + label_name(b));
            }
        }
    }
    return out;
}

std::vector<Scene> window_tracks(const std::vector<TimedTrack>& tracks, int stride) {
    if (stride < 1) throw std::invalid_argument("window_tracks: stride must be >= 1");
    if (tracks.empty()) return {};

    const double dt = tracks[0].traj.dt;
    struct Placed {
        const TimedTrack* track;
        long long start;  // sample index on the shared clock
    };
    std::vector<Placed> placed;
    long long lo = 0, hi = 0;
    bool first = true;
    for (const TimedTrack& t : tracks) {
        if (t.traj.dt != dt) {
            throw DataError("window_tracks: track '" + t.traj.agent_id + "' has dt " +
                            std::to_string(t.traj.dt) + ", expected " + std::to_string(dt));
        }
        const double idx = t.start_time / dt;
        const long long start = std::llround(idx);
        if (std::abs(static_cast<double>(start) * dt - t.start_time) > 1e-9) {
            throw DataError("window_tracks: track '" + t.traj.agent_id + "' start time " +
                            std::to_string(t.start_time) + " is off the dt=" + std::to_string(dt) +
                            " sample grid");
        }
        const long long end = start + static_cast<long long>(t.traj.states.size()) - 1;
        if (first) {
            lo = start;
            hi = end;
            first = false;
        } else {
            lo = std::min(lo, start);
            hi = std::max(hi, end);
        }
        placed.push_back({&t, start});
    }

    std::vector<Scene> scenes;
    for (long long w = lo; w + kWindowLen - 1 <= hi; w += stride) {
        Scene scene;
        scene.scene_id = "w" + std::to_string(w);
        scene.dt = dt;
        for (const Placed& p : placed) {
            const long long end = p.start + static_cast<long long>(p.track->traj.states.size()) - 1;
            if (p.start > w || end < w + kWindowLen - 1) continue;  // does not cover the window
            const size_t off = static_cast<size_t>(w - p.start);
            SceneAgent agent;
            agent.id = p.track->traj.agent_id;
            agent.past.assign(p.track->traj.states.begin() + off,
                              p.track->traj.states.begin() + off + kPastLen);
            agent.future.assign(p.track->traj.states.begin() + off + kPastLen,
                                p.track->traj.states.begin() + off + kWindowLen);
            scene.agents.push_back(std::move(agent));
        }
        if (!scene.agents.empty()) scenes.push_back(std::move(scene));
    }
    return scenes;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json states_to_json(const std::vector<AgentState>& states) {
    ordered_json arr = ordered_json::array();
    for (const AgentState& s : states) arr.push_back({s.x, s.y, s.vx, s.vy});
    return arr;
}

std::vector<AgentState> states_from_json(const ordered_json& arr, const char* what) {
    if (!arr.is_array()) throw DataError(std::string(what) + " is not an array");
    std::vector<AgentState> out;
    out.reserve(arr.size());
    for (const auto& row : arr) {
        if (!row.is_array() || row.size() != 4) {
            throw DataError(std::string(what) + " sample is not [x,y,vx,vy]");
        }
        out.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                       row[3].get<double>()});
    }
    return out;
}

}  // namespace

std::string scene_to_json_line(const Scene& scene) {
    ordered_json j;
    j["scene_id"] = scene.scene_id;
    j["dt"] = scene.dt;
    j["agents"] = ordered_json::array();
    for (const SceneAgent& a : scene.agents) {
        ordered_json ja;
        ja["id"] = a.id;
        ja["past"] = states_to_json(a.past);
        ja["future"] = states_to_json(a.future);
        j["agents"].push_back(std::move(ja));
    }
    if (scene.has_labels) {
        ordered_json labels = ordered_json::array();
        for (const auto& [key, label] : scene.labels) {
            labels.push_back({{"i", key.first}, {"j", key.second}, {"label", label_to_int(label)}});
        }
        j["labels"] = std::move(labels);
    }
    if (!scene.agent_features.empty()) {
        j["agent_features"] = scene.agent_features;
        ordered_json pf = ordered_json::array();
        for (const auto& [key, feats] : scene.pair_features) {
            pf.push_back({{"i", key.first}, {"j", key.second}, {"f", feats}});
        }
        j["pair_features"] = std::move(pf);
    }
    return j.dump();
}

Scene scene_from_json_line(const std::string& line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
    try {
        Scene scene;
        scene.scene_id = j.at("scene_id").get<std::string>();
        scene.dt = j.at("dt").get<double>();
        for (const auto& ja : j.at("agents")) {
            SceneAgent a;
            a.id = ja.at("id").get<std::string>();
            a.past = states_from_json(ja.at("past"), "past");
            a.future = states_from_json(ja.at("future"), "future");
            scene.agents.push_back(std::move(a));
        }
        if (j.contains("labels")) {
            scene.has_labels = true;
            for (const auto& jl : j["labels"]) {
                const int i = jl.at("i").get<int>();
                const int jj = jl.at("j").get<int>();
                scene.labels[{i, jj}] = label_from_int(jl.at("label").get<int>());
            }
        }
        if (j.contains("agent_features")) {
            scene.agent_features = j["agent_features"].get<std::vector<std::vector<double>>>();
        }
        if (j.contains("pair_features")) {
            for (const auto& jp : j["pair_features"]) {
                scene.pair_features[{jp.at("i").get<int>(), jp.at("j").get<int>()}] =
                    jp.at("f").get<std::vector<double>>();
            }
        }
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid scene JSON: ") + e.what());
    }
}

void save_dataset(const std::string& path, const std::vector<Scene>& scenes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    for (const Scene& s : scenes) out << scene_to_json_line(s) << "\n";
    out.flush();
    if (!out) throw DataError("write to '" + path + "' failed");
}

std::vector<Scene> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::vector<Scene> scenes;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            scenes.push_back(scene_from_json_line(line));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scenes;
}

}  // namespace traject
