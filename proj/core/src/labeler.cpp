#include "traject/labeler.hpp"

#include "traject/errors.hpp"
#include "traject/geometry.hpp"

namespace traject {

InteractionLabel mirror_label(InteractionLabel l) {
    switch (l) {
        case InteractionLabel::Going: return InteractionLabel::Yielding;
        case InteractionLabel::Yielding: return InteractionLabel::Going;
        case InteractionLabel::Ignoring: return InteractionLabel::Ignoring;
    }
    return InteractionLabel::Ignoring;
}

InteractionLabel label_pair(const Trajectory& future_i, const Trajectory& future_j,
                            double tie_eps) {
    if (future_i.states.size() != future_j.states.size() || future_i.dt != future_j.dt) {
        throw DataError("label_pair: futures cover different horizons (" +
                        std::to_string(future_i.states.size()) + " samples at dt " +
                        std::to_string(future_i.dt) + " vs " +
                        std::to_string(future_j.states.size()) + " at dt " +
                        std::to_string(future_j.dt) + ")");
    }

    // Compute the crossing once, in id order, so (i,j) and (j,i) see the
    // same crossing with roles swapped; that makes antisymmetry structural
    // rather than a numerical accident.
    const bool i_is_canonical = future_i.agent_id <= future_j.agent_id;
    const Trajectory& first = i_is_canonical ? future_i : future_j;
    const Trajectory& second = i_is_canonical ? future_j : future_i;
    const auto crossing = path_crossing(first, second);
    if (!crossing) return InteractionLabel::Ignoring;

    const double t_i = i_is_canonical ? crossing->t_i : crossing->t_j;
    const double t_j = i_is_canonical ? crossing->t_j : crossing->t_i;
    if (t_i < t_j - tie_eps) return InteractionLabel::Going;
    if (t_i > t_j + tie_eps) return InteractionLabel::Yielding;
    return future_i.agent_id < future_j.agent_id ? InteractionLabel::Going
                                                 : InteractionLabel::Yielding;
}

Scene label_scene(Scene scene) {
    for (const SceneAgent& a : scene.agents) {
        if (a.future.empty()) {
            throw DataError("label_scene: scene '" + scene.scene_id + "' agent '" + a.id +
                            "' has no future states");
        }
    }
    auto future_of = [&](int k) {
        Trajectory t;
        t.agent_id = scene.agents[static_cast<size_t>(k)].id;
        t.states = scene.agents[static_cast<size_t>(k)].future;
        t.dt = scene.dt;
        return t;
    };

    scene.labels.clear();
    scene.has_labels = true;
    for (const PairKey& p : pairs_within_radius(scene)) {
        if (p.first > p.second) continue;  // fill both directions from (i<j)
        const InteractionLabel l = label_pair(future_of(p.first), future_of(p.second));
        scene.labels[p] = l;
        scene.labels[{p.second, p.first}] = mirror_label(l);
    }
    return scene;
}

}  // namespace traject
