#pragma once

#include "traject/types.hpp"

namespace traject {

// Arrivals closer than this (seconds, half a sample) count as simultaneous
// and fall to the deterministic id tie-break.
inline constexpr double kTieEps = 0.25;

/// Label of agent i toward agent j from their future paths: IGNORING when
/// the paths never cross, GOING when i clears the crossing first, YIELDING
/// when j does. Near-ties go to the agent with the smaller id. Antisymmetric
/// by construction (the crossing is computed once in a canonical orientation)
/// provided the two agent ids differ.
/// Throws DataError when the futures disagree on length or dt.
InteractionLabel label_pair(const Trajectory& future_i, const Trajectory& future_j,
                            double tie_eps = kTieEps);

/// GOING <-> YIELDING, IGNORING <-> IGNORING.
InteractionLabel mirror_label(InteractionLabel l);

/// Returns the scene with labels populated for every ordered pair within
/// kPairRadius at the current time and has_labels set. Existing labels are
/// replaced. Throws DataError when the scene has no future states.
Scene label_scene(Scene scene);

}  // namespace traject
