#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "traject/types.hpp"

namespace traject {

enum class ScenarioKind { Crossing, Following, Independent, MultiIntersection };

const char* kind_name(ScenarioKind k);
ScenarioKind kind_from_name(const std::string& name);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Crossing;
    int num_agents = 2;  // fixed at 2 for all kinds except MultiIntersection (3..6)
    double speed_min = 3.0;
    double speed_max = 12.0;
    double noise_sigma = 0.05;  // meters, i.i.d. per position sample
    uint64_t seed = 0;
};

/// Two agents on perpendicular paths through a shared conflict point. Both
/// hold constant speed through the observed past; the designated yielder
/// (the one nominally arriving later) brakes inside the future window to
/// pass the conflict point after the other agent clears it. Unlabeled;
/// label_scene on the result gives GOING for the non-yielder toward the
/// yielder. Infeasible samples are redrawn internally; throws DataError
/// after 100 failed attempts.
Scene gen_crossing(const ScenarioConfig& cfg, int yielder);

/// Crossing geometry where the designated waiter has already stopped a
/// dozen meters short of the conflict point and pulls away shortly after
/// the other agent clears it, without reaching the conflict inside the
/// window. label_scene reads the pair as IGNORING both ways even though the
/// waiter's restart time is set by the goer.
Scene gen_crossing_wait(const ScenarioConfig& cfg, int waiter);

/// Crossing geometry with both agents at constant speed arriving at the
/// conflict point simultaneously. Used by the edge-injection study, where
/// the injected scores decide who goes; not part of generated datasets.
Scene gen_crossing_symmetric(const ScenarioConfig& cfg);

/// Leader/follower in one lane; the leader settles onto a new cruise speed
/// just before the current time and the follower closes back toward the
/// desired gap with soft feedback, mostly inside the future window.
/// label_scene gives the follower YIELDING toward the leader via the
/// in-lane path overlap.
Scene gen_following(const ScenarioConfig& cfg);

/// Deterministic following scene with pinned kinematics (no sampling beyond
/// lane placement); keeps the controller testable: equal speeds at the
/// desired gap give a bit-constant gap.
Scene gen_following_exact(const ScenarioConfig& cfg, double leader_speed, double follower_speed,
                          double gap);

/// Two agents on parallel lanes at least 5 m apart; labels are IGNORING both
/// ways by construction.
Scene gen_independent(const ScenarioConfig& cfg);

/// 3..6 agents at a 4-way intersection with a sampled total go-order; up to
/// four agents on distinct legs take timed slots through the center,
/// remaining agents queue behind a leg agent as followers.
Scene gen_multi(const ScenarioConfig& cfg);

/// Dispatch on cfg.kind; CROSSING samples the yielder from the seed and
/// turns a third of the draws into waiting crossings.
Scene gen_scene(const ScenarioConfig& cfg);

/// Scene counts per kind for dataset generation.
struct DatasetMix {
    int crossing = 0;
    int following = 0;
    int independent = 0;
    int multi = 0;

    int total() const { return crossing + following + independent + multi; }
};

/// Parses "crossing=800,following=400,..." (unknown kinds are errors).
DatasetMix parse_kind_mix(const std::string& spec);

/// Generates, labels, and feature-populates mix.total() scenes, one JSONL
/// line each. Per-scene seeds derive from (master_seed, kind, index), so the
/// output is byte-identical for identical arguments.
void gen_dataset(const DatasetMix& mix, uint64_t master_seed, const std::string& path,
                 double noise_sigma = 0.05);

}  // namespace traject
