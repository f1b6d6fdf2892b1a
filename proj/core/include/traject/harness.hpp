#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "traject/geometry.hpp"
#include "traject/model.hpp"
#include "traject/types.hpp"

namespace traject {

/// Fixed 70/15/15 split keyed on the scene id hash, so membership is stable
/// across runs, files and reorderings.
enum class Split { Train, Val, Test };

Split split_of(const std::string& scene_id);
const char* split_name(Split s);
Split split_from_name(const std::string& name);

std::vector<Scene> filter_split(const std::vector<Scene>& scenes, Split split);

struct TrainConfig {
    Variant variant = Variant::JointSupervised;
    ModelConfig model;
    int epochs = 30;
    int batch = 8;
    double lr = 1e-3;
    double clip_norm = 5.0;
    uint64_t seed = 1;
    /// Overrides the variant's CE weight when set (training-time knob).
    std::optional<double> alpha;
};

/// Trajectory errors are decomposed per agent-timestep against the unit
/// ground-truth velocity u at that step: DPE = |d|, ATE = |d.u|,
/// CTE = |d.u_perp|. When the truth speed drops below kHeadingSpeedMin the
/// most recent earlier future heading is used, falling back to +x for agents
/// that never move.
struct MetricsReport {
    double dpe = 0.0;
    double ate = 0.0;
    double cte = 0.0;
    /// Errors at the 1 s / 3 s / 5 s horizons.
    std::array<double, 3> dpe_h{};
    std::array<double, 3> ate_h{};
    std::array<double, 3> cte_h{};
    int64_t n_points = 0;  // agent-timesteps behind the overall means

    /// argmax(scores) vs label over labeled pairs; absent for variants
    /// without scores (fraction in [0, 1]).
    std::optional<double> int_acc;
    /// confusion[truth][predicted], label order IGNORING, GOING, YIELDING.
    std::array<std::array<int64_t, 3>, 3> confusion{};
    int64_t n_pairs = 0;
};

/// Single-scene metrics; shapes must match (kFutureLen states per agent).
MetricsReport compute_metrics(const std::vector<std::vector<AgentState>>& pred,
                              const std::vector<std::vector<AgentState>>& truth);

/// Streaming mean accumulation over many scenes.
class MetricsAccumulator {
public:
    void add_scene(const std::vector<std::vector<AgentState>>& pred,
                   const std::vector<std::vector<AgentState>>& truth);
    void add_pair(InteractionLabel truth, int predicted_class);
    MetricsReport report() const;

private:
    double sum_dpe_ = 0.0, sum_ate_ = 0.0, sum_cte_ = 0.0;
    std::array<double, 3> sum_dpe_h_{}, sum_ate_h_{}, sum_cte_h_{};
    int64_t n_points_ = 0;
    int64_t n_horizon_ = 0;
    std::array<std::array<int64_t, 3>, 3> confusion_{};
    int64_t n_pairs_ = 0;
    int64_t n_correct_ = 0;
    bool saw_scores_ = false;
};

/// Mean prediction error of a checkpointed model over the given scenes,
/// including interaction accuracy when the variant produces scores. Pure:
/// identical inputs give identical reports.
MetricsReport evaluate(const Model& model, nn::ParamStore& params,
                       const std::vector<Scene>& scenes);

/// stdout format of the `evaluate` subcommand: one metric per row with the
/// overall mean and the three horizon values.
std::string metrics_csv(const MetricsReport& report);

struct EpochLog {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    MetricsReport val;
};

struct TrainRun {
    std::vector<EpochLog> epochs;
    MetricsReport final_val;
};

/// Deterministic training loop: per epoch a seeded shuffle of the training
/// scenes, gradient accumulation over each batch (summed, averaged, clipped
/// to clip_norm, then Adam), and a validation pass. Throws NumericError
/// naming the first non-finite tensor if the loss or gradients diverge.
TrainRun fit(const TrainConfig& config, Model& model, nn::ParamStore& params,
             const std::vector<Scene>& train_scenes, const std::vector<Scene>& val_scenes);

/// CSV with one row per epoch:
/// epoch,train_loss,val_loss,val_dpe,val_ate,val_cte,val_int_acc
/// (val_int_acc empty for variants without scores).
std::string train_log_csv(const TrainRun& run);

/// File-level wrapper: loads the dataset, trains on its train split while
/// validating on the val split, writes the checkpoint to checkpoint_path and
/// the per-epoch log to log_path (skipped when empty). Returns the run.
TrainRun train(const TrainConfig& config, const std::string& data_path,
               const std::string& checkpoint_path, const std::string& log_path);

/// Trains and evaluates every variant for every seed on the dataset's
/// train/test splits. The CSV holds one row per (variant, seed) plus
/// mean/stddev rows per variant:
/// variant,seed,dpe,ate,cte,int_acc
std::string ablate(const std::string& data_path, const std::vector<uint64_t>& seeds,
                   const TrainConfig& base_config);

struct PairArrival {
    PairKey pair;
    /// Conflict point the arrivals are measured against: the crossing of the
    /// two predicted paths when one exists, otherwise of the ground-truth
    /// futures. Unset when neither pair of paths crosses.
    std::optional<Vec2> conflict;
    double t_first = 0.0;   // interpolated arrival of the earlier agent
    double t_second = 0.0;  // arrival of the later one
    int first = -1;         // agent index that arrives first, -1 without a conflict
};

struct InjectionReport {
    std::string scene_id;
    InjectionMap overrides;
    std::vector<std::vector<AgentState>> pred;
    std::vector<PairArrival> arrivals;  // one per override pair, map order
};

/// Rolls the scene out with the given score overrides and reports, per
/// overridden pair, which agent's predicted trajectory reaches the pair's
/// conflict point first.
InjectionReport inject_edges(const Model& model, nn::ParamStore& params, const Scene& scene,
                             const InjectionMap& overrides);

std::string injection_json(const InjectionReport& report);

struct ControllabilityResult {
    int scenes = 0;
    int flipped = 0;  // arrival order followed the injected direction both ways
    double flip_rate = 0.0;
};

/// Appendix-style controllability probe: on `n_scenes` symmetric crossing
/// scenes (seeded from base_seed), inject GOING/YIELDING one way and then
/// swapped, and count the scenes where the predicted arrival order follows
/// the injection in both directions.
ControllabilityResult controllability_study(const Model& model, nn::ParamStore& params,
                                            int n_scenes, uint64_t base_seed);

}  // namespace traject
