#pragma once

#include <map>
#include <string>
#include <vector>

#include "traject/nn.hpp"
#include "traject/param_store.hpp"
#include "traject/tape.hpp"
#include "traject/types.hpp"

namespace traject {

/// Ablation variants. "Graph" variants differ only in how the decoder's edge
/// type scores are produced and which edges the decoder keeps:
///   Baseline            encoder + decoder with no edges at all
///   Untyped             single edge function (M = 1), every in-radius edge
///   UntypedNoIgnoring   Untyped minus edges whose ground-truth label is IGNORING
///   Oracle              M = 3, scores are ground-truth one-hots
///   OracleNoIgnoring    Oracle minus IGNORING-labeled edges
///   JointSupervised     M = 3, scores predicted, CE supervision (alpha = 5)
///   JointUnsupervised   M = 3, scores predicted, no CE term (alpha = 0)
enum class Variant {
    Baseline,
    Untyped,
    UntypedNoIgnoring,
    Oracle,
    OracleNoIgnoring,
    JointSupervised,
    JointUnsupervised,
};

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct VariantTraits {
    bool edges = true;            // decoder sees in-radius edges at all
    int num_types = 3;            // M
    bool oracle_scores = false;   // decoder scores come from ground-truth labels
    bool drop_ignoring = false;   // IGNORING-labeled edges removed from the decoder graph
    bool interaction_net = false; // scores predicted by the vanilla-GN stack
    double alpha = 0.0;           // CE weight in the joint loss
};

VariantTraits traits_of(Variant v);

/// Typed scores (M = 3) are the only ones that can be overridden one-hot.
bool supports_injection(Variant v);

struct ModelConfig {
    int hidden = 64;            // encoder/decoder GRU state size
    int gn_width = 64;          // GN edge/node attribute width
    int num_types = 3;          // M; forced to the variant's value by Model
    int interaction_depth = 2;  // vanilla GN layers in the interaction net
    int decoder_depth = 2;      // typed GN layers per rollout step
    double alpha = 5.0;         // CE weight; forced to the variant's value by Model
};

/// Map from ordered pair to an injected interaction type; the decoder sees an
/// exact one-hot for these pairs instead of the model's scores.
using InjectionMap = std::map<PairKey, InteractionLabel>;

namespace gn {

struct GnResult {
    nn::Var nodes;
    nn::Var edges;
};

/// One vanilla GN block over a directed edge list: per-edge MLP on
/// [e_k, v_recv, v_send], mean aggregation of updated edges into each
/// receiver, then the node MLP on [v_i, agg_i]. Parameters live under
/// `prefix + ".edge"` and `prefix + ".node"`. Edges may be empty, in which
/// case the aggregate is zero for every node.
GnResult gn_layer(nn::Graph& g, nn::ParamStore& ps, const std::string& prefix, int width,
                  nn::Var nodes, nn::Var edges, const std::vector<int>& recv,
                  const std::vector<int>& send);

/// Typed edge update: e'_k = sum_m scores[k, m] * f_m([e_k, v_recv, v_send])
/// with one MLP f_m per type under `prefix + ".type<m>"`. Requires at least
/// one edge.
nn::Var typed_edge_update(nn::Graph& g, nn::ParamStore& ps, const std::string& prefix, int width,
                          int num_types, nn::Var nodes, nn::Var edges,
                          const std::vector<int>& recv, const std::vector<int>& send,
                          nn::Var scores);

/// Typed GN block: typed_edge_update, mean aggregation, node MLP under
/// `prefix + ".node"`. With no edges the aggregate is zero and the returned
/// edge Var is invalid.
GnResult typed_gn_layer(nn::Graph& g, nn::ParamStore& ps, const std::string& prefix, int width,
                        int num_types, nn::Var nodes, nn::Var edges,
                        const std::vector<int>& recv, const std::vector<int>& send,
                        nn::Var scores);

}  // namespace gn

/// One forward pass over a scene. Vars live on the Graph the pass ran on.
struct Forward {
    std::vector<PairKey> pairs;         // ordered in-radius pairs; score row order
    std::vector<PairKey> decoder_pairs; // edges the decoder kept
    nn::Var scores;                     // |pairs| x M, valid iff has_scores
    bool has_scores = false;
    nn::Var future;                     // N x (kFutureLen*4), global [x,y,vx,vy] per step
};

/// Joint interaction/trajectory model: GRU encoder over local-frame pasts, a
/// vanilla-GN interaction stack producing per-edge type scores, and a typed-GN
/// decoder rolling the scene forward one integration step per future sample.
class Model {
public:
    explicit Model(Variant variant, ModelConfig config = {});

    Variant variant() const { return variant_; }
    const VariantTraits& traits() const { return traits_; }
    const ModelConfig& config() const { return config_; }

    /// Overrides the CE weight (training-time knob; ignored by variants
    /// without an interaction net).
    void set_alpha(double alpha) { config_.alpha = alpha; }

    /// Builds the full forward tape for one scene. Oracle / no-ignoring
    /// variants need scene labels; injection needs a typed variant and every
    /// overridden pair in radius.
    Forward forward(nn::Graph& g, nn::ParamStore& ps, const Scene& scene,
                    const InjectionMap* inject = nullptr) const;

    /// alpha * CE(labels, scores) + MSE over the anchored future states.
    /// CE is the mean over labeled pairs and is skipped when the variant has
    /// no interaction net or the scene has no pairs. Requires labels when
    /// alpha > 0.
    nn::Var loss(nn::Graph& g, const Forward& f, const Scene& scene) const;

    /// Evaluation rollout: forward pass on a scratch tape, returning
    /// kFutureLen predicted states per agent in scene order.
    std::vector<std::vector<AgentState>> predict(nn::ParamStore& ps, const Scene& scene,
                                                 const InjectionMap* inject = nullptr) const;

    /// Predicted type scores per ordered pair (softmax rows, or the exact
    /// one-hots for oracle variants). Empty when the variant has no scores.
    std::map<PairKey, std::vector<double>> score_map(nn::ParamStore& ps,
                                                     const Scene& scene) const;

private:
    Variant variant_;
    VariantTraits traits_;
    ModelConfig config_;
};

/// Reads the predicted future out of a forward pass: kFutureLen global
/// states per agent, in scene order.
std::vector<std::vector<AgentState>> unpack_future(const nn::Graph& g, const Forward& f);

/// Checkpoint JSON: format_version, hyperparams (model dims), config block
/// (variant + dims + alpha), params {name: {shape, data}}. Deterministic
/// full-precision output; loading reconstructs the exact architecture.
void save_checkpoint(const std::string& path, const nn::ParamStore& params, Variant variant,
                     const ModelConfig& config);

struct LoadedCheckpoint {
    Variant variant = Variant::Baseline;
    ModelConfig config;
    nn::ParamStore params;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace traject
