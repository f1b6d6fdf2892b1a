#include "traject/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "traject/errors.hpp"
#include "traject/geometry.hpp"

namespace traject {
namespace {

using nn::Graph;
using nn::Var;

// Inputs are scaled once at the model boundary so tanh layers see O(1)
// values: positions in ~[-5, 5] for the 100 m pairing radius, speeds in
// ~[-1.2, 1.2] for the 12 m/s generator cap.
constexpr double kPosScale = 0.05;
constexpr double kVelScale = 0.1;

Tensor2 local_past_step(const Scene& scene, const std::vector<Frame>& frames, int k) {
    const int n = scene.num_agents();
    Tensor2 x(n, 4);
    for (int i = 0; i < n; ++i) {
        const AgentState& st = scene.agents[i].past[k];
        const Vec2 p = to_local(frames[i], {st.x, st.y});
        const Vec2 v = to_local_velocity(frames[i], {st.vx, st.vy});
        x.at(i, 0) = p.x * kPosScale;
        x.at(i, 1) = p.y * kPosScale;
        x.at(i, 2) = v.x * kVelScale;
        x.at(i, 3) = v.y * kVelScale;
    }
    return x;
}

std::vector<Frame> current_frames(const Scene& scene) {
    std::vector<Frame> frames;
    frames.reserve(scene.agents.size());
    for (const auto& ag : scene.agents) {
        const double fallback =
            past_fallback_heading(ag.past, static_cast<int>(ag.past.size()) - 1);
        frames.push_back(frame_of(ag.past.back(), fallback));
    }
    return frames;
}

Tensor2 scaled_agent_features(const Scene& scene) {
    const int n = scene.num_agents();
    Tensor2 out(n, kAgentFeatureDim);
    const bool cached = scene.agent_features.size() == static_cast<size_t>(n);
    for (int i = 0; i < n; ++i) {
        const std::vector<double> f =
            cached ? scene.agent_features[i] : agent_features_of(scene.agents[i]);
        out.at(i, 0) = f[0] * kVelScale;  // current speed
        out.at(i, 1) = f[1] * kVelScale;  // mean past speed
        out.at(i, 2) = f[2];              // total heading change (rad)
        out.at(i, 3) = f[3] * kPosScale;  // past path length
    }
    return out;
}

Tensor2 scaled_pair_features(const Scene& scene, const std::vector<PairKey>& pairs) {
    Tensor2 out(static_cast<int>(pairs.size()), kPairFeatureDim);
    for (size_t e = 0; e < pairs.size(); ++e) {
        const auto it = scene.pair_features.find(pairs[e]);
        const std::vector<double> f =
            it != scene.pair_features.end()
                ? it->second
                : pair_features_of(scene.agents[pairs[e].first], scene.agents[pairs[e].second]);
        out.at(static_cast<int>(e), 0) = f[0] * kPosScale;  // distance
        out.at(static_cast<int>(e), 1) = f[1];              // bearing (rad)
        out.at(static_cast<int>(e), 2) = f[2] * kVelScale;  // closing speed
        out.at(static_cast<int>(e), 3) = f[3];              // heading difference (rad)
        out.at(static_cast<int>(e), 4) = f[4] * kVelScale;  // speed difference
    }
    return out;
}

Tensor2 one_hot_scores(const Scene& scene, const std::vector<PairKey>& pairs, int num_types) {
    Tensor2 out(static_cast<int>(pairs.size()), num_types);
    for (size_t e = 0; e < pairs.size(); ++e) {
        const int cls = label_to_int(scene.labels.at(pairs[e]));
        out.at(static_cast<int>(e), cls) = 1.0;
    }
    return out;
}

struct EdgeIndex {
    std::vector<int> recv;  // pair.first: the agent the relation belongs to
    std::vector<int> send;  // pair.second
};

EdgeIndex edge_index(const std::vector<PairKey>& pairs) {
    EdgeIndex idx;
    idx.recv.reserve(pairs.size());
    idx.send.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        idx.recv.push_back(i);
        idx.send.push_back(j);
    }
    return idx;
}

Var encode_past(Graph& g, nn::ParamStore& ps, const ModelConfig& cfg, const Scene& scene) {
    const std::vector<Frame> frames = current_frames(scene);
    Var h = g.input(Tensor2::zeros(scene.num_agents(), cfg.hidden), "enc.h0");
    for (int k = 0; k < kPastLen; ++k) {
        Var x = g.input(local_past_step(scene, frames, k), "enc.x");
        h = nn::gru_step(g, ps, "enc.gru", x, h);
    }
    return h;
}

Var predict_scores(Graph& g, nn::ParamStore& ps, const ModelConfig& cfg, Var h,
                   const Scene& scene, const std::vector<PairKey>& pairs,
                   const EdgeIndex& idx) {
    Var nodes = g.concat_cols({h, g.input(scaled_agent_features(scene), "inter.agent_feats")});
    Var edges = g.input(scaled_pair_features(scene, pairs), "inter.pair_feats");
    for (int layer = 0; layer < cfg.interaction_depth; ++layer) {
        const gn::GnResult out = gn::gn_layer(g, ps, "inter.gn" + std::to_string(layer),
                                              cfg.gn_width, nodes, edges, idx.recv, idx.send);
        nodes = out.nodes;
        edges = out.edges;
    }
    Var logits = nn::mlp_forward(g, ps, "inter.readout", edges, {cfg.gn_width, 3});
    return g.softmax_rows(logits);
}

}  // namespace

namespace gn {

GnResult gn_layer(Graph& g, nn::ParamStore& ps, const std::string& prefix, int width, Var nodes,
                  Var edges, const std::vector<int>& recv, const std::vector<int>& send) {
    const int n = nodes.rows();
    Var agg;
    Var edges_out;
    if (!recv.empty()) {
        Var edge_in =
            g.concat_cols({edges, g.gather_rows(nodes, recv), g.gather_rows(nodes, send)});
        edges_out = nn::mlp_forward(g, ps, prefix + ".edge", edge_in, {width, width});
        agg = g.scatter_mean_rows(edges_out, recv, n);
    } else {
        agg = g.input(Tensor2::zeros(n, width), prefix + ".zero_agg");
    }
    Var nodes_out = nn::mlp_forward(g, ps, prefix + ".node", g.concat_cols({nodes, agg}),
                                    {width, width});
    return {nodes_out, edges_out};
}

Var typed_edge_update(Graph& g, nn::ParamStore& ps, const std::string& prefix, int width,
                      int num_types, Var nodes, Var edges, const std::vector<int>& recv,
                      const std::vector<int>& send, Var scores) {
    if (recv.empty()) throw DataError("typed_edge_update needs at least one edge");
    Var edge_in = g.concat_cols({edges, g.gather_rows(nodes, recv), g.gather_rows(nodes, send)});
    Var mix;
    for (int m = 0; m < num_types; ++m) {
        Var fm = nn::mlp_forward(g, ps, prefix + ".type" + std::to_string(m), edge_in,
                                 {width, width});
        Var weighted = g.scale_rows(fm, g.slice_cols(scores, m, m + 1));
        mix = m == 0 ? weighted : g.add(mix, weighted);
    }
    return mix;
}

GnResult typed_gn_layer(Graph& g, nn::ParamStore& ps, const std::string& prefix, int width,
                        int num_types, Var nodes, Var edges, const std::vector<int>& recv,
                        const std::vector<int>& send, Var scores) {
    const int n = nodes.rows();
    Var agg;
    Var mix;
    if (!recv.empty()) {
        mix = typed_edge_update(g, ps, prefix, width, num_types, nodes, edges, recv, send, scores);
        agg = g.scatter_mean_rows(mix, recv, n);
    } else {
        agg = g.input(Tensor2::zeros(n, width), prefix + ".zero_agg");
    }
    Var nodes_out = nn::mlp_forward(g, ps, prefix + ".node", g.concat_cols({nodes, agg}),
                                    {width, width});
    return {nodes_out, mix};
}

}  // namespace gn

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::Untyped: return "untyped";
    case Variant::UntypedNoIgnoring: return "untyped_no_ignoring";
    case Variant::Oracle: return "oracle";
    case Variant::OracleNoIgnoring: return "oracle_no_ignoring";
    case Variant::JointSupervised: return "joint_supervised";
    case Variant::JointUnsupervised: return "joint_unsupervised";
    }
    return "unknown";
}

Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::Baseline, Variant::Untyped, Variant::UntypedNoIgnoring,
                      Variant::Oracle, Variant::OracleNoIgnoring, Variant::JointSupervised,
                      Variant::JointUnsupervised}) {
        if (name == variant_name(v)) return v;
    }
    throw std::invalid_argument("unknown variant: " + name);
}

VariantTraits traits_of(Variant v) {
    switch (v) {
    case Variant::Baseline: return {false, 1, false, false, false, 0.0};
    case Variant::Untyped: return {true, 1, false, false, false, 0.0};
    case Variant::UntypedNoIgnoring: return {true, 1, false, true, false, 0.0};
    case Variant::Oracle: return {true, 3, true, false, false, 0.0};
    case Variant::OracleNoIgnoring: return {true, 3, true, true, false, 0.0};
    case Variant::JointSupervised: return {true, 3, false, false, true, 5.0};
    case Variant::JointUnsupervised: return {true, 3, false, false, true, 0.0};
    }
    return {};
}

bool supports_injection(Variant v) {
    const VariantTraits t = traits_of(v);
    return t.edges && t.num_types == 3;
}

Model::Model(Variant variant, ModelConfig config)
    : variant_(variant), traits_(traits_of(variant)), config_(config) {
    config_.num_types = traits_.num_types;
    config_.alpha = traits_.alpha;
    if (config_.hidden < 1 || config_.gn_width < 1 || config_.interaction_depth < 1 ||
        config_.decoder_depth < 1) {
        throw DataError("model dimensions must be positive");
    }
}

Forward Model::forward(nn::Graph& g, nn::ParamStore& ps, const Scene& scene,
                       const InjectionMap* inject) const {
    const int n = scene.num_agents();
    if (n == 0) throw DataError("cannot run the model on an empty scene");
    for (const auto& ag : scene.agents) {
        if (ag.past.size() != kPastLen) {
            throw DataError("agent " + ag.id + " needs " + std::to_string(kPastLen) +
                            " past samples");
        }
    }

    Forward f;
    f.pairs = pairs_within_radius(scene);
    const bool needs_labels = traits_.oracle_scores || traits_.drop_ignoring;
    if (needs_labels && !scene.has_labels) {
        throw DataError(std::string(variant_name(variant_)) + " requires a labeled scene");
    }
    if (inject != nullptr) {
        if (!supports_injection(variant_)) {
            throw DataError(std::string(variant_name(variant_)) +
                            " does not support score injection");
        }
        for (const auto& [pair, label] : *inject) {
            (void)label;
            if (std::find(f.pairs.begin(), f.pairs.end(), pair) == f.pairs.end()) {
                throw DataError("injection pair (" + std::to_string(pair.first) + "," +
                                std::to_string(pair.second) + ") has no edge in this scene");
            }
        }
    }

    Var h = encode_past(g, ps, config_, scene);

    const EdgeIndex all_idx = edge_index(f.pairs);
    if (!f.pairs.empty()) {
        if (traits_.interaction_net) {
            f.scores = predict_scores(g, ps, config_, h, scene, f.pairs, all_idx);
            f.has_scores = true;
        } else if (traits_.oracle_scores) {
            f.scores = g.input(one_hot_scores(scene, f.pairs, config_.num_types), "oracle_scores");
            f.has_scores = true;
        }
    }
    if (inject != nullptr && f.has_scores) {
        Tensor2 injected(static_cast<int>(f.pairs.size()), config_.num_types);
        std::vector<double> mask(f.pairs.size(), 0.0);
        for (size_t e = 0; e < f.pairs.size(); ++e) {
            const auto it = inject->find(f.pairs[e]);
            if (it == inject->end()) continue;
            mask[e] = 1.0;
            injected.at(static_cast<int>(e), label_to_int(it->second)) = 1.0;
        }
        f.scores = g.where_rows(mask, g.input(std::move(injected), "injected_scores"), f.scores);
    }

    if (traits_.edges) {
        if (traits_.drop_ignoring) {
            for (const auto& pair : f.pairs) {
                if (scene.labels.at(pair) != InteractionLabel::Ignoring) {
                    f.decoder_pairs.push_back(pair);
                }
            }
        } else {
            f.decoder_pairs = f.pairs;
        }
    }

    const EdgeIndex dec_idx = edge_index(f.decoder_pairs);
    Var dec_scores;
    if (!f.decoder_pairs.empty()) {
        if (config_.num_types == 1) {
            dec_scores = g.input(Tensor2::full(static_cast<int>(f.decoder_pairs.size()), 1, 1.0),
                                 "untyped_scores");
        } else if (f.decoder_pairs.size() == f.pairs.size()) {
            dec_scores = f.scores;
        } else {
            std::vector<int> kept;
            kept.reserve(f.decoder_pairs.size());
            size_t cursor = 0;
            for (const auto& pair : f.decoder_pairs) {
                while (f.pairs[cursor] != pair) ++cursor;
                kept.push_back(static_cast<int>(cursor++));
            }
            dec_scores = g.gather_rows(f.scores, kept);
        }
    }

    // Rollout state: global position/velocity, per-agent heading with a
    // stall fallback, and the decoder GRU hidden seeded by the encoder.
    const double dt = scene.dt;
    Tensor2 pos0(n, 2);
    Tensor2 vel0(n, 2);
    Tensor2 theta0(n, 1);
    const std::vector<Frame> frames = current_frames(scene);
    for (int i = 0; i < n; ++i) {
        const AgentState& cur = scene.current(i);
        pos0.at(i, 0) = cur.x;
        pos0.at(i, 1) = cur.y;
        vel0.at(i, 0) = cur.vx;
        vel0.at(i, 1) = cur.vy;
        theta0.at(i, 0) = frames[i].heading;
    }
    Var pos = g.input(std::move(pos0), "dec.pos0");
    Var vel = g.input(std::move(vel0), "dec.vel0");
    Var theta_prev = g.input(std::move(theta0), "dec.theta0");
    Var hdec = h;

    std::vector<Var> steps;
    steps.reserve(kFutureLen);
    for (int t = 0; t < kFutureLen; ++t) {
        Var vx = g.slice_cols(vel, 0, 1);
        Var vy = g.slice_cols(vel, 1, 2);
        std::vector<double> moving(n, 0.0);
        const Tensor2& vval = g.val(vel);
        for (int i = 0; i < n; ++i) {
            const double s2 = vval.at(i, 0) * vval.at(i, 0) + vval.at(i, 1) * vval.at(i, 1);
            moving[i] = s2 >= kHeadingSpeedMin * kHeadingSpeedMin ? 1.0 : 0.0;
        }
        Var theta = g.where_rows(moving, g.atan2(vy, vx), theta_prev);
        Var c = g.cos(theta);
        Var s = g.sin(theta);
        Var vxl = g.add(g.mul(c, vx), g.mul(s, vy));
        Var vyl = g.sub(g.mul(c, vy), g.mul(s, vx));

        Var nodes = g.concat_cols({hdec, g.scale(vxl, kVelScale), g.scale(vyl, kVelScale)});
        Var edges;
        if (!f.decoder_pairs.empty()) {
            Var dp = g.sub(g.gather_rows(pos, dec_idx.send), g.gather_rows(pos, dec_idx.recv));
            Var dv = g.sub(g.gather_rows(vel, dec_idx.send), g.gather_rows(vel, dec_idx.recv));
            Var cr = g.gather_rows(c, dec_idx.recv);
            Var sr = g.gather_rows(s, dec_idx.recv);
            Var dpx = g.slice_cols(dp, 0, 1);
            Var dpy = g.slice_cols(dp, 1, 2);
            Var dvx = g.slice_cols(dv, 0, 1);
            Var dvy = g.slice_cols(dv, 1, 2);
            Var relx = g.add(g.mul(cr, dpx), g.mul(sr, dpy));
            Var rely = g.sub(g.mul(cr, dpy), g.mul(sr, dpx));
            Var relvx = g.add(g.mul(cr, dvx), g.mul(sr, dvy));
            Var relvy = g.sub(g.mul(cr, dvy), g.mul(sr, dvx));
            edges = g.concat_cols({g.scale(relx, kPosScale), g.scale(rely, kPosScale),
                                   g.scale(relvx, kVelScale), g.scale(relvy, kVelScale),
                                   dec_scores});
        }
        for (int layer = 0; layer < config_.decoder_depth; ++layer) {
            const gn::GnResult out = gn::typed_gn_layer(
                g, ps, "dec.gn" + std::to_string(layer), config_.gn_width, config_.num_types,
                nodes, edges, dec_idx.recv, dec_idx.send, dec_scores);
            nodes = out.nodes;
            edges = out.edges;
        }
        Var accel = nn::mlp_forward(g, ps, "dec.head", nodes, {config_.gn_width, 2});

        Var vxl2 = g.add(vxl, g.scale(g.slice_cols(accel, 0, 1), dt));
        Var vyl2 = g.add(vyl, g.scale(g.slice_cols(accel, 1, 2), dt));
        Var vx2 = g.sub(g.mul(c, vxl2), g.mul(s, vyl2));
        Var vy2 = g.add(g.mul(s, vxl2), g.mul(c, vyl2));
        vel = g.concat_cols({vx2, vy2});
        pos = g.add(pos, g.scale(vel, dt));

        Var xin = g.concat_cols({g.scale(vxl2, dt * kPosScale), g.scale(vyl2, dt * kPosScale),
                                 g.scale(vxl2, kVelScale), g.scale(vyl2, kVelScale)});
        hdec = nn::gru_step(g, ps, "dec.gru", xin, hdec);

        steps.push_back(g.concat_cols({pos, vel}));
        theta_prev = theta;
    }
    f.future = g.concat_cols(steps);
    return f;
}

nn::Var Model::loss(nn::Graph& g, const Forward& f, const Scene& scene) const {
    const int n = scene.num_agents();
    for (const auto& ag : scene.agents) {
        if (ag.future.size() != kFutureLen) {
            throw DataError("agent " + ag.id + " needs " + std::to_string(kFutureLen) +
                            " future samples");
        }
    }
    Tensor2 target(n, kFutureLen * 4);
    Tensor2 anchor(n, kFutureLen * 4);
    for (int i = 0; i < n; ++i) {
        const AgentState& cur = scene.current(i);
        for (int t = 0; t < kFutureLen; ++t) {
            const AgentState& st = scene.agents[i].future[t];
            target.at(i, 4 * t + 0) = st.x - cur.x;
            target.at(i, 4 * t + 1) = st.y - cur.y;
            target.at(i, 4 * t + 2) = st.vx;
            target.at(i, 4 * t + 3) = st.vy;
            anchor.at(i, 4 * t + 0) = cur.x;
            anchor.at(i, 4 * t + 1) = cur.y;
        }
    }
    Var pred = g.sub(f.future, g.input(std::move(anchor), "loss.anchor"));
    Var total = g.mse_loss(pred, target);

    if (traits_.interaction_net && config_.alpha != 0.0) {
        if (!scene.has_labels) {
            throw DataError("supervised loss needs a labeled scene: " + scene.scene_id);
        }
        if (f.has_scores && !f.pairs.empty()) {
            std::vector<int> labels;
            labels.reserve(f.pairs.size());
            for (const auto& pair : f.pairs) labels.push_back(label_to_int(scene.labels.at(pair)));
            Var ce = g.ce_loss(f.scores, labels);
            total = g.add(total, g.scale(ce, config_.alpha));
        }
    }
    return total;
}

std::vector<std::vector<AgentState>> unpack_future(const nn::Graph& g, const Forward& f) {
    const Tensor2& out = g.val(f.future);
    std::vector<std::vector<AgentState>> pred(out.rows);
    for (int i = 0; i < out.rows; ++i) {
        pred[i].resize(kFutureLen);
        for (int t = 0; t < kFutureLen; ++t) {
            pred[i][t] = {out.at(i, 4 * t + 0), out.at(i, 4 * t + 1), out.at(i, 4 * t + 2),
                          out.at(i, 4 * t + 3)};
        }
    }
    return pred;
}

std::vector<std::vector<AgentState>> Model::predict(nn::ParamStore& ps, const Scene& scene,
                                                    const InjectionMap* inject) const {
    nn::Graph g;
    return unpack_future(g, forward(g, ps, scene, inject));
}

std::map<PairKey, std::vector<double>> Model::score_map(nn::ParamStore& ps,
                                                        const Scene& scene) const {
    nn::Graph g;
    const Forward f = forward(g, ps, scene);
    std::map<PairKey, std::vector<double>> out;
    if (!f.has_scores) return out;
    const Tensor2& sc = g.val(f.scores);
    for (size_t e = 0; e < f.pairs.size(); ++e) {
        std::vector<double> row(config_.num_types);
        for (int m = 0; m < config_.num_types; ++m) row[m] = sc.at(static_cast<int>(e), m);
        out[f.pairs[e]] = std::move(row);
    }
    return out;
}

void save_checkpoint(const std::string& path, const nn::ParamStore& params, Variant variant,
                     const ModelConfig& config) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["hyperparams"] = {
        {"hidden", config.hidden},
        {"gn_width", config.gn_width},
        {"num_types", config.num_types},
        {"interaction_depth", config.interaction_depth},
        {"decoder_depth", config.decoder_depth},
        {"alpha", config.alpha},
    };
    j["config"] = {
        {"variant", variant_name(variant)},
        {"init_seed", params.init_seed()},
        {"step_count", params.step_count()},
    };
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [name, entry] : params) {
        nlohmann::ordered_json data = nlohmann::ordered_json::array();
        for (double v : entry.value.data) data.push_back(v);
        p[name] = {{"shape", {entry.value.rows, entry.value.cols}}, {"data", std::move(data)}};
    }
    j["params"] = std::move(p);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump() << '\n';
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw DataError("unsupported checkpoint format_version in " + path);
        }
        LoadedCheckpoint ck;
        const auto& hp = j.at("hyperparams");
        ck.config.hidden = hp.at("hidden").get<int>();
        ck.config.gn_width = hp.at("gn_width").get<int>();
        ck.config.num_types = hp.at("num_types").get<int>();
        ck.config.interaction_depth = hp.at("interaction_depth").get<int>();
        ck.config.decoder_depth = hp.at("decoder_depth").get<int>();
        ck.config.alpha = hp.at("alpha").get<double>();
        const auto& cfg = j.at("config");
        ck.variant = variant_from_name(cfg.at("variant").get<std::string>());
        ck.params = nn::ParamStore(cfg.at("init_seed").get<uint64_t>());
        ck.params.set_step_count(cfg.at("step_count").get<int64_t>());
        for (const auto& [name, pj] : j.at("params").items()) {
            const int rows = pj.at("shape").at(0).get<int>();
            const int cols = pj.at("shape").at(1).get<int>();
            const auto& data = pj.at("data");
            if (static_cast<int>(data.size()) != rows * cols) {
                throw DataError("checkpoint param " + name + " has wrong data length");
            }
            auto& entry = ck.params.ensure(name, rows, cols, nn::Init::Zeros);
            for (int k = 0; k < rows * cols; ++k) entry.value.data[k] = data.at(k).get<double>();
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
}

}  // namespace traject
