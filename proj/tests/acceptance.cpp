// Acceptance gate: one self-contained check per release property, one
// PASS/FAIL line each, nonzero exit when anything fails. Run with a list of
// check numbers to execute a subset, e.g. `traject_acceptance 5 7`.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "traject/errors.hpp"
#include "traject/geometry.hpp"
#include "traject/harness.hpp"
#include "traject/labeler.hpp"
#include "traject/model.hpp"
#include "traject/nn.hpp"
#include "traject/rng.hpp"
#include "traject/scenegen.hpp"
#include "traject/tape.hpp"
#include "traject/types.hpp"

using namespace traject;
using Clock = std::chrono::steady_clock;

namespace {

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CheckResult {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "traject_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Tensor2 random_tensor(Rng& rng, int r, int c, double scale = 1.0) {
    Tensor2 t = Tensor2::zeros(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) t.at(i, j) = scale * rng.uniform(-1.0, 1.0);
    }
    return t;
}

Scene labeled_multi_scene(uint64_t seed) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::MultiIntersection;
    cfg.num_agents = 3;
    cfg.seed = seed;
    Scene scene = label_scene(gen_multi(cfg));
    compute_features(scene);
    return scene;
}

// ---------------------------------------------------------------- check 1

CheckResult check_gradients() {
    const auto t0 = Clock::now();
    ModelConfig mc;
    mc.hidden = 6;
    mc.gn_width = 6;
    Model model(Variant::JointSupervised, mc);

    double worst = 0.0;
    std::string worst_at;
    int total = 0;
    for (uint64_t seed : {402u, 913u}) {
        const Scene scene = labeled_multi_scene(seed);
        nn::ParamStore ps(static_cast<uint64_t>(17 + seed));
        const auto report = nn::grad_check(
            ps,
            [&](nn::Graph& g, nn::ParamStore& p) {
                const Forward f = model.forward(g, p, scene);
                return model.loss(g, f, scene);
            },
            150, 1e-5, 1e-4, 31415 + seed);
        total += report.n_checked;
        if (report.max_rel_err > worst) {
            worst = report.max_rel_err;
            worst_at = report.worst_param;
        }
    }
    const double elapsed = secs_since(t0);
    const bool ok = total >= 200 && worst <= 1e-5 && elapsed <= 60.0;
    return {ok, fmt("max rel err %.2e over %d coords in %.1fs (limits 1e-05, 200, 60s)%s%s",
                    worst, total, elapsed, worst_at.empty() ? "" : ", worst at ",
                    worst_at.c_str())};
}

// ---------------------------------------------------------------- check 2

CheckResult check_typed_edges() {
    double worst_mix = 0.0;
    double worst_onehot = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        Rng rng(splitmix64(0xACCE9Dull + static_cast<uint64_t>(iter)));
        const int E = 1 + static_cast<int>(rng.below(5));
        const int N = 2 + static_cast<int>(rng.below(3));
        const int node_d = 2 + static_cast<int>(rng.below(3));
        const int edge_d = 2 + static_cast<int>(rng.below(3));
        const int width = 2 + static_cast<int>(rng.below(4));
        const int M = 3;

        std::vector<int> recv(E), send(E);
        for (int k = 0; k < E; ++k) {
            recv[k] = static_cast<int>(rng.below(static_cast<uint64_t>(N)));
            send[k] = static_cast<int>(rng.below(static_cast<uint64_t>(N)));
        }
        nn::ParamStore ps(1000 + static_cast<uint64_t>(iter));
        const Tensor2 nodes_t = random_tensor(rng, N, node_d);
        const Tensor2 edges_t = random_tensor(rng, E, edge_d);

        // Reference: each type MLP applied alone to [e, v_recv, v_send].
        std::vector<Tensor2> f(M, Tensor2::zeros(E, width));
        nn::Graph gref;
        const nn::Var nv = gref.input(nodes_t);
        const nn::Var ev = gref.input(edges_t);
        const nn::Var gathered_r = gref.gather_rows(nv, recv);
        const nn::Var gathered_s = gref.gather_rows(nv, send);
        const nn::Var ein = gref.concat_cols({ev, gathered_r, gathered_s});
        for (int m = 0; m < M; ++m) {
            const nn::Var fm =
                nn::mlp_forward(gref, ps, "t.type" + std::to_string(m), ein, {width, width});
            f[m] = gref.val(fm);
        }

        for (int m = 0; m <= M; ++m) {
            Tensor2 scores_t = Tensor2::zeros(E, M);
            Tensor2 expect = Tensor2::zeros(E, width);
            if (m < M) {
                for (int k = 0; k < E; ++k) scores_t.at(k, m) = 1.0;
                expect = f[m];
            } else {
                for (int k = 0; k < E; ++k) {
                    double rest = 1.0;
                    for (int c = 0; c + 1 < M; ++c) {
                        const double w = rng.uniform(0.0, rest);
                        scores_t.at(k, c) = w;
                        rest -= w;
                    }
                    scores_t.at(k, M - 1) = rest;
                }
                for (int k = 0; k < E; ++k) {
                    for (int j = 0; j < width; ++j) {
                        double acc = 0.0;
                        for (int c = 0; c < M; ++c) acc += scores_t.at(k, c) * f[c].at(k, j);
                        expect.at(k, j) = acc;
                    }
                }
            }
            nn::Graph g;
            const nn::Var out =
                gn::typed_edge_update(g, ps, "t", width, M, g.input(nodes_t), g.input(edges_t),
                                      recv, send, g.input(scores_t));
            const double diff = max_abs_diff(g.val(out), expect);
            if (m < M) {
                worst_onehot = std::max(worst_onehot, diff);
            } else {
                worst_mix = std::max(worst_mix, diff);
            }
        }
    }
    const bool ok = worst_onehot == 0.0 && worst_mix <= 1e-12;
    return {ok, fmt("one-hot selection err %.1e (want exact), mixture err %.2e over 1000 "
                    "instances (limit 1e-12)",
                    worst_onehot, worst_mix)};
}

// ---------------------------------------------------------------- check 3

Scene rigid_transform(const Scene& scene, double angle, Vec2 shift) {
    Scene out = scene;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const auto map = [&](AgentState& st) {
        const double x = c * st.x - s * st.y + shift.x;
        const double y = s * st.x + c * st.y + shift.y;
        const double vx = c * st.vx - s * st.vy;
        const double vy = s * st.vx + c * st.vy;
        st.x = x;
        st.y = y;
        st.vx = vx;
        st.vy = vy;
    };
    for (auto& ag : out.agents) {
        for (auto& st : ag.past) map(st);
        for (auto& st : ag.future) map(st);
    }
    out.agent_features.clear();
    out.pair_features.clear();
    return out;
}

ScenarioConfig kind_cfg(int i, uint64_t seed, double noise) {
    static const ScenarioKind kinds[4] = {ScenarioKind::Crossing, ScenarioKind::Following,
                                          ScenarioKind::Independent,
                                          ScenarioKind::MultiIntersection};
    ScenarioConfig cfg;
    cfg.kind = kinds[i % 4];
    cfg.seed = seed;
    cfg.noise_sigma = noise;
    if (cfg.kind == ScenarioKind::MultiIntersection) {
        cfg.num_agents = 3 + static_cast<int>(splitmix64(seed) % 4);
    }
    return cfg;
}

CheckResult check_labeler() {
    int anti_violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const Scene labeled =
            label_scene(gen_scene(kind_cfg(i, 7000 + static_cast<uint64_t>(i), 0.05)));
        for (const auto& [key, label] : labeled.labels) {
            const auto mirror_it = labeled.labels.find({key.second, key.first});
            if (mirror_it == labeled.labels.end() || mirror_it->second != mirror_label(label)) {
                ++anti_violations;
            }
        }
    }

    int transform_violations = 0;
    for (int i = 0; i < 100; ++i) {
        Rng rng(splitmix64(0x7F0Aull + static_cast<uint64_t>(i)));
        const Scene scene = gen_scene(kind_cfg(i, 52000 + static_cast<uint64_t>(i), 0.0));
        const Scene moved = rigid_transform(scene, rng.uniform(-3.1, 3.1),
                                            {rng.uniform(-80.0, 80.0), rng.uniform(-80.0, 80.0)});
        if (label_scene(scene).labels != label_scene(moved).labels) ++transform_violations;
    }
    const bool ok = anti_violations == 0 && transform_violations == 0;
    return {ok, fmt("antisymmetry violations %d/1000 scenes, transform violations %d/100 "
                    "(want zero)",
                    anti_violations, transform_violations)};
}

// ---------------------------------------------------------------- check 4

CheckResult check_geometry() {
    Rng rng(0x6E0Full);
    double worst_rt = 0.0;
    for (int i = 0; i < 100000; ++i) {
        AgentState st;
        st.x = rng.uniform(-100.0, 100.0);
        st.y = rng.uniform(-100.0, 100.0);
        st.vx = rng.uniform(-15.0, 15.0);
        st.vy = rng.uniform(-15.0, 15.0);
        const Frame f = frame_of(st, rng.uniform(-3.1, 3.1));
        const Vec2 p{rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0)};
        const Vec2 back = from_local(f, to_local(f, p));
        const Vec2 v{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
        const Vec2 vback = from_local_velocity(f, to_local_velocity(f, v));
        const double perr =
            std::hypot(back.x - p.x, back.y - p.y) / std::max(1.0, std::hypot(p.x, p.y));
        const double verr =
            std::hypot(vback.x - v.x, vback.y - v.y) / std::max(1.0, std::hypot(v.x, v.y));
        worst_rt = std::max({worst_rt, perr, verr});
    }

    double worst_pyth = 0.0;
    for (int i = 0; i < 100000; ++i) {
        AgentState truth;
        truth.x = rng.uniform(-50.0, 50.0);
        truth.y = rng.uniform(-50.0, 50.0);
        truth.vx = rng.uniform(-12.0, 12.0);
        truth.vy = rng.uniform(-12.0, 12.0);
        AgentState pred = truth;
        pred.x += rng.uniform(-5.0, 5.0);
        pred.y += rng.uniform(-5.0, 5.0);
        const std::vector<std::vector<AgentState>> p{std::vector<AgentState>(kFutureLen, pred)};
        const std::vector<std::vector<AgentState>> t{std::vector<AgentState>(kFutureLen, truth)};
        const MetricsReport r = compute_metrics(p, t);
        const double lhs = r.ate * r.ate + r.cte * r.cte;
        const double rhs = r.dpe * r.dpe;
        worst_pyth = std::max(worst_pyth, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
    const bool ok = worst_rt <= 1e-9 && worst_pyth <= 1e-9;
    return {ok, fmt("frame round-trip err %.2e, along/cross decomposition err %.2e over 1e5 "
                    "samples each (limit 1e-9)",
                    worst_rt, worst_pyth)};
}

// ------------------------------------------------------- checks 5, 6, 7

struct AblationOutcome {
    std::map<Variant, double> mean_dpe;
    double joint_acc = 0.0;
    double worst_variant_secs = 0.0;
    std::optional<nn::ParamStore> joint_params;
    ModelConfig model_config;
    bool trained = false;
};

const char* kAcceptanceData = "acceptance_data.jsonl";

TrainConfig ablation_profile() {
    TrainConfig cfg;
    cfg.model.hidden = 24;
    cfg.model.gn_width = 24;
    cfg.epochs = 30;
    cfg.batch = 8;
    cfg.lr = 1e-3;
    return cfg;
}

AblationOutcome& ablation() {
    static AblationOutcome out;
    if (out.trained) return out;

    const std::string data = (work_dir() / kAcceptanceData).string();
    DatasetMix mix;
    mix.crossing = 800;
    mix.following = 400;
    mix.independent = 400;
    mix.multi = 400;
    gen_dataset(mix, 20260815, data, 0.05);

    const std::vector<Scene> all = load_dataset(data);
    const std::vector<Scene> train_scenes = filter_split(all, Split::Train);
    const std::vector<Scene> val_scenes = filter_split(all, Split::Val);
    const std::vector<Scene> test_scenes = filter_split(all, Split::Test);

    const std::array<Variant, 7> variants = {
        Variant::Baseline,          Variant::Untyped,         Variant::UntypedNoIgnoring,
        Variant::Oracle,            Variant::OracleNoIgnoring, Variant::JointSupervised,
        Variant::JointUnsupervised,
    };
    const std::array<uint64_t, 3> seeds = {1, 2, 3};

    for (Variant v : variants) {
        const auto t0 = Clock::now();
        double dpe_sum = 0.0;
        double acc_sum = 0.0;
        for (uint64_t seed : seeds) {
            TrainConfig cfg = ablation_profile();
            cfg.variant = v;
            cfg.seed = seed;
            Model model(v, cfg.model);
            nn::ParamStore ps(seed);
            fit(cfg, model, ps, train_scenes, val_scenes);
            const MetricsReport r = evaluate(model, ps, test_scenes);
            dpe_sum += r.dpe;
            if (r.int_acc) acc_sum += *r.int_acc;
            if (v == Variant::JointSupervised && seed == seeds.front()) {
                out.joint_params = ps;
                out.model_config = cfg.model;
            }
        }
        out.mean_dpe[v] = dpe_sum / static_cast<double>(seeds.size());
        if (v == Variant::JointSupervised) out.joint_acc = acc_sum / 3.0;
        out.worst_variant_secs = std::max(out.worst_variant_secs, secs_since(t0));
    }
    out.trained = true;
    return out;
}

CheckResult check_orderings() {
    const AblationOutcome& ab = ablation();
    const double base = ab.mean_dpe.at(Variant::Baseline);
    double worst_ratio = 0.0;
    for (const auto& [v, dpe] : ab.mean_dpe) {
        if (v == Variant::Baseline) continue;
        worst_ratio = std::max(worst_ratio, dpe / base);
    }
    const double oracle = ab.mean_dpe.at(Variant::Oracle);
    const double untyped = ab.mean_dpe.at(Variant::Untyped);
    const double oracle_noig = ab.mean_dpe.at(Variant::OracleNoIgnoring);

    const bool ok = worst_ratio <= 0.9 && oracle <= untyped && oracle <= oracle_noig &&
                    ab.worst_variant_secs <= 600.0;
    return {ok, fmt("graph/baseline worst ratio %.3f (limit 0.9), oracle %.3f vs untyped %.3f "
                    "vs oracle-no-ignoring %.3f, slowest variant %.0fs (limit 600s)",
                    worst_ratio, oracle, untyped, oracle_noig, ab.worst_variant_secs)};
}

CheckResult check_interaction_accuracy() {
    const AblationOutcome& ab = ablation();
    return {ab.joint_acc >= 0.90,
            fmt("supervised interaction accuracy %.4f on held-out scenes (limit 0.90)",
                ab.joint_acc)};
}

CheckResult check_controllability() {
    AblationOutcome& ab = ablation();
    if (!ab.joint_params) return {false, "no trained supervised model available"};
    Model model(Variant::JointSupervised, ab.model_config);
    const ControllabilityResult r =
        controllability_study(model, *ab.joint_params, 120, 990000);
    const bool ok = r.scenes >= 100 && r.flip_rate >= 0.80;
    return {ok, fmt("arrival order flipped on %d/%d symmetric crossings (%.1f%%, limit 80%%)",
                    r.flipped, r.scenes, 100.0 * r.flip_rate)};
}

// ---------------------------------------------------------------- check 8

CheckResult check_determinism() {
    const auto dir = work_dir();
    std::array<std::string, 2> data_bytes, ckpt_bytes, log_bytes, metrics_bytes;
    for (int run = 0; run < 2; ++run) {
        const std::string tag = run == 0 ? "a" : "b";
        const std::string data = (dir / ("det_" + tag + ".jsonl")).string();
        const std::string ckpt = (dir / ("det_" + tag + ".ckpt")).string();
        const std::string log = (dir / ("det_" + tag + ".log.csv")).string();

        DatasetMix mix;
        mix.crossing = 30;
        mix.following = 10;
        mix.independent = 10;
        mix.multi = 10;
        gen_dataset(mix, 4242, data, 0.05);

        TrainConfig cfg;
        cfg.variant = Variant::JointSupervised;
        cfg.model.hidden = 8;
        cfg.model.gn_width = 8;
        cfg.epochs = 3;
        cfg.seed = 9;
        train(cfg, data, ckpt, log);

        const LoadedCheckpoint ck = load_checkpoint(ckpt);
        Model model(ck.variant, ck.config);
        nn::ParamStore ps = ck.params;
        const std::vector<Scene> test_scenes = filter_split(load_dataset(data), Split::Test);
        const MetricsReport r = evaluate(model, ps, test_scenes);

        data_bytes[run] = slurp(data);
        ckpt_bytes[run] = slurp(ckpt);
        log_bytes[run] = slurp(log);
        metrics_bytes[run] = metrics_csv(r);
    }
    const bool data_ok = data_bytes[0] == data_bytes[1] && !data_bytes[0].empty();
    const bool ckpt_ok = ckpt_bytes[0] == ckpt_bytes[1] && !ckpt_bytes[0].empty();
    const bool log_ok = log_bytes[0] == log_bytes[1] && !log_bytes[0].empty();
    const bool metrics_ok = metrics_bytes[0] == metrics_bytes[1] && !metrics_bytes[0].empty();
    const bool ok = data_ok && ckpt_ok && log_ok && metrics_ok;
    return {ok, fmt("byte-identical across two runs: dataset %s, checkpoint %s, train log %s, "
                    "metrics %s",
                    data_ok ? "yes" : "NO", ckpt_ok ? "yes" : "NO", log_ok ? "yes" : "NO",
                    metrics_ok ? "yes" : "NO")};
}

// ---------------------------------------------------------------- check 9

Scene solo_scene(bool moving) {
    Scene scene;
    scene.scene_id = moving ? "solo_moving" : "solo_parked";
    SceneAgent ag;
    ag.id = "a0";
    for (int k = 0; k < kWindowLen; ++k) {
        AgentState st;
        st.x = moving ? 3.0 * kDt * k : 4.0;
        st.y = moving ? -1.0 + 0.5 * kDt * k : -2.0;
        st.vx = moving ? 3.0 : 0.0;
        st.vy = moving ? 0.5 : 0.0;
        if (k < kPastLen) {
            ag.past.push_back(st);
        } else {
            ag.future.push_back(st);
        }
    }
    scene.agents.push_back(ag);
    return label_scene(scene);
}

Trajectory straight_future(const std::string& id, Vec2 from, Vec2 vel) {
    Trajectory t;
    t.agent_id = id;
    for (int k = 0; k < kFutureLen; ++k) {
        AgentState st;
        st.x = from.x + vel.x * kDt * static_cast<double>(k);
        st.y = from.y + vel.y * kDt * static_cast<double>(k);
        st.vx = vel.x;
        st.vy = vel.y;
        t.states.push_back(st);
    }
    return t;
}

CheckResult check_degenerate() {
    std::vector<std::string> problems;
    ModelConfig mc;
    mc.hidden = 6;
    mc.gn_width = 6;
    const std::array<Variant, 7> variants = {
        Variant::Baseline,          Variant::Untyped,         Variant::UntypedNoIgnoring,
        Variant::Oracle,            Variant::OracleNoIgnoring, Variant::JointSupervised,
        Variant::JointUnsupervised,
    };

    // Single-agent and fully stationary scenes run through every variant.
    for (const Scene& scene : {solo_scene(true), solo_scene(false)}) {
        for (Variant v : variants) {
            try {
                Model model(v, mc);
                nn::ParamStore ps(11);
                const auto pred = model.predict(ps, scene);
                for (const auto& traj : pred) {
                    for (const auto& st : traj) {
                        if (!std::isfinite(st.x) || !std::isfinite(st.y) ||
                            !std::isfinite(st.vx) || !std::isfinite(st.vy)) {
                            problems.push_back(scene.scene_id + "/" +
                                               std::string(variant_name(v)) +
                                               ": non-finite prediction");
                        }
                    }
                }
                nn::Graph g;
                const Forward f = model.forward(g, ps, scene);
                g.backward(model.loss(g, f, scene));
            } catch (const std::exception& e) {
                problems.push_back(scene.scene_id + "/" + std::string(variant_name(v)) + ": " +
                                   e.what());
            }
        }
    }

    // A stationary agent paired with a mover: heading fallback path.
    {
        Scene pair = solo_scene(false);
        SceneAgent mover;
        mover.id = "a1";
        for (int k = 0; k < kWindowLen; ++k) {
            AgentState st;
            st.x = -10.0 + 4.0 * kDt * k;
            st.y = 3.0;
            st.vx = 4.0;
            st.vy = 0.0;
            if (k < kPastLen) {
                mover.past.push_back(st);
            } else {
                mover.future.push_back(st);
            }
        }
        pair.agents.push_back(mover);
        pair = label_scene(pair);
        try {
            Model model(Variant::JointSupervised, mc);
            nn::ParamStore ps(12);
            const auto pred = model.predict(ps, pair);
            for (const auto& traj : pred) {
                for (const auto& st : traj) {
                    if (!std::isfinite(st.x) || !std::isfinite(st.y)) {
                        problems.push_back("stationary pair: non-finite prediction");
                    }
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("stationary pair: ") + e.what());
        }
    }

    // Exactly simultaneous arrivals tie-break toward the smaller agent id,
    // antisymmetrically, no matter the argument order.
    {
        const Trajectory a = straight_future("a0", {-4.0, 0.0}, {1.0, 0.0});
        const Trajectory b = straight_future("a1", {0.0, -4.0}, {0.0, 1.0});
        if (label_pair(a, b) != InteractionLabel::Going) {
            problems.push_back("tie-break: smaller id not GOING");
        }
        if (label_pair(b, a) != InteractionLabel::Yielding) {
            problems.push_back("tie-break: larger id not YIELDING");
        }
    }

    if (problems.empty()) {
        return {true, "single-agent, stationary, and tied-arrival inputs all honored their "
                      "contracts across 7 variants"};
    }
    std::string detail = fmt("%zu problem(s): ", problems.size());
    for (size_t i = 0; i < problems.size() && i < 3; ++i) {
        if (i) detail += "; ";
        detail += problems[i];
    }
    return {false, detail};
}

}  // namespace

int main(int argc, char** argv) {
    struct Entry {
        int num;
        const char* name;
        CheckResult (*run)();
    };
    const std::array<Entry, 9> entries = {{
        {1, "gradient integrity", check_gradients},
        {2, "typed edge semantics", check_typed_edges},
        {3, "labeler properties", check_labeler},
        {4, "geometry", check_geometry},
        {5, "ablation orderings", check_orderings},
        {6, "interaction accuracy", check_interaction_accuracy},
        {7, "injection controllability", check_controllability},
        {8, "pipeline determinism", check_determinism},
        {9, "degenerate inputs", check_degenerate},
    }};

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    int ran = 0;
    for (const Entry& e : entries) {
        if (!wanted.empty() && wanted.count(e.num) == 0) continue;
        ++ran;
        CheckResult r;
        try {
            r = e.run();
        } catch (const std::exception& ex) {
            r = {false, std::string("exception: ") + ex.what()};
        }
        if (!r.ok) ++failures;
        std::printf("[%d/9] %s  %s: %s\n", e.num, r.ok ? "PASS" : "FAIL", e.name,
                    r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%d passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
