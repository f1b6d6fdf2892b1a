#include "traject/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "traject/errors.hpp"
#include "traject/geometry.hpp"
#include "traject/rng.hpp"
#include "traject/scenegen.hpp"

namespace traject {
namespace {

constexpr std::array<int, 3> kHorizonSteps = {1, 5, 9};  // 1 s, 3 s, 5 s at kDt

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

// Unit heading of the truth trajectory at step t, scanning backwards to the
// most recent moving sample and defaulting to +x for never-moving agents.
Vec2 truth_heading(const std::vector<AgentState>& truth, int t) {
    for (int k = t; k >= 0; --k) {
        const double sp = truth[k].speed();
        if (sp >= kHeadingSpeedMin) return {truth[k].vx / sp, truth[k].vy / sp};
    }
    return {1.0, 0.0};
}

struct PointErrors {
    double dpe, ate, cte;
};

PointErrors point_errors(const AgentState& pred, const std::vector<AgentState>& truth, int t) {
    const Vec2 d{pred.x - truth[t].x, pred.y - truth[t].y};
    const Vec2 u = truth_heading(truth, t);
    const double ate = std::abs(d.x * u.x + d.y * u.y);
    const double cte = std::abs(-d.x * u.y + d.y * u.x);
    return {d.norm(), ate, cte};
}

double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return xs.empty() ? 0.0 : m / static_cast<double>(xs.size());
}

void require_labels(const Model& model, const TrainConfig& config,
                    const std::vector<Scene>& scenes, const char* which) {
    const VariantTraits& t = model.traits();
    const double alpha = config.alpha.value_or(t.alpha);
    const bool needed = t.oracle_scores || t.drop_ignoring || (t.interaction_net && alpha != 0.0);
    if (!needed) return;
    for (const Scene& s : scenes) {
        if (!s.has_labels) {
            throw DataError(std::string(variant_name(model.variant())) + " needs labeled " +
                            which + " scenes but '" + s.scene_id + "' is unlabeled");
        }
    }
}

struct ScenePass {
    std::vector<std::vector<AgentState>> pred;
    double loss = 0.0;
};

ScenePass run_scene(const Model& model, nn::ParamStore& ps, const Scene& scene, bool with_loss,
                    bool backward, MetricsAccumulator* acc) {
    nn::Graph g;
    const Forward f = model.forward(g, ps, scene);
    ScenePass out;
    out.pred = unpack_future(g, f);
    if (with_loss) {
        const nn::Var l = model.loss(g, f, scene);
        out.loss = g.val(l).at(0, 0);
        if (!std::isfinite(out.loss)) {
            const auto tag = g.first_nonfinite();
            throw NumericError("non-finite loss on scene '" + scene.scene_id +
                               "'; first non-finite tensor: " + tag.value_or("(loss only)"));
        }
        if (backward) g.backward(l);
    }
    if (acc != nullptr) {
        std::vector<std::vector<AgentState>> truth(scene.num_agents());
        for (int i = 0; i < scene.num_agents(); ++i) truth[i] = scene.agents[i].future;
        acc->add_scene(out.pred, truth);
        if (f.has_scores && scene.has_labels) {
            const Tensor2& sc = g.val(f.scores);
            for (size_t e = 0; e < f.pairs.size(); ++e) {
                const auto it = scene.labels.find(f.pairs[e]);
                if (it == scene.labels.end()) continue;
                int best = 0;
                for (int m = 1; m < sc.cols; ++m) {
                    if (sc.at(static_cast<int>(e), m) > sc.at(static_cast<int>(e), best)) best = m;
                }
                acc->add_pair(it->second, best);
            }
        }
    }
    return out;
}

// Interpolated time at which the polyline (current -> predicted samples)
// comes closest to `point`; earliest minimum wins ties.
double closest_approach_time(const AgentState& current, const std::vector<AgentState>& states,
                             Vec2 point, double dt) {
    std::vector<Vec2> pts;
    pts.reserve(states.size() + 1);
    pts.push_back({current.x, current.y});
    for (const auto& s : states) pts.push_back({s.x, s.y});

    double best_d2 = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const Vec2 a = pts[k];
        const Vec2 b = pts[k + 1];
        const Vec2 ab{b.x - a.x, b.y - a.y};
        const double len2 = ab.x * ab.x + ab.y * ab.y;
        double s = 0.0;
        if (len2 > 0.0) {
            s = ((point.x - a.x) * ab.x + (point.y - a.y) * ab.y) / len2;
            s = std::clamp(s, 0.0, 1.0);
        }
        const Vec2 q{a.x + s * ab.x, a.y + s * ab.y};
        const double d2 = (q.x - point.x) * (q.x - point.x) + (q.y - point.y) * (q.y - point.y);
        if (d2 < best_d2 - 1e-12) {
            best_d2 = d2;
            best_t = (static_cast<double>(k) + s) * dt;
        }
    }
    return best_t;
}

Trajectory as_trajectory(const std::string& id, const std::vector<AgentState>& states,
                         double dt) {
    Trajectory t;
    t.agent_id = id;
    t.dt = dt;
    t.states = states;
    return t;
}

}  // namespace

Split split_of(const std::string& scene_id) {
    const uint64_t h = fnv1a64(scene_id) % 100;
    if (h < 70) return Split::Train;
    if (h < 85) return Split::Val;
    return Split::Test;
}

const char* split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "unknown";
}

Split split_from_name(const std::string& name) {
    for (Split s : {Split::Train, Split::Val, Split::Test}) {
        if (name == split_name(s)) return s;
    }
    throw std::invalid_argument("unknown split: " + name);
}

std::vector<Scene> filter_split(const std::vector<Scene>& scenes, Split split) {
    std::vector<Scene> out;
    for (const Scene& s : scenes) {
        if (split_of(s.scene_id) == split) out.push_back(s);
    }
    return out;
}

void MetricsAccumulator::add_scene(const std::vector<std::vector<AgentState>>& pred,
                                   const std::vector<std::vector<AgentState>>& truth) {
    if (pred.size() != truth.size()) throw DataError("metrics: agent count mismatch");
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != static_cast<size_t>(kFutureLen) || pred[i].size() != truth[i].size()) {
            throw DataError("metrics: trajectory length mismatch");
        }
        for (int t = 0; t < kFutureLen; ++t) {
            const PointErrors e = point_errors(pred[i][t], truth[i], t);
            sum_dpe_ += e.dpe;
            sum_ate_ += e.ate;
            sum_cte_ += e.cte;
            ++n_points_;
        }
        for (size_t h = 0; h < kHorizonSteps.size(); ++h) {
            const PointErrors e = point_errors(pred[i][kHorizonSteps[h]], truth[i],
                                               kHorizonSteps[h]);
            sum_dpe_h_[h] += e.dpe;
            sum_ate_h_[h] += e.ate;
            sum_cte_h_[h] += e.cte;
        }
        ++n_horizon_;
    }
}

void MetricsAccumulator::add_pair(InteractionLabel truth, int predicted_class) {
    saw_scores_ = true;
    const int t = label_to_int(truth);
    if (predicted_class < 0 || predicted_class > 2) throw DataError("metrics: bad class index");
    ++confusion_[t][predicted_class];
    ++n_pairs_;
    if (t == predicted_class) ++n_correct_;
}

MetricsReport MetricsAccumulator::report() const {
    MetricsReport r;
    if (n_points_ > 0) {
        r.dpe = sum_dpe_ / static_cast<double>(n_points_);
        r.ate = sum_ate_ / static_cast<double>(n_points_);
        r.cte = sum_cte_ / static_cast<double>(n_points_);
    }
    if (n_horizon_ > 0) {
        for (size_t h = 0; h < kHorizonSteps.size(); ++h) {
            r.dpe_h[h] = sum_dpe_h_[h] / static_cast<double>(n_horizon_);
            r.ate_h[h] = sum_ate_h_[h] / static_cast<double>(n_horizon_);
            r.cte_h[h] = sum_cte_h_[h] / static_cast<double>(n_horizon_);
        }
    }
    r.n_points = n_points_;
    r.confusion = confusion_;
    r.n_pairs = n_pairs_;
    if (saw_scores_ && n_pairs_ > 0) {
        r.int_acc = static_cast<double>(n_correct_) / static_cast<double>(n_pairs_);
    }
    return r;
}

MetricsReport compute_metrics(const std::vector<std::vector<AgentState>>& pred,
                              const std::vector<std::vector<AgentState>>& truth) {
    MetricsAccumulator acc;
    acc.add_scene(pred, truth);
    return acc.report();
}

MetricsReport evaluate(const Model& model, nn::ParamStore& params,
                       const std::vector<Scene>& scenes) {
    MetricsAccumulator acc;
    for (const Scene& scene : scenes) run_scene(model, params, scene, false, false, &acc);
    return acc.report();
}

std::string metrics_csv(const MetricsReport& r) {
    std::ostringstream out;
    out << "metric,overall,h1s,h3s,h5s\n";
    out << "dpe," << fmt(r.dpe) << ',' << fmt(r.dpe_h[0]) << ',' << fmt(r.dpe_h[1]) << ','
        << fmt(r.dpe_h[2]) << '\n';
    out << "ate," << fmt(r.ate) << ',' << fmt(r.ate_h[0]) << ',' << fmt(r.ate_h[1]) << ','
        << fmt(r.ate_h[2]) << '\n';
    out << "cte," << fmt(r.cte) << ',' << fmt(r.cte_h[0]) << ',' << fmt(r.cte_h[1]) << ','
        << fmt(r.cte_h[2]) << '\n';
    if (r.int_acc) out << "int_acc," << fmt(*r.int_acc) << ",,,\n";
    return out.str();
}

TrainRun fit(const TrainConfig& config, Model& model, nn::ParamStore& params,
             const std::vector<Scene>& train_scenes, const std::vector<Scene>& val_scenes) {
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (config.lr < 0.0 || !std::isfinite(config.lr)) {
        throw std::invalid_argument("learning rate must be finite and >= 0");
    }
    if (train_scenes.empty()) throw DataError("no training scenes");
    if (config.alpha) model.set_alpha(*config.alpha);
    require_labels(model, config, train_scenes, "training");
    require_labels(model, config, val_scenes, "validation");

    const int n = static_cast<int>(train_scenes.size());
    TrainRun run;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        Rng rng(splitmix64(config.seed) + static_cast<uint64_t>(epoch));
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += config.batch) {
            const int stop = std::min(n, start + config.batch);
            for (int k = start; k < stop; ++k) {
                epoch_loss +=
                    run_scene(model, params, train_scenes[order[k]], true, true, nullptr).loss;
            }
            params.scale_grads(1.0 / static_cast<double>(stop - start));
            const double norm = params.clip_grad_norm(config.clip_norm);
            if (!std::isfinite(norm)) {
                throw NumericError("non-finite gradient norm at epoch " + std::to_string(epoch));
            }
            params.adam_step(config.lr);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss / static_cast<double>(n);
        MetricsAccumulator acc;
        double val_loss = 0.0;
        for (const Scene& scene : val_scenes) {
            val_loss += run_scene(model, params, scene, true, false, &acc).loss;
        }
        log.val_loss = val_scenes.empty() ? 0.0 : val_loss / static_cast<double>(val_scenes.size());
        log.val = acc.report();
        run.epochs.push_back(std::move(log));
    }
    run.final_val = run.epochs.back().val;
    return run;
}

std::string train_log_csv(const TrainRun& run) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,val_dpe,val_ate,val_cte,val_int_acc\n";
    for (const EpochLog& e : run.epochs) {
        out << e.epoch << ',' << fmt(e.train_loss) << ',';
        if (e.val.n_points > 0) {
            out << fmt(e.val_loss) << ',' << fmt(e.val.dpe) << ',' << fmt(e.val.ate) << ','
                << fmt(e.val.cte) << ',' << fmt_opt(e.val.int_acc);
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
    return out.str();
}

TrainRun train(const TrainConfig& config, const std::string& data_path,
               const std::string& checkpoint_path, const std::string& log_path) {
    const std::vector<Scene> scenes = load_dataset(data_path);
    const std::vector<Scene> train_scenes = filter_split(scenes, Split::Train);
    const std::vector<Scene> val_scenes = filter_split(scenes, Split::Val);

    Model model(config.variant, config.model);
    nn::ParamStore params(config.seed);
    TrainRun run = fit(config, model, params, train_scenes, val_scenes);
    save_checkpoint(checkpoint_path, params, model.variant(), model.config());
    if (!log_path.empty()) {
        std::ofstream out(log_path, std::ios::binary);
        if (!out) throw DataError("cannot write training log: " + log_path);
        out << train_log_csv(run);
    }
    return run;
}

std::string ablate(const std::string& data_path, const std::vector<uint64_t>& seeds,
                   const TrainConfig& base_config) {
    if (seeds.empty()) throw std::invalid_argument("ablate needs at least one seed");
    const std::vector<Scene> scenes = load_dataset(data_path);
    const std::vector<Scene> train_scenes = filter_split(scenes, Split::Train);
    const std::vector<Scene> val_scenes = filter_split(scenes, Split::Val);
    const std::vector<Scene> test_scenes = filter_split(scenes, Split::Test);
    if (test_scenes.empty()) throw DataError("ablation dataset has no test-split scenes");

    std::ostringstream out;
    out << "variant,seed,dpe,ate,cte,int_acc\n";
    for (Variant v : {Variant::Baseline, Variant::Untyped, Variant::UntypedNoIgnoring,
                      Variant::Oracle, Variant::OracleNoIgnoring, Variant::JointSupervised,
                      Variant::JointUnsupervised}) {
        std::vector<double> dpes, ates, ctes, accs;
        for (uint64_t seed : seeds) {
            TrainConfig config = base_config;
            config.variant = v;
            config.seed = seed;
            config.alpha.reset();  // each variant trains with its own CE weight
            Model model(v, config.model);
            nn::ParamStore params(seed);
            fit(config, model, params, train_scenes, val_scenes);
            const MetricsReport r = evaluate(model, params, test_scenes);
            dpes.push_back(r.dpe);
            ates.push_back(r.ate);
            ctes.push_back(r.cte);
            if (r.int_acc) accs.push_back(*r.int_acc);
            out << variant_name(v) << ',' << seed << ',' << fmt(r.dpe) << ',' << fmt(r.ate) << ','
                << fmt(r.cte) << ',' << (r.int_acc ? fmt(*r.int_acc) : std::string()) << '\n';
        }
        const bool has_acc = accs.size() == seeds.size();
        out << variant_name(v) << ",mean," << fmt(mean_of(dpes)) << ',' << fmt(mean_of(ates))
            << ',' << fmt(mean_of(ctes)) << ',' << (has_acc ? fmt(mean_of(accs)) : std::string())
            << '\n';
        out << variant_name(v) << ",stddev," << fmt(sample_stddev(dpes)) << ','
            << fmt(sample_stddev(ates)) << ',' << fmt(sample_stddev(ctes)) << ','
            << (has_acc ? fmt(sample_stddev(accs)) : std::string()) << '\n';
    }
    return out.str();
}

InjectionReport inject_edges(const Model& model, nn::ParamStore& params, const Scene& scene,
                             const InjectionMap& overrides) {
    InjectionReport report;
    report.scene_id = scene.scene_id;
    report.overrides = overrides;
    report.pred = model.predict(params, scene, &overrides);

    for (const auto& [pair, label] : overrides) {
        (void)label;
        const int i = pair.first;
        const int j = pair.second;
        PairArrival arrival;
        arrival.pair = pair;

        const Trajectory pi = as_trajectory("pred_i", report.pred[i], scene.dt);
        const Trajectory pj = as_trajectory("pred_j", report.pred[j], scene.dt);
        std::optional<PathCrossing> crossing = path_crossing(pi, pj);
        if (!crossing) {
            const Trajectory ti = as_trajectory("truth_i", scene.agents[i].future, scene.dt);
            const Trajectory tj = as_trajectory("truth_j", scene.agents[j].future, scene.dt);
            crossing = path_crossing(ti, tj);
        }
        if (crossing) {
            arrival.conflict = crossing->point;
            const double ti = closest_approach_time(scene.current(i), report.pred[i],
                                                    crossing->point, scene.dt);
            const double tj = closest_approach_time(scene.current(j), report.pred[j],
                                                    crossing->point, scene.dt);
            arrival.first = ti <= tj ? i : j;
            arrival.t_first = std::min(ti, tj);
            arrival.t_second = std::max(ti, tj);
        }
        report.arrivals.push_back(arrival);
    }
    return report;
}

std::string injection_json(const InjectionReport& report) {
    nlohmann::ordered_json j;
    j["scene_id"] = report.scene_id;
    nlohmann::ordered_json ov = nlohmann::ordered_json::array();
    for (const auto& [pair, label] : report.overrides) {
        ov.push_back({{"pair", {pair.first, pair.second}}, {"label", label_name(label)}});
    }
    j["overrides"] = std::move(ov);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const PairArrival& a : report.arrivals) {
        nlohmann::ordered_json e;
        e["pair"] = {a.pair.first, a.pair.second};
        e["first"] = a.first;
        if (a.conflict) {
            e["conflict"] = {a.conflict->x, a.conflict->y};
            e["t_first"] = a.t_first;
            e["t_second"] = a.t_second;
        } else {
            e["conflict"] = nullptr;
        }
        arr.push_back(std::move(e));
    }
    j["arrivals"] = std::move(arr);
    nlohmann::ordered_json trajs = nlohmann::ordered_json::array();
    for (const auto& states : report.pred) {
        nlohmann::ordered_json t = nlohmann::ordered_json::array();
        for (const AgentState& s : states) t.push_back({s.x, s.y, s.vx, s.vy});
        trajs.push_back(std::move(t));
    }
    j["trajectories"] = std::move(trajs);
    return j.dump();
}

ControllabilityResult controllability_study(const Model& model, nn::ParamStore& params,
                                            int n_scenes, uint64_t base_seed) {
    if (n_scenes < 1) throw std::invalid_argument("controllability study needs scenes");
    ControllabilityResult result;
    InjectionMap fwd, rev;
    fwd[{0, 1}] = InteractionLabel::Going;
    fwd[{1, 0}] = InteractionLabel::Yielding;
    rev[{0, 1}] = InteractionLabel::Yielding;
    rev[{1, 0}] = InteractionLabel::Going;

    for (int k = 0; k < n_scenes; ++k) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::Crossing;
        cfg.seed = base_seed + static_cast<uint64_t>(k);
        const Scene scene = gen_crossing_symmetric(cfg);

        const InjectionReport a = inject_edges(model, params, scene, fwd);
        const InjectionReport b = inject_edges(model, params, scene, rev);
        ++result.scenes;
        if (a.arrivals[0].first == 0 && b.arrivals[0].first == 1) ++result.flipped;
    }
    result.flip_rate = static_cast<double>(result.flipped) / static_cast<double>(result.scenes);
    return result;
}

}  // namespace traject
