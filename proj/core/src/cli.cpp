#include "traject/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "traject/errors.hpp"
#include "traject/harness.hpp"
#include "traject/labeler.hpp"
#include "traject/model.hpp"
#include "traject/scenegen.hpp"
#include "traject/types.hpp"

namespace traject::cli {
namespace {

std::string fmt3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const char* agent_color(int i) {
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
    return kPalette[i % 8];
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty entry in seed list");
        size_t used = 0;
        const uint64_t v = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad seed: " + item);
        seeds.push_back(v);
    }
    if (seeds.empty()) throw std::invalid_argument("seed list is empty");
    return seeds;
}

InteractionLabel parse_label_name(const std::string& name) {
    for (int v = 0; v < 3; ++v) {
        if (name == label_name(label_from_int(v))) return label_from_int(v);
    }
    throw std::invalid_argument("unknown interaction label: " + name +
                                " (expected IGNORING, GOING or YIELDING)");
}

InjectionMap parse_overrides(const std::vector<std::string>& sets) {
    InjectionMap overrides;
    for (const std::string& item : sets) {
        std::stringstream ss(item);
        std::string si, sj, sl;
        if (!std::getline(ss, si, ',') || !std::getline(ss, sj, ',') || !std::getline(ss, sl)) {
            throw std::invalid_argument("bad --set '" + item + "' (want i,j,LABEL)");
        }
        overrides[{std::stoi(si), std::stoi(sj)}] = parse_label_name(sl);
    }
    return overrides;
}

// ---------------------------------------------------------------- plotting

struct Bounds {
    double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
    bool any = false;

    void include(double x, double y) {
        if (!any) {
            min_x = max_x = x;
            min_y = max_y = y;
            any = true;
        } else {
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
};

/// Trajectories as dot sequences, one grid cell per scene: observed past as
/// faint dots, ground-truth future and predictions with opacity fading
/// toward the horizon. Pure text generation, byte-identical for equal input.
std::string scenes_svg(const std::vector<Scene>& scenes,
                       const std::vector<std::vector<std::vector<AgentState>>>* preds) {
    const int cell = 360;
    const int margin = 20;
    const int cols = scenes.empty() ? 1 : static_cast<int>(std::ceil(std::sqrt(scenes.size())));
    const int rows = scenes.empty() ? 1 : static_cast<int>((scenes.size() + cols - 1) / cols);
    const int width = cols * (cell + margin) + margin;
    const int height = rows * (cell + margin) + margin;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";

    for (size_t sidx = 0; sidx < scenes.size(); ++sidx) {
        const Scene& scene = scenes[sidx];
        Bounds b;
        for (const auto& ag : scene.agents) {
            for (const auto& st : ag.past) b.include(st.x, st.y);
            for (const auto& st : ag.future) b.include(st.x, st.y);
        }
        if (preds != nullptr) {
            for (const auto& traj : (*preds)[sidx]) {
                for (const auto& st : traj) b.include(st.x, st.y);
            }
        }
        const double pad = 4.0;
        const double span_x = (b.max_x - b.min_x) + 2 * pad;
        const double span_y = (b.max_y - b.min_y) + 2 * pad;
        const double scale = cell / std::max({span_x, span_y, 1e-9});
        const double ox = margin + static_cast<double>(sidx % cols) * (cell + margin);
        const double oy = margin + static_cast<double>(sidx / cols) * (cell + margin);
        const auto px = [&](double x) { return ox + (x - b.min_x + pad) * scale; };
        const auto py = [&](double y) { return oy + (b.max_y + pad - y) * scale; };

        svg << "<g class=\"scene\" id=\"scene-" << scene.scene_id << "\">\n";
        svg << "<rect class=\"cell\" x=\"" << fmt3(ox) << "\" y=\"" << fmt3(oy) << "\" width=\""
            << cell << "\" height=\"" << cell << "\" fill=\"#f7f7f7\" stroke=\"#cccccc\"/>\n";
        svg << "<text x=\"" << fmt3(ox + 6) << "\" y=\"" << fmt3(oy + 16)
            << "\" font-size=\"12\" fill=\"#333333\">" << scene.scene_id << "</text>\n";

        for (int i = 0; i < scene.num_agents(); ++i) {
            const char* color = agent_color(i);
            svg << "<g class=\"truth\" id=\"" << scene.scene_id << "-truth-" << i << "\">\n";
            for (const auto& st : scene.agents[i].past) {
                svg << "<circle cx=\"" << fmt3(px(st.x)) << "\" cy=\"" << fmt3(py(st.y))
                    << "\" r=\"1.6\" fill=\"" << color << "\" opacity=\"0.25\"/>\n";
            }
            for (size_t t = 0; t < scene.agents[i].future.size(); ++t) {
                const auto& st = scene.agents[i].future[t];
                svg << "<circle cx=\"" << fmt3(px(st.x)) << "\" cy=\"" << fmt3(py(st.y))
                    << "\" r=\"2.4\" fill=\"" << color << "\" opacity=\""
                    << fmt3(1.0 - 0.08 * static_cast<double>(t)) << "\"/>\n";
            }
            svg << "</g>\n";
            if (preds != nullptr) {
                svg << "<g class=\"pred\" id=\"" << scene.scene_id << "-pred-" << i << "\">\n";
                const auto& traj = (*preds)[sidx][i];
                for (size_t t = 0; t < traj.size(); ++t) {
                    svg << "<circle cx=\"" << fmt3(px(traj[t].x)) << "\" cy=\""
                        << fmt3(py(traj[t].y)) << "\" r=\"1.8\" fill=\"none\" stroke=\"" << color
                        << "\" stroke-width=\"1.1\" opacity=\""
                        << fmt3(1.0 - 0.08 * static_cast<double>(t)) << "\"/>\n";
                }
                svg << "</g>\n";
            }
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

/// Horizon bar chart of a metrics CSV produced by `evaluate`.
std::string metrics_svg(const std::map<std::string, std::array<double, 4>>& rows) {
    static const char* kMetrics[] = {"dpe", "ate", "cte"};
    static const char* kMetricColor[] = {"#1f77b4", "#2ca02c", "#d62728"};
    static const char* kHorizons[] = {"h1s", "h3s", "h5s"};

    double ymax = 1e-9;
    for (const char* m : kMetrics) {
        const auto it = rows.find(m);
        if (it == rows.end()) throw DataError(std::string("metrics csv is missing row: ") + m);
        for (int h = 0; h < 3; ++h) ymax = std::max(ymax, it->second[h + 1]);
    }

    const int width = 460, height = 320, base_y = 270, chart_h = 220;
    const int group_w = 120, bar_w = 28;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";
    svg << "<line x1=\"40\" y1=\"" << base_y << "\" x2=\"" << (width - 20) << "\" y2=\"" << base_y
        << "\" stroke=\"#333333\"/>\n";
    for (int h = 0; h < 3; ++h) {
        const int gx = 60 + h * group_w;
        svg << "<text x=\"" << (gx + bar_w * 3 / 2) << "\" y=\"" << (base_y + 20)
            << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">" << kHorizons[h]
            << "</text>\n";
        for (int m = 0; m < 3; ++m) {
            const double v = rows.at(kMetrics[m])[h + 1];
            const double bh = v / ymax * chart_h;
            svg << "<rect class=\"bar bar-" << kMetrics[m] << "\" x=\"" << (gx + m * bar_w)
                << "\" y=\"" << fmt3(base_y - bh) << "\" width=\"" << (bar_w - 4)
                << "\" height=\"" << fmt3(bh) << "\" fill=\"" << kMetricColor[m] << "\"/>\n";
            svg << "<text x=\"" << (gx + m * bar_w + (bar_w - 4) / 2) << "\" y=\""
                << fmt3(base_y - bh - 4) << "\" font-size=\"9\" text-anchor=\"middle\" "
                << "fill=\"#333333\">" << fmt3(v) << "</text>\n";
        }
    }
    for (int m = 0; m < 3; ++m) {
        svg << "<rect x=\"" << (60 + m * 90) << "\" y=\"14\" width=\"10\" height=\"10\" fill=\""
            << kMetricColor[m] << "\"/>\n";
        svg << "<text x=\"" << (74 + m * 90) << "\" y=\"23\" font-size=\"11\" fill=\"#333333\">"
            << kMetrics[m] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::map<std::string, std::array<double, 4>> parse_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open metrics csv: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("metric,overall", 0) != 0) {
        throw DataError("not a metrics csv (missing header): " + path);
    }
    std::map<std::string, std::array<double, 4>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string name, cellv;
        std::getline(ss, name, ',');
        std::array<double, 4> vals{};
        for (int k = 0; k < 4; ++k) {
            if (!std::getline(ss, cellv, ',')) cellv.clear();
            try {
                vals[k] = cellv.empty() ? 0.0 : std::stod(cellv);
            } catch (const std::exception&) {
                throw DataError("bad value '" + cellv + "' in metrics csv: " + path);
            }
        }
        rows[name] = vals;
    }
    return rows;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << content;
    if (!out) throw DataError("failed writing: " + path);
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::fputs(content.c_str(), stdout);
    } else {
        write_file(out_path, content);
    }
}

// ------------------------------------------------------------- subcommands

struct GenerateOpts {
    std::string kind_mix;
    std::string out;
    uint64_t seed = 1;
    double noise = 0.05;
};

struct LabelOpts {
    std::string data;
    std::string out;
};

struct TrainOpts {
    std::string data;
    std::string out;
    std::string log;
    std::string variant = "joint_supervised";
    int epochs = 30;
    int batch = 8;
    double lr = 1e-3;
    uint64_t seed = 1;
    std::optional<double> alpha;
    int hidden = 64;
    int width = 64;
};

struct EvaluateOpts {
    std::string model;
    std::string data;
    std::string split = "test";
};

struct AblateOpts {
    std::string data;
    std::string out;
    std::string seeds = "1,2,3";
    int epochs = 30;
    int batch = 8;
    double lr = 1e-3;
    int hidden = 24;
    int width = 24;
};

struct InjectOpts {
    std::string model;
    std::string data;
    std::string scene;
    std::vector<std::string> sets;
    std::string out;
};

struct PlotOpts {
    std::string data;
    std::string model;
    std::string report;
    std::string out;
    std::vector<std::string> scene_ids;
};

int run_generate(const GenerateOpts& o) {
    gen_dataset(parse_kind_mix(o.kind_mix), o.seed, o.out, o.noise);
    return kOk;
}

int run_label(const LabelOpts& o) {
    std::vector<Scene> scenes = load_dataset(o.data);
    for (Scene& s : scenes) {
        s = label_scene(std::move(s));
        compute_features(s);
    }
    save_dataset(o.out, scenes);
    return kOk;
}

int run_train(const TrainOpts& o) {
    TrainConfig cfg;
    cfg.variant = variant_from_name(o.variant);
    cfg.model.hidden = o.hidden;
    cfg.model.gn_width = o.width;
    cfg.epochs = o.epochs;
    cfg.batch = o.batch;
    cfg.lr = o.lr;
    cfg.seed = o.seed;
    cfg.alpha = o.alpha;
    const std::string log = o.log.empty() ? o.out + ".log.csv" : o.log;
    const TrainRun run = train(cfg, o.data, o.out, log);
    const MetricsReport& r = run.final_val;
    std::printf("trained %s for %d epochs: val dpe %.4f ate %.4f cte %.4f%s\n", o.variant.c_str(),
                o.epochs, r.dpe, r.ate, r.cte,
                r.int_acc ? (" int_acc " + fmt3(*r.int_acc)).c_str() : "");
    return kOk;
}

int run_evaluate(const EvaluateOpts& o) {
    const LoadedCheckpoint ck = load_checkpoint(o.model);
    Model model(ck.variant, ck.config);
    nn::ParamStore params = ck.params;
    std::vector<Scene> scenes = load_dataset(o.data);
    if (o.split != "all") scenes = filter_split(scenes, split_from_name(o.split));
    if (scenes.empty()) throw DataError("no scenes in split '" + o.split + "' of " + o.data);
    const MetricsReport r = evaluate(model, params, scenes);
    std::fputs(metrics_csv(r).c_str(), stdout);
    return kOk;
}

int run_ablate(const AblateOpts& o) {
    TrainConfig base;
    base.model.hidden = o.hidden;
    base.model.gn_width = o.width;
    base.epochs = o.epochs;
    base.batch = o.batch;
    base.lr = o.lr;
    const std::string csv = ablate(o.data, parse_seed_list(o.seeds), base);
    emit(o.out, csv);
    return kOk;
}

int run_inject(const InjectOpts& o) {
    const LoadedCheckpoint ck = load_checkpoint(o.model);
    if (!supports_injection(ck.variant)) {
        std::fprintf(stderr, "variant does not support injection\n");
        return kUsageError;
    }
    Model model(ck.variant, ck.config);
    nn::ParamStore params = ck.params;

    const std::vector<Scene> scenes = load_dataset(o.data);
    const auto it = std::find_if(scenes.begin(), scenes.end(),
                                 [&](const Scene& s) { return s.scene_id == o.scene; });
    if (it == scenes.end()) throw DataError("scene '" + o.scene + "' not found in " + o.data);
    const InjectionReport report = inject_edges(model, params, *it, parse_overrides(o.sets));
    emit(o.out, injection_json(report) + "\n");
    return kOk;
}

int run_plot(const PlotOpts& o) {
    if (!o.report.empty()) {
        if (!o.data.empty() || !o.model.empty()) {
            throw std::invalid_argument("--report cannot be combined with --data/--model");
        }
        write_file(o.out, metrics_svg(parse_metrics_csv(o.report)));
        return kOk;
    }
    if (o.data.empty()) throw std::invalid_argument("plot needs --data or --report");

    std::vector<Scene> scenes = load_dataset(o.data);
    if (!o.scene_ids.empty()) {
        std::vector<Scene> picked;
        for (const std::string& id : o.scene_ids) {
            const auto it = std::find_if(scenes.begin(), scenes.end(),
                                         [&](const Scene& s) { return s.scene_id == id; });
            if (it == scenes.end()) throw DataError("scene '" + id + "' not found in " + o.data);
            picked.push_back(*it);
        }
        scenes = std::move(picked);
    }

    if (o.model.empty()) {
        write_file(o.out, scenes_svg(scenes, nullptr));
        return kOk;
    }
    const LoadedCheckpoint ck = load_checkpoint(o.model);
    Model model(ck.variant, ck.config);
    nn::ParamStore params = ck.params;
    std::vector<std::vector<std::vector<AgentState>>> preds;
    preds.reserve(scenes.size());
    for (const Scene& s : scenes) preds.push_back(model.predict(params, s));
    write_file(o.out, scenes_svg(scenes, &preds));
    return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"traject: joint interaction and trajectory prediction"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cgen = app.add_subcommand("generate", "Generate a labeled synthetic dataset (JSONL)");
    cgen->add_option("--kind-mix", gen.kind_mix,
                     "Scenario counts, e.g. crossing=800,following=400,independent=400,multi=400")
        ->required();
    cgen->add_option("--out", gen.out, "Output dataset path")->required();
    cgen->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    cgen->add_option("--noise", gen.noise, "Positional noise sigma in meters")
        ->capture_default_str();

    LabelOpts lab;
    auto* clab = app.add_subcommand("label", "Label a dataset and fill derived features");
    clab->add_option("--data", lab.data, "Input dataset path")->required();
    clab->add_option("--out", lab.out, "Output dataset path")->required();

    TrainOpts tr;
    auto* ctr = app.add_subcommand("train", "Train one variant and write a checkpoint");
    ctr->add_option("--data", tr.data, "Labeled dataset path")->required();
    ctr->add_option("--out", tr.out, "Checkpoint output path")->required();
    ctr->add_option("--variant", tr.variant,
                    "baseline | untyped | untyped_no_ignoring | oracle | oracle_no_ignoring | "
                    "joint_supervised | joint_unsupervised")
        ->capture_default_str();
    ctr->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
    ctr->add_option("--batch", tr.batch, "Scenes per gradient step")->capture_default_str();
    ctr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
    ctr->add_option("--seed", tr.seed, "Init and shuffle seed")->capture_default_str();
    ctr->add_option("--alpha", tr.alpha, "Override the CE weight of the joint loss");
    ctr->add_option("--hidden", tr.hidden, "GRU hidden size")->capture_default_str();
    ctr->add_option("--width", tr.width, "GN attribute width")->capture_default_str();
    ctr->add_option("--log", tr.log, "Training log CSV path (default: <out>.log.csv)");

    EvaluateOpts ev;
    auto* cev = app.add_subcommand("evaluate", "Evaluate a checkpoint; metrics CSV on stdout");
    cev->add_option("--model", ev.model, "Checkpoint path")->required();
    cev->add_option("--data", ev.data, "Dataset path")->required();
    cev->add_option("--split", ev.split, "train | val | test | all")->capture_default_str();

    AblateOpts ab;
    auto* cab = app.add_subcommand("ablate", "Train and evaluate all variants over seeds");
    cab->add_option("--data", ab.data, "Labeled dataset path")->required();
    cab->add_option("--seeds", ab.seeds, "Comma-separated seed list")->capture_default_str();
    cab->add_option("--epochs", ab.epochs, "Epochs per run")->capture_default_str();
    cab->add_option("--batch", ab.batch, "Scenes per gradient step")->capture_default_str();
    cab->add_option("--lr", ab.lr, "Adam learning rate")->capture_default_str();
    cab->add_option("--hidden", ab.hidden, "GRU hidden size")->capture_default_str();
    cab->add_option("--width", ab.width, "GN attribute width")->capture_default_str();
    cab->add_option("--out", ab.out, "Also write the CSV here");

    InjectOpts inj;
    auto* cinj = app.add_subcommand("inject", "Override edge scores and report arrival order");
    cinj->add_option("--model", inj.model, "Checkpoint path (typed variant)")->required();
    cinj->add_option("--data", inj.data, "Dataset path")->required();
    cinj->add_option("--scene", inj.scene, "Scene id within the dataset")->required();
    cinj->add_option("--set", inj.sets, "Override 'i,j,LABEL'; repeatable")->required();
    cinj->add_option("--out", inj.out, "Write the JSON report here (default: stdout)");

    PlotOpts pl;
    auto* cpl = app.add_subcommand("plot", "Render trajectories or metrics to SVG");
    cpl->add_option("--data", pl.data, "Dataset to draw");
    cpl->add_option("--model", pl.model, "Checkpoint whose predictions to overlay");
    cpl->add_option("--scene", pl.scene_ids, "Only these scene ids; repeatable");
    cpl->add_option("--report", pl.report, "Metrics CSV to draw as horizon bar chart");
    cpl->add_option("--out", pl.out, "SVG output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsageError;
    }

    try {
        if (cgen->parsed()) return run_generate(gen);
        if (clab->parsed()) return run_label(lab);
        if (ctr->parsed()) return run_train(tr);
        if (cev->parsed()) return run_evaluate(ev);
        if (cab->parsed()) return run_ablate(ab);
        if (cinj->parsed()) return run_inject(inj);
        if (cpl->parsed()) return run_plot(pl);
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kNumericError;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsageError;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace traject::cli
