#include <densemark/pipeline.hpp>

#include <densemark/error.hpp>
#include <densemark/parallel.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace densemark {

namespace fs = std::filesystem;
using nlohmann::json;

std::string make_run_label(const std::string& baseline, int density, PlugMode mode) {
    std::string label = baseline + "-FE" + std::to_string(density);
    switch (mode) {
    case PlugMode::Train: break;  // default stage is omitted
    case PlugMode::Test: label += "_test"; break;
    case PlugMode::TrainAndTest: label += "_train+test"; break;
    }
    return label;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        std::string name = p.filename().string();
        if (name.size() >= extension.size() &&
            name.compare(name.size() - extension.size(), extension.size(), extension) == 0)
            out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const EnrichedPoint* find_anchor(const EnrichedLandmarkSet& set, int anchor_index) {
    for (const auto& q : set.points)
        if (q.kind == PointKind::Anchor && q.i == anchor_index && q.j == 0) return &q;
    return nullptr;
}

FaceImage draw_overlay(const FaceImage& image, std::span<const EnrichedPoint> points) {
    FaceImage out = image;
    auto plot = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= out.width || y >= out.height) return;
        out.at(x, y) = out.at(x, y) < 0.5f ? 1.0f : 0.0f;
    };
    for (const auto& q : points) {
        int x = static_cast<int>(std::lround(q.p.x));
        int y = static_cast<int>(std::lround(q.p.y));
        plot(x, y);
        plot(x - 1, y);
        plot(x + 1, y);
        plot(x, y - 1);
        plot(x, y + 1);
    }
    return out;
}

namespace {

int run_guarded(const char* name, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << name << ": error: " << e.what() << "\n";
        return e.code() == ErrorCode::Usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << name << ": error: " << e.what() << "\n";
        return 1;
    }
}

std::string scene_stem(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", index);
    return buf;
}

// Data-dir manifest: carries the aligned-face reference size for corpora
// whose image format cannot (PGM/PNG).
double read_reference_face_size(const fs::path& dir, double fallback) {
    fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) return fallback;
    std::ifstream is(manifest);
    json j;
    try {
        is >> j;
        return j.value("reference_face_size", fallback);
    } catch (const json::exception&) {
        return fallback;
    }
}

std::vector<TrainItem> load_corpus(const fs::path& dir, const ContourScheme& scheme) {
    std::vector<TrainItem> corpus;
    double ref = read_reference_face_size(dir, 1024.0);
    for (const auto& pts_path : list_files(dir, ".pts")) {
        fs::path img_path = pts_path;
        img_path.replace_extension(".pgm");
        if (!fs::exists(img_path)) {
            img_path.replace_extension(".png");
            if (!fs::exists(img_path)) continue;
        }
        TrainItem item;
        item.image = load_image(img_path);
        item.image.reference_face_size = ref;
        PtsAnnotation ann = load_pts(pts_path);
        if (static_cast<int>(ann.points.size()) != scheme.total_points())
            throw validation_error(pts_path.string() + ": " + std::to_string(ann.points.size()) +
                                   " points, scheme expects " + std::to_string(scheme.total_points()));
        item.anchors.scheme_id = scheme.scheme_id;
        item.anchors.points = std::move(ann.points);
        corpus.push_back(std::move(item));
    }
    if (corpus.empty()) throw usage_error("no (image, .pts) pairs under " + dir.string());
    return corpus;
}

json report_to_json(const EvalReport& r) {
    json j;
    j["normalization_distance"] = r.normalization_distance;
    j["samples"] = r.sample_count;
    auto row = [](const EvalRow& e) {
        json je;
        je["name"] = e.name;
        je["count"] = e.count;
        je["me"] = e.me;
        je["nme_point"] = e.nme_point;
        if (e.nme_edge >= 0.0) je["nme_edge"] = e.nme_edge;
        return je;
    };
    j["components"] = json::array();
    for (const auto& e : r.per_component) j["components"].push_back(row(e));
    j["overall"] = row(r.overall);
    if (r.measures_mape >= 0.0) {
        j["measures_mape_percent"] = r.measures_mape;
        json jm = json::array();
        for (size_t i = 0; i < r.measures_predicted.size(); ++i) {
            json e;
            e["name"] = r.measures_predicted[i].name;
            e["predicted"] = r.measures_predicted[i].value;
            e["reference"] = r.measures_reference[i].value;
            if (r.measures_predicted[i].warning || r.measures_reference[i].warning)
                e["warning"] = true;
            jm.push_back(std::move(e));
        }
        j["measures"] = std::move(jm);
    }
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& opt) {
    return run_guarded("synth", [&]() {
        if (opt.count < 1) throw usage_error("--count must be >= 1");
        ContourScheme scheme = load_scheme(resolve_scheme_path(opt.scheme));
        fs::create_directories(opt.out_dir);

        for (int i = 0; i < opt.count; ++i) {
            uint64_t scene_seed = Rng::derive(opt.seed, 0xDA7A, static_cast<uint64_t>(i));
            SyntheticScene scene = generate_scene(scene_seed, opt.scene, scheme);
            std::string stem = scene_stem(i);
            save_pgm(opt.out_dir / (stem + ".pgm"), scene.image);
            PtsAnnotation ann;
            ann.points = scene.anchors.points;
            save_pts(opt.out_dir / (stem + ".pts"), ann);
            write_scene_oracle(opt.out_dir / (stem + ".oracle.json"), scene.geometry);
        }

        json manifest;
        manifest["scheme"] = scheme.scheme_id;
        manifest["seed"] = opt.seed;
        manifest["count"] = opt.count;
        manifest["canvas"] = opt.scene.canvas;
        manifest["reference_face_size"] = opt.scene.reference_face_size;
        std::ofstream os(opt.out_dir / "manifest.json", std::ios::binary);
        os << manifest.dump(2) << "\n";

        std::cerr << "synth: wrote " << opt.count << " scenes to " << opt.out_dir.string() << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const TrainOptions& opt) {
    return run_guarded("train", [&]() {
        if (opt.out_model.empty()) throw usage_error("--out model path is required");
        ContourScheme scheme = load_scheme(resolve_scheme_path(opt.scheme));
        std::vector<TrainItem> corpus = load_corpus(opt.data_dir, scheme);

        PatchSpec ps;
        ps.size = opt.patch_size;
        ps.patch_face_ratio = static_cast<double>(opt.patch_size) /
                              corpus.front().image.reference_face_size;
        ps.validate();

        TrainingStats stats;
        OffsetRegressor model = train_offset_regressor(corpus, scheme, ps, opt.training, &stats);
        if (!opt.quiet) {
            for (size_t e = 0; e < stats.epoch_loss.size(); ++e)
                std::cerr << "train: epoch " << e << " loss " << stats.epoch_loss[e] << "\n";
        }
        if (auto parent = opt.out_model.parent_path(); !parent.empty())
            fs::create_directories(parent);
        model.save(opt.out_model);
        std::cerr << "train: model written to " << opt.out_model.string() << "\n";

        std::cout << "final_loss=" << stats.epoch_loss.back();
        if (stats.holdout_offset_me >= 0.0)
            std::cout << " holdout_offset_me=" << stats.holdout_offset_me;
        std::cout << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// preprocess (plug in train) / enrich (plug in test)
// ---------------------------------------------------------------------------

namespace {

EnrichedLandmarkSet enrich_one(const OffsetRegressor& model, const ContourScheme& scheme,
                               const FaceImage& image, const LandmarkSet& anchors, int density,
                               std::optional<FitKind> fit_override, int threads) {
    EnrichedLandmarkSet init = initialize_enriched(anchors, scheme, density, fit_override);
    return model.refine(init, image, threads);
}

} // namespace

int cmd_preprocess(const PreprocessOptions& opt) {
    return run_guarded("preprocess", [&]() {
        if (opt.density < 1) throw usage_error("--density must be >= 1");
        if (!fs::exists(opt.model_path)) throw usage_error("model not found: " + opt.model_path.string());
        ContourScheme scheme = load_scheme(resolve_scheme_path(opt.scheme));
        OffsetRegressor model = OffsetRegressor::load(opt.model_path);
        if (model.scheme_id() != scheme.scheme_id)
            throw config_error("model was trained for scheme '" + model.scheme_id() +
                               "', not '" + scheme.scheme_id + "'");
        std::vector<TrainItem> corpus = load_corpus(opt.data_dir, scheme);
        for (const auto& item : corpus)
            model.patch_spec().validate_against(item.image.reference_face_size);
        fs::create_directories(opt.out_dir);

        std::vector<fs::path> pts_files = list_files(opt.data_dir, ".pts");
        for (size_t i = 0; i < corpus.size(); ++i) {
            EnrichedLandmarkSet refined = enrich_one(model, scheme, corpus[i].image,
                                                     corpus[i].anchors, opt.density,
                                                     opt.fit_override, opt.threads);
            fs::path out = opt.out_dir / (pts_files[i].stem().string() + ".enriched.json");
            write_enriched(out, refined);
        }

        json run;
        run["run"] = make_run_label(opt.baseline_name, opt.density, PlugMode::Train);
        run["scheme"] = scheme.scheme_id;
        run["density"] = opt.density;
        run["count"] = corpus.size();
        std::ofstream os(opt.out_dir / "run.json", std::ios::binary);
        os << run.dump(2) << "\n";

        std::cerr << "preprocess: densified " << corpus.size() << " annotations ("
                  << run["run"].get<std::string>() << ")\n";
        return 0;
    });
}

int cmd_enrich(const EnrichOptions& opt) {
    return run_guarded("enrich", [&]() {
        if (opt.density < 1) throw usage_error("--density must be >= 1");
        if (!fs::exists(opt.model_path)) throw usage_error("model not found: " + opt.model_path.string());
        if (!fs::exists(opt.image_path)) throw usage_error("image not found: " + opt.image_path.string());
        if (!fs::exists(opt.pts_path)) throw usage_error("predictions not found: " + opt.pts_path.string());
        ContourScheme scheme = load_scheme(resolve_scheme_path(opt.scheme));
        OffsetRegressor model = OffsetRegressor::load(opt.model_path);
        if (model.scheme_id() != scheme.scheme_id)
            throw config_error("model was trained for scheme '" + model.scheme_id() +
                               "', not '" + scheme.scheme_id + "'");

        FaceImage image = load_image(opt.image_path);
        double ref = read_reference_face_size(opt.image_path.parent_path(), 1024.0);
        image.reference_face_size = ref;
        model.patch_spec().validate_against(image.reference_face_size);

        PtsAnnotation ann = load_pts(opt.pts_path);
        if (static_cast<int>(ann.points.size()) != scheme.total_points())
            throw validation_error(opt.pts_path.string() + ": point count does not match scheme");
        LandmarkSet pred{scheme.scheme_id, std::move(ann.points)};

        EnrichedLandmarkSet refined =
            enrich_one(model, scheme, image, pred, opt.density, opt.fit_override, 0);
        write_enriched(opt.out_json, refined);
        if (!opt.overlay_path.empty())
            save_image(opt.overlay_path, draw_overlay(image, refined.points));

        std::cerr << "enrich: " << make_run_label(opt.baseline_name, opt.density, PlugMode::Test)
                  << " wrote " << refined.points.size() << " landmarks\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

namespace {

struct PairedFiles {
    fs::path pred;
    fs::path truth;
};

std::vector<PairedFiles> pair_by_stem(const fs::path& pred, const fs::path& truth,
                                      const std::string& truth_ext) {
    auto strip = [](std::string name, const std::string& suffix) {
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            name.resize(name.size() - suffix.size());
        return name;
    };
    std::vector<PairedFiles> pairs;
    if (fs::is_regular_file(pred)) {
        pairs.push_back({pred, truth});
        return pairs;
    }
    std::map<std::string, fs::path> truth_by_stem;
    for (const auto& t : list_files(truth, truth_ext))
        truth_by_stem[strip(t.filename().string(), truth_ext)] = t;
    for (const auto& p : list_files(pred, ".enriched.json")) {
        std::string stem = strip(p.filename().string(), ".enriched.json");
        auto it = truth_by_stem.find(stem);
        if (it == truth_by_stem.end())
            throw usage_error("no ground truth for " + p.filename().string());
        pairs.push_back({p, it->second});
    }
    if (pairs.empty()) throw usage_error("no predictions found under " + pred.string());
    return pairs;
}

struct MetricAccumulator {
    double sum_pp = 0.0;    // point-to-point distances
    double sum_edge = 0.0;  // point-to-curve (or point fallback)
    long count = 0;
};

} // namespace

int cmd_eval(const EvalOptions& opt, EvalReport* report_out) {
    return run_guarded("eval", [&]() {
        ContourScheme scheme = load_scheme(resolve_scheme_path(opt.scheme));

        bool oracle_mode;
        if (fs::is_regular_file(opt.truth)) {
            oracle_mode = opt.truth.string().ends_with(".oracle.json");
        } else {
            oracle_mode = !list_files(opt.truth, ".oracle.json").empty();
        }
        auto pairs = pair_by_stem(opt.pred, opt.truth,
                                  oracle_mode ? ".oracle.json" : ".enriched.json");

        std::vector<MetricAccumulator> comp_acc(scheme.components.size());
        MetricAccumulator all_acc;
        double d_sum = 0.0;

        // Morphometrics accumulate mean measure values across samples.
        std::vector<MeasureDef> defs;
        if (!opt.measures.empty()) defs = load_measures(opt.measures);
        std::vector<double> meas_pred(defs.size(), 0.0), meas_truth(defs.size(), 0.0);
        std::vector<MeasureValue> meas_pred_last, meas_truth_last;

        for (const auto& pair : pairs) {
            EnrichedLandmarkSet pred = read_enriched(pair.pred);
            validate_enriched(pred, scheme);
            std::vector<Vec2> pred_pts = pred.coordinates();

            std::vector<Vec2> truth_pts;
            std::vector<EdgeCurve> curves;
            std::vector<int> curve_idx;
            double d;
            if (oracle_mode) {
                SceneGeometry geo = read_scene_oracle(pair.truth);
                if (geo.scheme_id != scheme.scheme_id)
                    throw validation_error(pair.truth.string() + ": oracle scheme mismatch");
                truth_pts = geo.oracle_points(scheme, pred.density);
                curves = geo.oracle_curves(scheme);
                curve_idx = geo.curve_of_point(scheme, pred.density);
                d = opt.unit_distance > 0.0
                        ? opt.unit_distance
                        : interocular_distance(geo.anchors(scheme).points, scheme);
            } else {
                EnrichedLandmarkSet truth = read_enriched(pair.truth);
                validate_enriched(truth, scheme);
                if (truth.density != pred.density)
                    throw validation_error(pair.truth.string() + ": density mismatch with prediction");
                truth_pts = truth.coordinates();
                curve_idx.assign(truth_pts.size(), -1);  // point metric only
                if (opt.unit_distance > 0.0) {
                    d = opt.unit_distance;
                } else {
                    const EnrichedPoint* r = find_anchor(truth, scheme.outer_eye_right);
                    const EnrichedPoint* l = find_anchor(truth, scheme.outer_eye_left);
                    if (!r || !l) throw annotation_error("cannot locate outer eye corners in truth");
                    d = distance(r->p, l->p);
                    if (d <= 1e-12) throw annotation_error("coincident outer eye corners");
                }
            }
            if (truth_pts.size() != pred_pts.size())
                throw validation_error(pair.pred.string() + ": prediction/truth size mismatch");
            d_sum += d;

            for (size_t i = 0; i < pred_pts.size(); ++i) {
                double pp = distance(pred_pts[i], truth_pts[i]);
                double pe = curve_idx[i] >= 0 ? point_to_polyline(pred_pts[i], curves[curve_idx[i]])
                                              : pp;
                int comp = pred.points[i].component;
                if (comp < 0 || comp >= static_cast<int>(comp_acc.size()))
                    throw validation_error(pair.pred.string() + ": bad component index");
                comp_acc[comp].sum_pp += pp;
                comp_acc[comp].sum_edge += pe;
                comp_acc[comp].count += 1;
                all_acc.sum_pp += pp;
                all_acc.sum_edge += pe;
                all_acc.count += 1;
            }

            if (!defs.empty()) {
                double unit = 1.0;
                if (scheme.inner_eye_right >= 0 && scheme.inner_eye_left >= 0) {
                    const EnrichedPoint* r = find_anchor(pred, scheme.inner_eye_right);
                    const EnrichedPoint* l = find_anchor(pred, scheme.inner_eye_left);
                    if (r && l) unit = distance(r->p, l->p);
                }
                meas_pred_last = morphometrics(pred_pts, defs, unit);
                meas_truth_last = morphometrics(truth_pts, defs, unit);
                for (size_t m = 0; m < defs.size(); ++m) {
                    meas_pred[m] += meas_pred_last[m].value;
                    meas_truth[m] += meas_truth_last[m].value;
                }
            }
        }

        EvalReport report;
        report.sample_count = static_cast<int>(pairs.size());
        report.normalization_distance = d_sum / pairs.size();
        double d_mean = report.normalization_distance;
        bool edge_available = oracle_mode;
        for (size_t k = 0; k < comp_acc.size(); ++k) {
            if (comp_acc[k].count == 0) continue;
            EvalRow row;
            row.name = scheme.components[k].name;
            row.count = static_cast<int>(comp_acc[k].count);
            row.me = comp_acc[k].sum_pp / comp_acc[k].count;
            row.nme_point = row.me / d_mean;
            row.nme_edge = edge_available ? comp_acc[k].sum_edge / (comp_acc[k].count * d_mean) : -1.0;
            report.per_component.push_back(row);
        }
        report.overall.name = "whole";
        report.overall.count = static_cast<int>(all_acc.count);
        report.overall.me = all_acc.sum_pp / all_acc.count;
        report.overall.nme_point = report.overall.me / d_mean;
        report.overall.nme_edge =
            edge_available ? all_acc.sum_edge / (all_acc.count * d_mean) : -1.0;

        if (!defs.empty()) {
            for (size_t m = 0; m < defs.size(); ++m) {
                meas_pred[m] /= pairs.size();
                meas_truth[m] /= pairs.size();
                meas_pred_last[m].value = meas_pred[m];
                meas_truth_last[m].value = meas_truth[m];
            }
            report.measures_predicted = meas_pred_last;
            report.measures_reference = meas_truth_last;
            report.measures_mape = mape(meas_pred, meas_truth);
        }

        if (!opt.quiet) std::cout << report.to_table();
        if (!opt.json_out.empty()) {
            std::ofstream os(opt.json_out, std::ios::binary);
            if (!os) throw parse_error("cannot open " + opt.json_out.string() + " for writing");
            os << report_to_json(report).dump(2) << "\n";
        }
        if (report_out) *report_out = report;
        return 0;
    });
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const ScoreOptions& opt) {
    return run_guarded("score", [&]() {
        std::vector<fs::path> files = list_files(opt.patches_dir, ".pgm");
        auto pngs = list_files(opt.patches_dir, ".png");
        files.insert(files.end(), pngs.begin(), pngs.end());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw usage_error("no patches under " + opt.patches_dir.string());

        std::vector<Patch> patches;
        std::vector<double> raw(files.size());
        for (size_t i = 0; i < files.size(); ++i) {
            FaceImage img = load_image(files[i]);
            if (img.width != img.height)
                throw validation_error(files[i].string() + ": patches must be square");
            Patch p;
            p.size = img.width;
            p.pixels.assign(img.pixels.begin(), img.pixels.end());
            raw[i] = patch_raw_score(p);
            patches.push_back(std::move(p));
        }

        QualityModel model = [&]() {
            if (opt.fit_on_dump) return QualityModel::fit(raw);
            if (opt.model_path.empty())
                throw usage_error("either --model or --fit-corpus is required");
            return OffsetRegressor::load(opt.model_path).quality();
        }();

        json items = json::array();
        std::cout << "patch                                   V          S       Sbar\n";
        for (size_t i = 0; i < files.size(); ++i) {
            double v = variance_ratio(patches[i]);
            double sbar = model.normalize(raw[i]);
            std::cout << std::left << std::setw(30) << files[i].filename().string() << std::right
                      << std::fixed << std::setprecision(4) << std::setw(11) << v << std::setw(11)
                      << raw[i] << std::setw(11) << sbar << "\n";
            json e;
            e["patch"] = files[i].filename().string();
            e["variance_ratio"] = v;
            e["raw_score"] = raw[i];
            e["normalized_score"] = sbar;
            items.push_back(std::move(e));
        }
        if (!opt.json_out.empty()) {
            std::ofstream os(opt.json_out, std::ios::binary);
            os << items.dump(2) << "\n";
        }
        return 0;
    });
}

} // namespace densemark
