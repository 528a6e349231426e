// densemark CLI: synth / train / preprocess / enrich / eval / score.
// Every subcommand is a thin flag-parsing layer over densemark::cmd_*; see
// docs/cli.md for the full surface and the config-file grammar.

#include <densemark/pipeline.hpp>

#include <CLI11.hpp>

#include <optional>
#include <string>

using namespace densemark;

int main(int argc, char** argv) {
    CLI::App app{"dense landmark enrichment toolkit"};
    app.set_config("--config", "", "key=value config file ([subcommand] sections); flags win");
    app.require_subcommand(1);

    // --- synth ---------------------------------------------------------
    SynthOptions synth;
    CLI::App* s_synth = app.add_subcommand("synth", "generate a synthetic scene dataset");
    s_synth->add_option("--out", synth.out_dir, "output directory")->required();
    s_synth->add_option("--scheme", synth.scheme, "scheme name or path (default synth-16)");
    s_synth->add_option("--seed", synth.seed, "dataset seed");
    s_synth->add_option("--count", synth.count, "number of scenes");
    s_synth->add_option("--canvas", synth.scene.canvas, "canvas side, px");
    s_synth->add_option("--ref-face", synth.scene.reference_face_size, "aligned face reference size");
    s_synth->add_option("--noise-max", synth.scene.noise_hi, "max pixel noise sigma");

    // --- train ---------------------------------------------------------
    TrainOptions train;
    CLI::App* s_train = app.add_subcommand("train", "train the offset-refinement model");
    s_train->add_option("--data", train.data_dir, "corpus directory (images + .pts)")->required();
    s_train->add_option("--scheme", train.scheme, "scheme name or path");
    s_train->add_option("--out", train.out_model, "output model artifact")->required();
    s_train->add_option("--patch-size", train.patch_size, "patch side, px");
    s_train->add_option("--epochs", train.training.epochs, "training epochs");
    s_train->add_option("--batch", train.training.batch_size, "batch size");
    s_train->add_option("--lr", train.training.learning_rate, "initial learning rate");
    s_train->add_option("--seed", train.training.seed, "training seed");
    s_train->add_option("--threads", train.training.threads, "worker threads (0 = auto)");
    s_train->add_option("--holdout", train.training.holdout_fraction, "held-out item fraction");
    s_train->add_option("--k", train.training.net_k, "embedding block count");
    s_train->add_option("--tau", train.training.tau, "soft-argmax temperature");
    s_train->add_flag("--quiet", train.quiet, "suppress per-epoch progress");

    // --- preprocess (plug in train) -------------------------------------
    PreprocessOptions pre;
    std::string pre_fit, enr_fit;
    CLI::App* s_pre = app.add_subcommand("preprocess",
                                         "densify ground-truth annotations offline (plug in train)");
    s_pre->add_option("--data", pre.data_dir, "dataset directory (images + .pts)")->required();
    s_pre->add_option("--model", pre.model_path, "trained model artifact")->required();
    s_pre->add_option("--out", pre.out_dir, "output directory")->required();
    s_pre->add_option("--scheme", pre.scheme, "scheme name or path")->required();
    s_pre->add_option("--density", pre.density, "enriching density D");
    s_pre->add_option("--fit", pre_fit, "fit override: line | bspline");
    s_pre->add_option("--baseline", pre.baseline_name, "baseline network name for the run label");
    s_pre->add_option("--threads", pre.threads, "worker threads (0 = auto)");

    // --- enrich (plug in test) ------------------------------------------
    EnrichOptions enr;
    CLI::App* s_enr = app.add_subcommand("enrich",
                                         "densify predicted landmarks for one image (plug in test)");
    s_enr->add_option("--image", enr.image_path, "face image (.pgm/.png)")->required();
    s_enr->add_option("--pts", enr.pts_path, "predicted sparse landmarks (.pts)")->required();
    s_enr->add_option("--model", enr.model_path, "trained model artifact")->required();
    s_enr->add_option("--out", enr.out_json, "output enriched JSON")->required();
    s_enr->add_option("--overlay", enr.overlay_path, "overlay image path (optional)");
    s_enr->add_option("--scheme", enr.scheme, "scheme name or path")->required();
    s_enr->add_option("--density", enr.density, "enriching density D");
    s_enr->add_option("--fit", enr_fit, "fit override: line | bspline");
    s_enr->add_option("--baseline", enr.baseline_name, "baseline network name for the run label");

    // --- eval ------------------------------------------------------------
    EvalOptions eval;
    CLI::App* s_eval = app.add_subcommand("eval", "evaluate enriched landmarks");
    s_eval->add_option("--pred", eval.pred, "enriched JSON file or directory")->required();
    s_eval->add_option("--truth", eval.truth, "scene oracles or enriched truth")->required();
    s_eval->add_option("--scheme", eval.scheme, "scheme name or path")->required();
    s_eval->add_option("--json", eval.json_out, "machine-readable report path");
    s_eval->add_option("--measures", eval.measures, "morphometric measure definitions (JSON)");
    s_eval->add_option("--unit-distance", eval.unit_distance, "override normalization distance d");
    s_eval->add_flag("--quiet", eval.quiet, "suppress the report table on stdout");

    // --- score -------------------------------------------------------------
    ScoreOptions score;
    CLI::App* s_score = app.add_subcommand("score", "quality-score a patch dump");
    s_score->add_option("--patches", score.patches_dir, "directory of square patch images")->required();
    s_score->add_option("--model", score.model_path, "model artifact providing the CDF");
    s_score->add_flag("--fit-corpus", score.fit_on_dump, "fit the CDF on the dump itself");
    s_score->add_option("--json", score.json_out, "machine-readable output path");

    CLI11_PARSE(app, argc, argv);

    auto parse_fit = [](const std::string& v) -> std::optional<FitKind> {
        if (v.empty()) return std::nullopt;
        if (v == "line") return FitKind::Line;
        if (v == "bspline") return FitKind::BSpline;
        throw CLI::ValidationError("--fit", "expected 'line' or 'bspline'");
    };

    if (s_synth->parsed()) return cmd_synth(synth);
    if (s_train->parsed()) return cmd_train(train);
    if (s_pre->parsed()) {
        pre.fit_override = parse_fit(pre_fit);
        return cmd_preprocess(pre);
    }
    if (s_enr->parsed()) {
        enr.fit_override = parse_fit(enr_fit);
        return cmd_enrich(enr);
    }
    if (s_eval->parsed()) return cmd_eval(eval);
    if (s_score->parsed()) return cmd_score(score);
    return 2;
}
