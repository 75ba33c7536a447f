// rovwl: validate BGP routes against ROAs, classify invalid routes into
// benign conflicts vs hijacks, and maintain/serve a whitelist of benign
// conflicts.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "rovwl/classifier.hpp"
#include "rovwl/pipeline.hpp"
#include "rovwl/server.hpp"

using namespace rovwl;

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

int cmd_train(const std::string& features_path, const std::string& family_name,
              const std::string& out_path, uint64_t seed, size_t oversample_to,
              double split_ratio, int cv_folds, bool grid) {
    auto csv = parse_feature_csv(pipeline::read_file(features_path));
    for (const auto& d : csv.diagnostics) {
        std::fprintf(stderr, "warning: %s:%zu: %s\n", features_path.c_str(), d.line,
                     d.reason.c_str());
    }
    std::vector<ml::LabeledSample> samples;
    for (const auto& row : csv.rows) {
        if (!row.hijack_label) {
            std::fprintf(stderr, "error: unlabeled row for %s\n",
                         row.key.str().c_str());
            return 2;
        }
        samples.push_back({row.features, *row.hijack_label
                                             ? ml::Label::Hijack
                                             : ml::Label::BenignConflict});
    }
    if (samples.empty()) {
        std::fprintf(stderr, "error: no labeled samples in %s\n",
                     features_path.c_str());
        return 2;
    }

    ml::ModelFamily family;
    if (family_name == "dt") family = ml::ModelFamily::Dt;
    else if (family_name == "rf") family = ml::ModelFamily::Rf;
    else if (family_name == "knn") family = ml::ModelFamily::Knn;
    else if (family_name == "nb") family = ml::ModelFamily::Nb;
    else {
        std::fprintf(stderr, "error: unknown family %s\n", family_name.c_str());
        return 2;
    }

    size_t class_counts[2] = {0, 0};
    for (const auto& s : samples) ++class_counts[size_t(s.label)];
    size_t target = oversample_to ? oversample_to
                                  : std::max(class_counts[0], class_counts[1]);
    samples = ml::oversample(samples, target, seed);
    auto [train_set, test_set] = ml::stratified_split(samples, split_ratio, seed);

    ml::ModelSpec spec;
    ml::Metrics cv_metrics;
    if (grid) {
        auto result = ml::grid_search(family, train_set, seed, cv_folds);
        spec = result.spec;
        cv_metrics = result.metrics;
    } else {
        spec = ml::grid_points(family, seed).front();
        if (family == ml::ModelFamily::Dt) spec.params = ml::DtParams{};
        if (family == ml::ModelFamily::Rf) spec.params = ml::RfParams{};
        if (family == ml::ModelFamily::Knn) spec.params = ml::KnnParams{};
        cv_metrics = ml::cross_validate(spec, train_set, cv_folds, seed);
    }

    ml::TrainedModel model = ml::train(spec, train_set);
    ml::Metrics holdout = ml::evaluate_holdout(model, test_set);

    std::array<double, kFeatureCount> weights{};
    const std::array<double, kFeatureCount>* weights_ptr = nullptr;
    if (family == ml::ModelFamily::Rf) {
        weights = ml::feature_importance(model);
        weights_ptr = &weights;
    }
    pipeline::write_file(out_path, ml::save_model_json(model, weights_ptr));

    std::printf("trained %s on %zu samples (%zu train / %zu test)\n",
                ml::to_string(family), samples.size(), train_set.size(),
                test_set.size());
    std::printf("cv: macro_precision=%.4f macro_recall=%.4f macro_f1=%.4f\n",
                cv_metrics.macro_precision, cv_metrics.macro_recall,
                cv_metrics.macro_f1);
    std::printf("holdout: benign_accuracy=%.4f hijack_accuracy=%.4f\n",
                holdout.class_accuracy[0], holdout.class_accuracy[1]);
    if (weights_ptr) {
        std::printf("tightness weights:");
        for (size_t f = 0; f < kFeatureCount; ++f)
            std::printf(" %s=%.4f", kFeatureNames[f], weights[f]);
        std::printf("\n");
    }
    std::printf("model written to %s\n", out_path.c_str());
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& dir,
               const std::string& from_str, const std::string& to_str) {
    auto from = CalDate::parse(from_str);
    auto to = CalDate::parse(to_str);
    if (!from || !to) {
        std::fprintf(stderr, "error: dates must be YYYY-MM-DD\n");
        return 2;
    }
    pipeline::Pipeline pipe(pipeline::PipelineConfig::load(config_path));
    auto reports = pipe.replay(dir, *from, *to);
    for (const auto& r : reports) {
        std::printf("%s: %llu routes, %llu invalid (%llu benign / %llu hijack), "
                    "%zu whitelist adds, %zu purges\n",
                    r.date.str().c_str(), (unsigned long long)r.unique_routes,
                    (unsigned long long)r.invalid, (unsigned long long)r.benign,
                    (unsigned long long)r.hijack, r.whitelist_adds.size(),
                    r.whitelist_purges.size());
    }
    return 0;
}

int cmd_serve(const std::string& config_path, const std::string& host_override,
              int port_override) {
    auto cfg = pipeline::PipelineConfig::load(config_path);
    pipeline::Pipeline pipe(cfg);
    http::WhitelistServer server;
    server.publish(http::PublishedWhitelist::from_store(pipe.store()));

    std::string host = host_override.empty() ? cfg.http_host : host_override;
    int port = port_override ? port_override : cfg.http_port;
    int bound = server.start(host, port);
    if (bound < 0) {
        std::fprintf(stderr, "error: cannot bind %s:%d\n", host.c_str(), port);
        return 2;
    }
    std::printf("serving whitelist on http://%s:%d (generation %s)\n", host.c_str(),
                bound, server.snapshot()->generation_str().c_str());
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
}

int cmd_review(const std::string& config_path, bool list, const std::string& allow,
               const std::string& deny, const std::string& prefix_str,
               const std::string& note) {
    pipeline::Pipeline pipe(pipeline::PipelineConfig::load(config_path));
    wl::Store& store = pipe.mutable_store();

    auto apply = [&](const std::string& asn_str, wl::ManualVerdict verdict) -> int {
        auto origin = parse_asn(asn_str);
        auto prefix = Prefix::parse(prefix_str);
        if (!origin || !prefix) {
            std::fprintf(stderr, "error: --origin/--prefix malformed\n");
            return 2;
        }
        CalDate today = store.last_run ? *store.last_run
                                       : CalDate::from_ts(int64_t(time(nullptr)));
        store.manual_decision({*origin, *prefix}, verdict, note, today);
        pipe.save_store();
        std::printf("%s %s %s\n",
                    verdict == wl::ManualVerdict::Allow ? "allowed" : "denied",
                    asn_str.c_str(), prefix_str.c_str());
        return 0;
    };

    if (!allow.empty()) return apply(allow, wl::ManualVerdict::Allow);
    if (!deny.empty()) return apply(deny, wl::ManualVerdict::Deny);

    // default action: list pending entries
    (void)list;
    size_t pending = 0;
    for (const auto& [key, entry] : store.quarantine()) {
        if (entry.state != wl::QuarantineState::Pending) continue;
        ++pending;
        std::printf("%s entered=%s reason=%s sightings=%zu\n", key.str().c_str(),
                    entry.entered.str().c_str(), wl::to_string(entry.reason),
                    entry.sightings.size());
    }
    std::printf("%zu pending entries\n", pending);
    return 0;
}

int cmd_report(const std::string& config_path, const std::string& out_path) {
    pipeline::Pipeline pipe(pipeline::PipelineConfig::load(config_path));
    std::string csv = pipeline::occurrence_report_csv(pipe.store());
    if (out_path.empty()) {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
    } else {
        pipeline::write_file(out_path, csv);
        std::printf("report written to %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ROV benign-conflict whitelist pipeline"};
    app.require_subcommand(1);

    // train
    std::string features_path, family = "rf", model_out;
    uint64_t seed = 42;
    size_t oversample_to = 0;
    double split_ratio = 0.8;
    int cv_folds = 10;
    bool no_grid = false;
    auto* train = app.add_subcommand("train", "train a classifier from a labeled feature CSV");
    train->add_option("--features", features_path, "labeled feature matrix CSV")->required();
    train->add_option("--family", family, "dt|rf|knn|nb")->default_val("rf");
    train->add_option("--out", model_out, "output model file")->required();
    train->add_option("--seed", seed, "RNG seed");
    train->add_option("--oversample-to", oversample_to,
                      "minority-class target (default: majority count)");
    train->add_option("--split-ratio", split_ratio, "train share");
    train->add_option("--cv-folds", cv_folds, "cross-validation folds");
    train->add_flag("--no-grid", no_grid, "skip the hyperparameter grid search");

    // replay
    std::string config_path, ann_dir, from_str, to_str;
    auto* replay = app.add_subcommand("replay", "run the daily pipeline over a date range");
    replay->add_option("--config", config_path, "pipeline config file")->required();
    replay->add_option("--announcements", ann_dir, "directory of YYYY-MM-DD.jsonl files")->required();
    replay->add_option("--from", from_str, "first date (YYYY-MM-DD)")->required();
    replay->add_option("--to", to_str, "last date (YYYY-MM-DD)")->required();

    // serve
    std::string serve_config, serve_host;
    int serve_port = 0;
    auto* serve = app.add_subcommand("serve", "serve the whitelist over HTTP");
    serve->add_option("--config", serve_config, "pipeline config file")->required();
    serve->add_option("--host", serve_host, "bind host (overrides config)");
    serve->add_option("--port", serve_port, "bind port (overrides config)");

    // review
    std::string review_config, allow_asn, deny_asn, review_prefix, note;
    bool list = false;
    auto* review = app.add_subcommand("review", "list pending entries, allow or deny routes");
    review->add_option("--config", review_config, "pipeline config file")->required();
    review->add_flag("--list", list, "list pending quarantine entries");
    review->add_option("--allow", allow_asn, "origin ASN to allow (with --prefix)");
    review->add_option("--deny", deny_asn, "origin ASN to deny (with --prefix)");
    review->add_option("--prefix", review_prefix, "prefix for --allow/--deny");
    review->add_option("--note", note, "reviewer note");

    // report
    std::string report_config, report_out;
    auto* report = app.add_subcommand("report", "emit occurrence/frequency statistics as CSV");
    report->add_option("--config", report_config, "pipeline config file")->required();
    report->add_option("--out", report_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(features_path, family, model_out, seed, oversample_to,
                             split_ratio, cv_folds, !no_grid);
        if (replay->parsed()) return cmd_replay(config_path, ann_dir, from_str, to_str);
        if (serve->parsed()) return cmd_serve(serve_config, serve_host, serve_port);
        if (review->parsed())
            return cmd_review(review_config, list, allow_asn, deny_asn, review_prefix, note);
        if (report->parsed()) return cmd_report(report_config, report_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
