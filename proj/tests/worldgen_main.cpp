// Test fixture generator: materializes a replayable world, a labeled feature
// CSV and a pipeline config under the given directory. Used by the CLI test.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "rovwl/features.hpp"
#include "rovwl/pipeline.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace rovwl;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <dir> [days] [announcements-per-day]\n",
                     argv[0]);
        return 2;
    }
    std::string dir = argv[1];
    synthetic::WorldSpec spec;
    spec.start = *CalDate::parse("2024-03-01");
    spec.days = argc > 2 ? std::atoi(argv[2]) : 3;
    spec.announcements_per_day = argc > 3 ? size_t(std::atoll(argv[3])) : 1500;
    spec.seed = 424242;
    synthetic::World world = synthetic::build_world(dir + "/world", spec);

    auto data = synthetic::paper_shaped(424242);
    std::vector<FeatureRow> rows;
    for (size_t i = 0; i < data.samples.size(); ++i) {
        FeatureRow row;
        row.key = {Asn{uint32_t(100 + i)},
                   *Prefix::parse("10." + std::to_string(i / 250 % 256) + "." +
                                  std::to_string(i % 250) + ".0/24")};
        row.ts = int64_t(i);
        row.features = data.samples[i].features;
        row.hijack_label = data.samples[i].label == ml::Label::Hijack;
        rows.push_back(row);
    }
    pipeline::write_file(dir + "/features.csv", to_feature_csv(rows));

    pipeline::PipelineConfig cfg;
    cfg.snapshot_dir = world.snapshot_dir;
    cfg.model_file = dir + "/model.json";
    cfg.store_dir = dir + "/store";
    cfg.reports_dir = dir + "/reports";
    cfg.seed = 424242;
    pipeline::write_file(dir + "/config.ini", cfg.serialize());

    std::printf("%s\n", dir.c_str());
    return 0;
}
