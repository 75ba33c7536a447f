#pragma once

// Synthetic data for tests and the acceptance suite.
//
// paper_shaped() builds the ground-truth analogue used for classifier checks:
// 2000 benign-conflict-shaped rows (every row carries at least one relation
// feature and a mostly-small AS distance) and 2000 hijack-shaped rows
// (no relations apart from trace noise, large AS distance), the hijack side
// oversampled from 415 unique vectors to mirror the 22:1 imbalance handling.
// Exactly 5% of rows carry the wrong label:
//   - two consistent mislabeled collection events (60 benign-shaped rows
//     labeled hijack, 40 hijack-shaped rows labeled benign) - the shape that
//     mislabeled source feeds produce, and learnable by a classifier;
//   - 100 independent flips, asymmetric (40 benign->hijack, 60
//     hijack->benign) so the hijack class keeps its recall edge.
//
// build_world() materializes a replayable corpus on disk: snapshot files for
// all six datasets plus JSONL announcement files per day, with hand-labeled
// fixture routes (fast-path benign, behavior-path benign, hijack events).

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rovwl/classifier.hpp"
#include "rovwl/features.hpp"
#include "rovwl/net.hpp"
#include "rovwl/rov.hpp"

namespace synthetic {

struct Dataset {
    std::vector<rovwl::ml::LabeledSample> samples;  // 4000 rows, 5% mislabeled
    // the same rows grouped by feature shape, ignoring label noise
    std::vector<rovwl::FeatureVector> benign_shaped;
    std::vector<rovwl::FeatureVector> hijack_shaped;
    size_t mislabeled_rows = 0;
};

rovwl::FeatureVector random_benign(std::mt19937_64& rng);
rovwl::FeatureVector random_hijack(std::mt19937_64& rng);

Dataset paper_shaped(uint64_t seed);

// One informative feature; the others are label-independent uniform noise.
std::vector<rovwl::ml::LabeledSample> single_signal(size_t n,
                                                    rovwl::FeatureId informative,
                                                    uint64_t seed);

// Perfectly separable one-feature data.
std::vector<rovwl::ml::LabeledSample> separable(size_t n, uint64_t seed);

// Trains an RF on paper_shaped(seed) and writes the model file (with
// importance weights) to `path`. Reduced tree count keeps unit suites fast.
void write_model_file(const std::string& path, uint64_t seed, int n_trees = 100,
                      size_t subsample = 0);

// --- replayable world ------------------------------------------------------------

struct WorldSpec {
    rovwl::CalDate start;
    int days = 14;
    size_t announcements_per_day = 100000;
    uint64_t seed = 20240301;
    int fast_path_fixtures = 120;  // includes the resolved one
    int pending_fixtures = 30;
};

struct World {
    WorldSpec spec;
    std::string snapshot_dir;
    std::string announcements_dir;

    // hand labels
    std::vector<rovwl::RouteKey> persistent_benign;  // must end up whitelisted
    std::vector<rovwl::RouteKey> pending_benign;     // must sit Pending at the end
    std::vector<rovwl::RouteKey> hijack_routes;      // must never be whitelisted
    rovwl::RouteKey resolved_benign;  // ROA fixed on day 7, purged as resolved
    std::map<rovwl::CalDate, size_t> expected_invalid;  // per-day invalid count
};

World build_world(const std::string& dir, const WorldSpec& spec);

}  // namespace synthetic
