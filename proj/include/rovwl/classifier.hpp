#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rovwl/features.hpp"

namespace rovwl::ml {

enum class Label : uint8_t { BenignConflict = 0, Hijack = 1 };

const char* to_string(Label l);

struct LabeledSample {
    FeatureVector features;
    Label label = Label::BenignConflict;
};

struct DtParams {
    int max_depth = 11;
    int min_samples_leaf = 2;
};

struct RfParams {
    int n_trees = 100;  // not part of the search grid; fixed default
    int max_depth = 11;
    int min_samples_leaf = 2;
    bool bootstrap = true;
    int features_per_split = 3;  // ceil(sqrt(7))
};

struct KnnParams {
    int n_neighbors = 5;
};

struct NbParams {
    double var_smoothing = 1e-9;
};

enum class ModelFamily : uint8_t { Dt = 0, Rf = 1, Knn = 2, Nb = 3 };

const char* to_string(ModelFamily f);

struct ModelSpec {
    std::variant<DtParams, RfParams, KnnParams, NbParams> params = RfParams{};
    uint64_t seed = 0;

    ModelFamily family() const { return ModelFamily(params.index()); }
};

// --- metrics -----------------------------------------------------------------

// confusion[actual][predicted], indexed by Label.
struct ConfusionCounts {
    std::array<std::array<uint64_t, 2>, 2> m{};

    uint64_t total() const { return m[0][0] + m[0][1] + m[1][0] + m[1][1]; }
    void add(Label actual, Label predicted) {
        ++m[size_t(actual)][size_t(predicted)];
    }
    void merge(const ConfusionCounts& o) {
        for (int a = 0; a < 2; ++a)
            for (int p = 0; p < 2; ++p) m[a][p] += o.m[a][p];
    }
};

struct Metrics {
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    std::array<double, 2> class_accuracy{};  // per-class accuracy (recall)
    ConfusionCounts confusion;

    static Metrics from_confusion(const ConfusionCounts& c);
};

// --- trained models -----------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::array<uint64_t, 2> counts{};  // training class counts at this node
    double impurity = 0;               // Gini at this node
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct DtState {
    Tree tree;
};

struct RfState {
    std::vector<Tree> trees;
};

struct KnnState {
    std::vector<std::array<double, kFeatureCount>> points;
    std::vector<Label> labels;
};

struct NbState {
    std::array<double, 2> log_prior{};
    std::array<std::array<double, kFeatureCount>, 2> mean{};
    std::array<std::array<double, kFeatureCount>, 2> variance{};  // smoothed
};

class TrainedModel {
public:
    ModelSpec spec;
    std::variant<DtState, RfState, KnnState, NbState> state;
    uint64_t training_fingerprint = 0;

    ModelFamily family() const { return spec.family(); }
};

struct Prediction {
    Label label = Label::Hijack;
    double hijack_score = 1.0;  // vote / leaf / neighbor fraction or posterior
};

// --- operations ----------------------------------------------------------------

// Duplicates the minority class by uniform sampling with replacement until it
// reaches target_count; the majority class is untouched.
std::vector<LabeledSample> oversample(const std::vector<LabeledSample>& samples,
                                      size_t target_count, uint64_t seed);

// Stratified split; per-class train share is ratio to within one sample.
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> stratified_split(
    const std::vector<LabeledSample>& samples, double ratio, uint64_t seed);

TrainedModel train(const ModelSpec& spec, std::span<const LabeledSample> samples);
Prediction predict(const TrainedModel& model, const FeatureVector& fv);

// Stratified fold assignment used by cross_validate: per class, fold sizes
// differ by at most one.
std::vector<int> stratified_fold_assignment(std::span<const LabeledSample> samples,
                                            int k, uint64_t seed);

Metrics cross_validate(const ModelSpec& spec, std::span<const LabeledSample> samples,
                       int k = 10, uint64_t seed = 0);

// The exhaustive hyperparameter grid per family (DT/RF: 90 points, KNN: 10,
// NB: 1), each carrying `seed`.
std::vector<ModelSpec> grid_points(ModelFamily family, uint64_t seed);

struct GridResult {
    ModelSpec spec;
    Metrics metrics;
};

// Scores every grid point with k-fold CV on macro-F1; ties prefer smaller
// max_depth, then larger min_samples_leaf, then smaller k.
GridResult grid_search(ModelFamily family, std::span<const LabeledSample> samples,
                       uint64_t seed, int cv_folds = 10);

// Mean decrease in Gini impurity weighted by node sample fraction, averaged
// over trees and normalized to sum 1. RF models only.
std::array<double, kFeatureCount> feature_importance(const TrainedModel& model);

Metrics evaluate_holdout(const TrainedModel& model,
                         std::span<const LabeledSample> samples);

uint64_t training_fingerprint(std::span<const LabeledSample> samples);
uint64_t model_state_hash(const TrainedModel& model);

// --- persistence ------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON: spec, seed, learned state, training fingerprint and the
// tightness weights frozen at training time. Loading any other format
// version fails closed.
std::string save_model_json(const TrainedModel& model,
                            const std::array<double, kFeatureCount>* weights);

struct LoadedModel {
    TrainedModel model;
    std::optional<std::array<double, kFeatureCount>> weights;
};
LoadedModel load_model_json(std::string_view text);  // throws on mismatch

}  // namespace rovwl::ml
