#include "rovwl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace rovwl::ml {

const char* to_string(Label l) {
    return l == Label::BenignConflict ? "benign" : "hijack";
}

const char* to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::Dt: return "dt";
        case ModelFamily::Rf: return "rf";
        case ModelFamily::Knn: return "knn";
        case ModelFamily::Nb: return "nb";
    }
    return "?";
}

Metrics Metrics::from_confusion(const ConfusionCounts& c) {
    Metrics m;
    m.confusion = c;
    double psum = 0, rsum = 0, fsum = 0;
    for (int k = 0; k < 2; ++k) {
        double tp = double(c.m[k][k]);
        double fn = double(c.m[k][1 - k]);
        double fp = double(c.m[1 - k][k]);
        double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        double f1 = precision + recall > 0
                        ? 2.0 * precision * recall / (precision + recall)
                        : 0.0;
        m.class_accuracy[k] = recall;
        psum += precision;
        rsum += recall;
        fsum += f1;
    }
    m.macro_precision = psum / 2;
    m.macro_recall = rsum / 2;
    m.macro_f1 = fsum / 2;
    return m;
}

// --- sampling helpers ------------------------------------------------------------

std::vector<LabeledSample> oversample(const std::vector<LabeledSample>& samples,
                                      size_t target_count, uint64_t seed) {
    std::array<std::vector<size_t>, 2> by_class;
    for (size_t i = 0; i < samples.size(); ++i)
        by_class[size_t(samples[i].label)].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw std::invalid_argument("oversample: a class is empty");
    if (by_class[0].size() == by_class[1].size()) return samples;  // balanced
    size_t minority = by_class[0].size() < by_class[1].size() ? 0 : 1;
    if (target_count < by_class[minority].size())
        throw std::invalid_argument("oversample: target below minority count");

    std::vector<LabeledSample> out = samples;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, by_class[minority].size() - 1);
    for (size_t i = by_class[minority].size(); i < target_count; ++i) {
        out.push_back(samples[by_class[minority][pick(rng)]]);
    }
    return out;
}

std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> stratified_split(
    const std::vector<LabeledSample>& samples, double ratio, uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split: ratio must be in (0,1)");
    std::array<std::vector<size_t>, 2> by_class;
    for (size_t i = 0; i < samples.size(); ++i)
        by_class[size_t(samples[i].label)].push_back(i);
    std::mt19937_64 rng(seed);
    for (auto& idx : by_class) std::shuffle(idx.begin(), idx.end(), rng);

    size_t total_train = size_t(std::llround(ratio * double(samples.size())));
    std::array<size_t, 2> take{};
    std::array<double, 2> remainder{};
    size_t base_sum = 0;
    for (int c = 0; c < 2; ++c) {
        double exact = ratio * double(by_class[c].size());
        take[c] = size_t(std::floor(exact));
        remainder[c] = exact - double(take[c]);
        base_sum += take[c];
    }
    // distribute leftovers by largest remainder; ties favor class 0
    size_t deficit = total_train > base_sum ? total_train - base_sum : 0;
    std::array<int, 2> order = remainder[1] > remainder[0] ? std::array<int, 2>{1, 0}
                                                           : std::array<int, 2>{0, 1};
    for (size_t i = 0; i < deficit && i < 2; ++i) {
        int c = order[i];
        if (take[c] < by_class[c].size()) ++take[c];
    }

    std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> out;
    for (int c = 0; c < 2; ++c) {
        for (size_t i = 0; i < by_class[c].size(); ++i) {
            (i < take[c] ? out.first : out.second).push_back(samples[by_class[c][i]]);
        }
    }
    return out;
}

// --- CART ---------------------------------------------------------------------

namespace {

double gini(const std::array<uint64_t, 2>& counts) {
    uint64_t n = counts[0] + counts[1];
    if (n == 0) return 0.0;
    double p0 = double(counts[0]) / double(n);
    double p1 = double(counts[1]) / double(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

struct CartBuilder {
    const std::vector<std::array<double, kFeatureCount>>& x;
    const std::vector<Label>& y;
    int max_depth;
    int min_samples_leaf;
    int features_per_split;  // 7 disables the random subset
    std::mt19937_64& rng;

    Tree tree;

    int build(std::vector<uint32_t>& idx, int depth) {
        std::array<uint64_t, 2> counts{};
        for (uint32_t i : idx) ++counts[size_t(y[i])];
        int node_id = int(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].counts = counts;
        tree.nodes[node_id].impurity = gini(counts);

        uint64_t n = idx.size();
        bool pure = counts[0] == 0 || counts[1] == 0;
        if (depth >= max_depth || pure || n < 2 * uint64_t(min_samples_leaf)) {
            return node_id;
        }

        std::array<int, kFeatureCount> feats{};
        int n_feats = 0;
        if (features_per_split >= int(kFeatureCount)) {
            for (size_t f = 0; f < kFeatureCount; ++f) feats[n_feats++] = int(f);
        } else {
            // random distinct subset, sorted for a deterministic scan order
            std::array<int, kFeatureCount> all{};
            for (size_t f = 0; f < kFeatureCount; ++f) all[f] = int(f);
            for (int i = 0; i < features_per_split; ++i) {
                std::uniform_int_distribution<int> pick(i, int(kFeatureCount) - 1);
                std::swap(all[i], all[pick(rng)]);
                feats[n_feats++] = all[i];
            }
            std::sort(feats.begin(), feats.begin() + n_feats);
        }

        double parent_imp = tree.nodes[node_id].impurity;
        double best_decrease = 1e-12;
        int best_feature = -1;
        double best_threshold = 0;

        std::vector<std::pair<double, Label>> vals(idx.size());
        for (int fi = 0; fi < n_feats; ++fi) {
            int f = feats[fi];
            for (size_t i = 0; i < idx.size(); ++i)
                vals[i] = {x[idx[i]][f], y[idx[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::array<uint64_t, 2> left{};
            for (size_t i = 1; i < vals.size(); ++i) {
                ++left[size_t(vals[i - 1].second)];
                if (vals[i].first == vals[i - 1].first) continue;
                uint64_t nl = i, nr = n - i;
                if (nl < uint64_t(min_samples_leaf) || nr < uint64_t(min_samples_leaf))
                    continue;
                std::array<uint64_t, 2> right{counts[0] - left[0], counts[1] - left[1]};
                double child_imp = (double(nl) * gini(left) + double(nr) * gini(right)) /
                                   double(n);
                double decrease = parent_imp - child_imp;
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_feature = f;
                    best_threshold = (vals[i - 1].first + vals[i].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return node_id;

        std::vector<uint32_t> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (uint32_t i : idx) {
            (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        int l = build(left_idx, depth + 1);
        tree.nodes[node_id].left = l;
        int r = build(right_idx, depth + 1);
        tree.nodes[node_id].right = r;
        return node_id;
    }
};

Tree build_tree(const std::vector<std::array<double, kFeatureCount>>& x,
                const std::vector<Label>& y, std::vector<uint32_t> idx, int max_depth,
                int min_samples_leaf, int features_per_split, std::mt19937_64& rng) {
    CartBuilder b{x, y, max_depth, min_samples_leaf, features_per_split, rng, {}};
    b.build(idx, 0);
    return std::move(b.tree);
}

const TreeNode& descend(const Tree& t, const std::array<double, kFeatureCount>& v) {
    int cur = 0;
    while (t.nodes[cur].feature >= 0) {
        const TreeNode& nd = t.nodes[cur];
        cur = v[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return t.nodes[cur];
}

Label leaf_label(const TreeNode& leaf) {
    // ties go to Hijack
    return leaf.counts[1] >= leaf.counts[0] ? Label::Hijack : Label::BenignConflict;
}

uint64_t tree_seed(uint64_t seed, size_t tree_idx) {
    return splitmix64(seed ^ splitmix64(0x9e3779b97f4a7c15ULL * (tree_idx + 1)));
}

}  // namespace

// --- train / predict -----------------------------------------------------------

uint64_t training_fingerprint(std::span<const LabeledSample> samples) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const LabeledSample& s : samples) {
        auto vals = s.features.values();
        h = fnv1a64(vals.data(), sizeof(vals), h);
        uint8_t lab = uint8_t(s.label);
        h = fnv1a64(&lab, 1, h);
    }
    return h;
}

TrainedModel train(const ModelSpec& spec, std::span<const LabeledSample> samples) {
    std::array<uint64_t, 2> class_counts{};
    for (const LabeledSample& s : samples) ++class_counts[size_t(s.label)];
    if (class_counts[0] == 0 || class_counts[1] == 0)
        throw std::invalid_argument("train: training set must contain both classes");

    std::vector<std::array<double, kFeatureCount>> x(samples.size());
    std::vector<Label> y(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        x[i] = samples[i].features.values();
        y[i] = samples[i].label;
    }

    TrainedModel model;
    model.spec = spec;
    model.training_fingerprint = training_fingerprint(samples);

    if (auto* dt = std::get_if<DtParams>(&spec.params)) {
        std::mt19937_64 rng(spec.seed);
        std::vector<uint32_t> idx(x.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = uint32_t(i);
        model.state = DtState{build_tree(x, y, std::move(idx), dt->max_depth,
                                         dt->min_samples_leaf, int(kFeatureCount), rng)};
    } else if (auto* rf = std::get_if<RfParams>(&spec.params)) {
        RfState state;
        state.trees.reserve(size_t(rf->n_trees));
        for (int t = 0; t < rf->n_trees; ++t) {
            std::mt19937_64 rng(tree_seed(spec.seed, size_t(t)));
            std::vector<uint32_t> idx;
            idx.reserve(x.size());
            if (rf->bootstrap) {
                std::uniform_int_distribution<uint32_t> pick(0, uint32_t(x.size() - 1));
                for (size_t i = 0; i < x.size(); ++i) idx.push_back(pick(rng));
            } else {
                for (size_t i = 0; i < x.size(); ++i) idx.push_back(uint32_t(i));
            }
            state.trees.push_back(build_tree(x, y, std::move(idx), rf->max_depth,
                                             rf->min_samples_leaf,
                                             rf->features_per_split, rng));
        }
        model.state = std::move(state);
    } else if (std::holds_alternative<KnnParams>(spec.params)) {
        model.state = KnnState{std::move(x), std::move(y)};
    } else {
        const auto& nb = std::get<NbParams>(spec.params);
        NbState state;
        // epsilon scales with the largest global feature variance
        double max_var = 0;
        for (size_t f = 0; f < kFeatureCount; ++f) {
            double mean = 0;
            for (const auto& row : x) mean += row[f];
            mean /= double(x.size());
            double var = 0;
            for (const auto& row : x) var += (row[f] - mean) * (row[f] - mean);
            var /= double(x.size());
            max_var = std::max(max_var, var);
        }
        double eps = nb.var_smoothing * max_var;
        for (int c = 0; c < 2; ++c) {
            state.log_prior[c] =
                std::log(double(class_counts[c]) / double(samples.size()));
            for (size_t f = 0; f < kFeatureCount; ++f) {
                double mean = 0;
                for (size_t i = 0; i < x.size(); ++i)
                    if (size_t(y[i]) == size_t(c)) mean += x[i][f];
                mean /= double(class_counts[c]);
                double var = 0;
                for (size_t i = 0; i < x.size(); ++i)
                    if (size_t(y[i]) == size_t(c))
                        var += (x[i][f] - mean) * (x[i][f] - mean);
                var /= double(class_counts[c]);
                state.mean[c][f] = mean;
                state.variance[c][f] = std::max(var + eps, 1e-300);
            }
        }
        model.state = state;
    }
    return model;
}

Prediction predict(const TrainedModel& model, const FeatureVector& fv) {
    auto v = fv.values();
    Prediction out;
    if (auto* dt = std::get_if<DtState>(&model.state)) {
        const TreeNode& leaf = descend(dt->tree, v);
        uint64_t n = leaf.counts[0] + leaf.counts[1];
        out.label = leaf_label(leaf);
        out.hijack_score = n ? double(leaf.counts[1]) / double(n) : 1.0;
    } else if (auto* rf = std::get_if<RfState>(&model.state)) {
        uint64_t hijack_votes = 0;
        for (const Tree& t : rf->trees) {
            if (leaf_label(descend(t, v)) == Label::Hijack) ++hijack_votes;
        }
        uint64_t n = rf->trees.size();
        out.label = 2 * hijack_votes >= n ? Label::Hijack : Label::BenignConflict;
        out.hijack_score = n ? double(hijack_votes) / double(n) : 1.0;
    } else if (auto* knn = std::get_if<KnnState>(&model.state)) {
        const auto& params = std::get<KnnParams>(model.spec.params);
        size_t k = std::min(size_t(params.n_neighbors), knn->points.size());
        std::vector<std::pair<double, size_t>> dist(knn->points.size());
        for (size_t i = 0; i < knn->points.size(); ++i) {
            double d2 = 0;
            for (size_t f = 0; f < kFeatureCount; ++f) {
                double diff = knn->points[i][f] - v[f];
                d2 += diff * diff;
            }
            dist[i] = {d2, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + std::ptrdiff_t(k), dist.end());
        uint64_t hijack = 0;
        for (size_t i = 0; i < k; ++i) {
            if (knn->labels[dist[i].second] == Label::Hijack) ++hijack;
        }
        out.label = 2 * hijack >= k ? Label::Hijack : Label::BenignConflict;
        out.hijack_score = k ? double(hijack) / double(k) : 1.0;
    } else {
        const auto& nb = std::get<NbState>(model.state);
        std::array<double, 2> logp = nb.log_prior;
        for (int c = 0; c < 2; ++c) {
            for (size_t f = 0; f < kFeatureCount; ++f) {
                double var = nb.variance[c][f];
                double diff = v[f] - nb.mean[c][f];
                logp[c] += -0.5 * std::log(2.0 * std::numbers::pi * var) -
                           diff * diff / (2.0 * var);
            }
        }
        out.label = logp[1] >= logp[0] ? Label::Hijack : Label::BenignConflict;
        out.hijack_score = 1.0 / (1.0 + std::exp(logp[0] - logp[1]));
    }
    return out;
}

// --- evaluation -------------------------------------------------------------------

Metrics evaluate_holdout(const TrainedModel& model,
                         std::span<const LabeledSample> samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty holdout");
    ConfusionCounts c;
    for (const LabeledSample& s : samples) {
        c.add(s.label, predict(model, s.features).label);
    }
    return Metrics::from_confusion(c);
}

std::vector<int> stratified_fold_assignment(std::span<const LabeledSample> samples,
                                            int k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
    std::array<std::vector<size_t>, 2> by_class;
    for (size_t i = 0; i < samples.size(); ++i)
        by_class[size_t(samples[i].label)].push_back(i);
    if (by_class[0].size() < size_t(k) || by_class[1].size() < size_t(k))
        throw std::invalid_argument("cross_validate: k exceeds a class count");

    std::mt19937_64 rng(seed);
    for (auto& idx : by_class) std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<int> fold_of(samples.size());
    for (const auto& idx : by_class) {
        for (size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = int(i % size_t(k));
    }
    return fold_of;
}

Metrics cross_validate(const ModelSpec& spec, std::span<const LabeledSample> samples,
                       int k, uint64_t seed) {
    std::vector<int> fold_of = stratified_fold_assignment(samples, k, seed);

    ConfusionCounts pooled;
    for (int f = 0; f < k; ++f) {
        std::vector<LabeledSample> train_set, test_set;
        for (size_t i = 0; i < samples.size(); ++i) {
            (fold_of[i] == f ? test_set : train_set).push_back(samples[i]);
        }
        TrainedModel model = train(spec, train_set);
        for (const LabeledSample& s : test_set) {
            pooled.add(s.label, predict(model, s.features).label);
        }
    }
    return Metrics::from_confusion(pooled);
}

// --- grid search ---------------------------------------------------------------

std::vector<ModelSpec> grid_points(ModelFamily family, uint64_t seed) {
    std::vector<ModelSpec> out;
    switch (family) {
        case ModelFamily::Dt:
            for (int d = 3; d <= 20; d += 2)
                for (int l = 2; l <= 20; l += 2)
                    out.push_back({DtParams{d, l}, seed});
            break;
        case ModelFamily::Rf:
            for (int d = 3; d <= 20; d += 2)
                for (int l = 2; l <= 20; l += 2) {
                    RfParams p;
                    p.max_depth = d;
                    p.min_samples_leaf = l;
                    out.push_back({p, seed});
                }
            break;
        case ModelFamily::Knn:
            for (int k = 1; k <= 20; k += 2) out.push_back({KnnParams{k}, seed});
            break;
        case ModelFamily::Nb:
            out.push_back({NbParams{}, seed});
            break;
    }
    return out;
}

namespace {

// regularization keys for tie-breaking: (max_depth, -min_samples_leaf, k)
std::array<int, 3> reg_key(const ModelSpec& spec) {
    if (auto* dt = std::get_if<DtParams>(&spec.params))
        return {dt->max_depth, -dt->min_samples_leaf, 0};
    if (auto* rf = std::get_if<RfParams>(&spec.params))
        return {rf->max_depth, -rf->min_samples_leaf, 0};
    if (auto* knn = std::get_if<KnnParams>(&spec.params))
        return {0, 0, knn->n_neighbors};
    return {0, 0, 0};
}

}  // namespace

GridResult grid_search(ModelFamily family, std::span<const LabeledSample> samples,
                       uint64_t seed, int cv_folds) {
    auto points = grid_points(family, seed);
    GridResult best;
    bool have = false;
    for (const ModelSpec& spec : points) {
        Metrics m = cross_validate(spec, samples, cv_folds, seed);
        bool better = false;
        if (!have) {
            better = true;
        } else if (m.macro_f1 > best.metrics.macro_f1) {
            better = true;
        } else if (m.macro_f1 == best.metrics.macro_f1 &&
                   reg_key(spec) < reg_key(best.spec)) {
            better = true;
        }
        if (better) {
            best = {spec, m};
            have = true;
        }
    }
    return best;
}

// --- feature importance -------------------------------------------------------------

std::array<double, kFeatureCount> feature_importance(const TrainedModel& model) {
    const auto* rf = std::get_if<RfState>(&model.state);
    if (!rf) throw std::invalid_argument("feature_importance: RF models only");

    std::array<double, kFeatureCount> total{};
    for (const Tree& t : rf->trees) {
        std::array<double, kFeatureCount> raw{};
        double root_n = double(t.nodes[0].counts[0] + t.nodes[0].counts[1]);
        if (root_n == 0) continue;
        for (const TreeNode& nd : t.nodes) {
            if (nd.feature < 0) continue;
            const TreeNode& l = t.nodes[nd.left];
            const TreeNode& r = t.nodes[nd.right];
            double n = double(nd.counts[0] + nd.counts[1]);
            double nl = double(l.counts[0] + l.counts[1]);
            double nr = double(r.counts[0] + r.counts[1]);
            double decrease =
                nd.impurity - (nl * l.impurity + nr * r.impurity) / n;
            raw[size_t(nd.feature)] += (n / root_n) * decrease;
        }
        double sum = 0;
        for (double v : raw) sum += v;
        if (sum <= 0) continue;
        for (size_t f = 0; f < kFeatureCount; ++f) total[f] += raw[f] / sum;
    }
    double sum = 0;
    for (double v : total) sum += v;
    if (sum <= 0)
        throw std::runtime_error("feature_importance: forest has no splits");
    for (double& v : total) v /= sum;
    return total;
}

// --- hashing / persistence ------------------------------------------------------------

namespace {

nlohmann::json tree_to_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& nd : t.nodes) {
        nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.counts[0],
                         nd.counts[1], nd.impurity});
    }
    return nodes;
}

Tree tree_from_json(const nlohmann::json& nodes) {
    Tree t;
    for (const auto& row : nodes) {
        TreeNode nd;
        nd.feature = row.at(0).get<int>();
        nd.threshold = row.at(1).get<double>();
        nd.left = row.at(2).get<int>();
        nd.right = row.at(3).get<int>();
        nd.counts = {row.at(4).get<uint64_t>(), row.at(5).get<uint64_t>()};
        nd.impurity = row.at(6).get<double>();
        t.nodes.push_back(nd);
    }
    return t;
}

nlohmann::json params_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    if (auto* dt = std::get_if<DtParams>(&spec.params)) {
        j["max_depth"] = dt->max_depth;
        j["min_samples_leaf"] = dt->min_samples_leaf;
    } else if (auto* rf = std::get_if<RfParams>(&spec.params)) {
        j["n_trees"] = rf->n_trees;
        j["max_depth"] = rf->max_depth;
        j["min_samples_leaf"] = rf->min_samples_leaf;
        j["bootstrap"] = rf->bootstrap;
        j["features_per_split"] = rf->features_per_split;
    } else if (auto* knn = std::get_if<KnnParams>(&spec.params)) {
        j["n_neighbors"] = knn->n_neighbors;
    } else {
        j["var_smoothing"] = std::get<NbParams>(spec.params).var_smoothing;
    }
    return j;
}

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(uint64_t v) {
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[size_t(i)] = hex_digit(v);
        v >>= 4;
    }
    return out;
}

}  // namespace

std::string save_model_json(const TrainedModel& model,
                            const std::array<double, kFeatureCount>* weights) {
    nlohmann::json j;
    j["format"] = "rovwl-model";
    j["format_version"] = kModelFormatVersion;
    j["family"] = to_string(model.family());
    j["seed"] = model.spec.seed;
    j["params"] = params_to_json(model.spec);
    j["training_fingerprint"] = hex64(model.training_fingerprint);

    nlohmann::json state;
    if (auto* dt = std::get_if<DtState>(&model.state)) {
        state["tree"] = tree_to_json(dt->tree);
    } else if (auto* rf = std::get_if<RfState>(&model.state)) {
        auto& trees = state["trees"] = nlohmann::json::array();
        for (const Tree& t : rf->trees) trees.push_back(tree_to_json(t));
    } else if (auto* knn = std::get_if<KnnState>(&model.state)) {
        auto& pts = state["points"] = nlohmann::json::array();
        for (size_t i = 0; i < knn->points.size(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (double v : knn->points[i]) row.push_back(v);
            row.push_back(int(knn->labels[i]));
            pts.push_back(std::move(row));
        }
    } else {
        const auto& nb = std::get<NbState>(model.state);
        state["log_prior"] = nb.log_prior;
        state["mean"] = nb.mean;
        state["variance"] = nb.variance;
    }
    j["state"] = std::move(state);
    if (weights) j["tightness_weights"] = *weights;
    return j.dump(2) + "\n";
}

LoadedModel load_model_json(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::runtime_error("model file: not a JSON object");
    if (!j.contains("format") || j["format"] != "rovwl-model")
        throw std::runtime_error("model file: unrecognized format");
    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != kModelFormatVersion)
        throw std::runtime_error("model file: unsupported format version");

    LoadedModel out;
    std::string family = j.at("family").get<std::string>();
    uint64_t seed = j.at("seed").get<uint64_t>();
    const auto& p = j.at("params");
    const auto& state = j.at("state");
    if (family == "dt") {
        DtParams dp{p.at("max_depth").get<int>(), p.at("min_samples_leaf").get<int>()};
        out.model.spec = {dp, seed};
        out.model.state = DtState{tree_from_json(state.at("tree"))};
    } else if (family == "rf") {
        RfParams rp;
        rp.n_trees = p.at("n_trees").get<int>();
        rp.max_depth = p.at("max_depth").get<int>();
        rp.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        rp.bootstrap = p.at("bootstrap").get<bool>();
        rp.features_per_split = p.at("features_per_split").get<int>();
        out.model.spec = {rp, seed};
        RfState rs;
        for (const auto& t : state.at("trees")) rs.trees.push_back(tree_from_json(t));
        out.model.state = std::move(rs);
    } else if (family == "knn") {
        out.model.spec = {KnnParams{p.at("n_neighbors").get<int>()}, seed};
        KnnState ks;
        for (const auto& row : state.at("points")) {
            std::array<double, kFeatureCount> pt{};
            for (size_t f = 0; f < kFeatureCount; ++f) pt[f] = row.at(f).get<double>();
            ks.points.push_back(pt);
            ks.labels.push_back(Label(row.at(kFeatureCount).get<int>()));
        }
        out.model.state = std::move(ks);
    } else if (family == "nb") {
        out.model.spec = {NbParams{p.at("var_smoothing").get<double>()}, seed};
        NbState ns;
        ns.log_prior = state.at("log_prior").get<std::array<double, 2>>();
        ns.mean = state.at("mean")
                      .get<std::array<std::array<double, kFeatureCount>, 2>>();
        ns.variance = state.at("variance")
                          .get<std::array<std::array<double, kFeatureCount>, 2>>();
        out.model.state = ns;
    } else {
        throw std::runtime_error("model file: unknown family");
    }
    out.model.training_fingerprint =
        std::stoull(j.at("training_fingerprint").get<std::string>(), nullptr, 16);
    if (j.contains("tightness_weights")) {
        out.weights = j["tightness_weights"].get<std::array<double, kFeatureCount>>();
    }
    return out;
}

uint64_t model_state_hash(const TrainedModel& model) {
    std::string blob = save_model_json(model, nullptr);
    return fnv1a64(blob.data(), blob.size());
}

}  // namespace rovwl::ml
