#include "shiftcraft/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "shiftcraft/rng.hpp"

namespace shiftcraft {

namespace {

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

int variant_rank(TrainVariant v) { return static_cast<int>(v); }

// Canonical record ordering, used to make selection permutation-stable.
bool record_key_less(const ExperimentRecord& a, const ExperimentRecord& b) {
    const auto key = [](const ExperimentRecord& r) {
        return std::tuple(variant_rank(r.train_variant), static_cast<int>(r.test_kind), r.w,
                          r.lambda, r.lr, r.seed);
    };
    return key(a) < key(b);
}

// True when a beats b under the selection rule.
bool selection_better(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    if (a.lr != b.lr) return a.lr < b.lr;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return variant_rank(a.train_variant) < variant_rank(b.train_variant);
}

}  // namespace

std::string_view to_string(TestKind k) {
    switch (k) {
        case TestKind::I: return "I";
        case TestKind::S: return "S";
        case TestKind::IS: return "IS";
        case TestKind::IS_x2: return "IS_x2";
    }
    return "?";
}

std::optional<TestKind> test_kind_from_string(std::string_view name) {
    for (TestKind k : {TestKind::I, TestKind::S, TestKind::IS, TestKind::IS_x2}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

Prediction ensemble_predict(const Prediction& p_i, const Prediction& p_s, double w) {
    if (p_i.probs.size() != p_s.probs.size()) {
        throw std::invalid_argument("ensemble_predict: class count mismatch");
    }
    if (p_i.probs.empty()) throw std::invalid_argument("ensemble_predict: empty predictions");
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("ensemble_predict: w outside [0, 1]");
    Prediction out;
    out.probs.resize(p_i.probs.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < p_i.probs.size(); ++c) {
        const double a = std::max(p_i.probs[c], 1e-12);
        const double b = std::max(p_s.probs[c], 1e-12);
        out.probs[c] = std::pow(a, w) * std::pow(b, 1.0 - w);
        sum += out.probs[c];
    }
    for (double& v : out.probs) v /= sum;
    return out;
}

double evaluate(const Model& image_model, const Model* shape_model, const EvalSet& set,
                const TestVariant& tv, const BteParams& bte_params, const EvalPolicy& policy) {
    if (set.kind == EvalKind::oracle && !policy.allow_oracle) {
        throw std::invalid_argument("evaluate: oracle set forbidden by policy");
    }
    if (set.items.empty()) throw std::invalid_argument("evaluate: empty set");
    if (tv.w < 0.0 || tv.w > 1.0) throw std::invalid_argument("evaluate: w outside [0, 1]");
    if (tv.kind == TestKind::IS_x2 && !shape_model) {
        throw std::invalid_argument("evaluate: IS_x2 needs a shape model");
    }

    const Model& sm = (tv.kind == TestKind::IS_x2 && shape_model) ? *shape_model : image_model;
    int hits = 0;
    for (const LabeledImage& item : set.items) {
        Prediction p;
        switch (tv.kind) {
            case TestKind::I:
                p = forward(image_model, item.image);
                break;
            case TestKind::S:
                p = forward(sm, extract_bte(item.image, bte_params));
                break;
            case TestKind::IS:
            case TestKind::IS_x2: {
                const Prediction pi = forward(image_model, item.image);
                const Prediction ps = forward(sm, extract_bte(item.image, bte_params));
                p = ensemble_predict(pi, ps, tv.w);
                break;
            }
        }
        if (argmax_lowest(p.probs) == item.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(set.items.size());
}

TcvSplit tcv_split(int fold, std::uint64_t split_seed) {
    if (fold != 0 && fold != 1) throw std::invalid_argument("tcv_split: fold must be 0 or 1");
    std::array<AugmentationGroup, 10> perm = kAllGroups;
    RandomStream rng(derive_seed(split_seed, {hash_str("tcv")}));
    rng.shuffle(perm.data(), static_cast<int>(perm.size()));

    TcvSplit out;
    for (int i = 0; i < 5; ++i) out.train_groups.push_back(perm[i]);
    for (int i = 5; i < 10; ++i) out.val_groups.push_back(perm[i]);
    if (fold == 1) std::swap(out.train_groups, out.val_groups);
    std::sort(out.train_groups.begin(), out.train_groups.end());
    std::sort(out.val_groups.begin(), out.val_groups.end());
    return out;
}

TcvResult tcv_validate(const std::vector<LabeledImage>& train_data, const TrainConfig& cfg,
                       const std::vector<LabeledImage>& val_images, const TestVariant& tv,
                       std::uint64_t split_seed, std::uint64_t valset_seed,
                       const BteParams& test_bte) {
    if (!variant_has_extra_augs(cfg.variant) && cfg.variant != TrainVariant::I_hat_plus_BTE) {
        throw std::invalid_argument(
            "tcv_validate: variant has no extra augmentations; use plain validation");
    }
    TcvResult out;
    for (int fold = 0; fold < 2; ++fold) {
        const TcvSplit split = tcv_split(fold, split_seed);
        TrainConfig fold_cfg = cfg;
        fold_cfg.allowed_groups = split.train_groups;
        const TrainResult tr = train(train_data, fold_cfg);
        const EvalSet vset = build_augmented(val_images, split.val_groups, valset_seed);
        const Model* sm = tr.shape_model ? &*tr.shape_model : nullptr;
        const double acc = evaluate(tr.model, sm, vset, tv, test_bte);
        out.folds[fold] = {split.train_groups, split.val_groups, acc};
    }
    out.mean_accuracy = 0.5 * (out.folds[0].accuracy + out.folds[1].accuracy);
    return out;
}

std::vector<double> grid_lr() {
    std::vector<double> out;
    for (int i = 0; i <= 32; ++i) out.push_back(std::pow(10.0, -5.0 + 5.0 * i / 32.0));
    return out;
}

std::vector<double> grid_lr_reduced() {
    std::vector<double> out;
    for (int i = 0; i <= 32; i += 4) out.push_back(std::pow(10.0, -5.0 + 5.0 * i / 32.0));
    return out;
}

std::vector<double> grid_lambda() {
    std::vector<double> out;
    for (int j = 0; j <= 16; ++j) out.push_back(static_cast<double>(j) / 16.0);
    return out;
}

std::vector<double> grid_w() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

SelectionReport select(const std::vector<ExperimentRecord>& records, EvalKind by,
                       const EvalPolicy& policy) {
    if (records.empty()) throw std::invalid_argument("select: no records");
    for (const ExperimentRecord& r : records) {
        if (r.val_kind != by) {
            throw std::invalid_argument("select: record validation kind differs from 'by'");
        }
        if (r.val_kind == EvalKind::oracle && !policy.allow_oracle) {
            throw std::invalid_argument("select: oracle records forbidden by policy");
        }
        if (r.val_accuracy < 0.0 || r.val_accuracy > 1.0) {
            throw std::invalid_argument("select: accuracy outside [0, 1]");
        }
    }

    std::vector<ExperimentRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), record_key_less);

    std::size_t best = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (selection_better(sorted[i], sorted[best])) best = i;
    }
    SelectionReport report;
    report.chosen = sorted[best];
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i != best) report.runner_ups.push_back(sorted[i]);
    }
    std::stable_sort(report.runner_ups.begin(), report.runner_ups.end(), selection_better);
    return report;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");
    const auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
    };
    if (constant(x) || constant(y)) {
        throw std::invalid_argument("spearman: correlation undefined for constant input");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace shiftcraft
