#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftcraft/bte.hpp"
#include "shiftcraft/trainer.hpp"
#include "shiftcraft/valset.hpp"

namespace shiftcraft {

enum class TestKind { I, S, IS, IS_x2 };

std::string_view to_string(TestKind k);
std::optional<TestKind> test_kind_from_string(std::string_view name);

// Test-time combination: w = 1 reduces to I, w = 0 to S.
struct TestVariant {
    TestKind kind = TestKind::I;
    double w = 1.0;
};

struct ExperimentRecord {
    TrainVariant train_variant = TrainVariant::I;
    TestKind test_kind = TestKind::I;
    double w = 1.0;
    double lambda = 1.0;
    double lr = 0.1;
    std::uint64_t seed = 0;
    EvalKind val_kind = EvalKind::standard;
    double val_accuracy = 0.0;
    std::optional<double> test_accuracy;  // filled only for correlation reports
};

struct SelectionReport {
    ExperimentRecord chosen;
    std::vector<ExperimentRecord> runner_ups;  // remaining records, best first
};

// Class-wise geometric mean p_i^w * p_s^(1-w), probabilities floored at
// 1e-12 before exponentiation, renormalized to sum 1.
Prediction ensemble_predict(const Prediction& p_i, const Prediction& p_s, double w);

struct EvalPolicy {
    bool allow_oracle = false;
};

// Accuracy of the test variant on an evaluation set. Images are preprocessed
// deterministically (resize to the model raster, channel adaptation); the
// shape path extracts a deterministic edge map with bte_params. shape_model
// is required for IS_x2 and ignored otherwise (single shared backbone).
// Argmax ties go to the lowest class index.
double evaluate(const Model& image_model, const Model* shape_model, const EvalSet& set,
                const TestVariant& tv, const BteParams& bte_params,
                const EvalPolicy& policy = {});

struct TcvSplit {
    std::vector<AugmentationGroup> train_groups, val_groups;
};

// Seeded halving of the canonical group order; fold 1 swaps the halves.
// Each half is reported in canonical order.
TcvSplit tcv_split(int fold, std::uint64_t split_seed);

struct TcvFoldResult {
    std::vector<AugmentationGroup> train_groups, val_groups;
    double accuracy = 0.0;
};

struct TcvResult {
    double mean_accuracy = 0.0;
    std::array<TcvFoldResult, 2> folds;
};

// Two-fold cross-validation over augmentation groups for extra-augmentation
// variants: each fold trains with its half of the groups and validates on an
// augmented set built from the complementary half. After selection, callers
// retrain with all groups.
TcvResult tcv_validate(const std::vector<LabeledImage>& train_data, const TrainConfig& cfg,
                       const std::vector<LabeledImage>& val_images, const TestVariant& tv,
                       std::uint64_t split_seed, std::uint64_t valset_seed,
                       const BteParams& test_bte);

// Hyperparameter grids: 33 log-equidistant lrs in [1e-5, 1], a 9-value
// reduced lr grid (every 4th), 17 equidistant lambdas in [0, 1], and the
// 5 ensembling weights.
std::vector<double> grid_lr();
std::vector<double> grid_lr_reduced();
std::vector<double> grid_lambda();
std::vector<double> grid_w();

// Argmax of val_accuracy; ties resolved by smaller lr, then smaller lambda,
// then variant order. Records must all carry val kind `by`; oracle records
// are rejected unless the policy explicitly allows the upper-bound report.
SelectionReport select(const std::vector<ExperimentRecord>& records, EvalKind by,
                       const EvalPolicy& policy = {});

// Fractional (average) ranks; ties share the mean of their rank positions.
std::vector<double> average_ranks(const std::vector<double>& v);

// Spearman rank correlation: Pearson on average ranks. Throws on constant
// input or fewer than 2 points.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shiftcraft
