#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftcraft/augment.hpp"
#include "shiftcraft/bte.hpp"
#include "shiftcraft/image.hpp"
#include "shiftcraft/valset.hpp"

namespace shiftcraft {

enum class Architecture { linear_softmax, mlp };

// Desk-scale classifier: linear softmax or a one-hidden-layer ReLU MLP.
// Weights are row-major; w1 is [rows x in_dim] with rows = hidden (mlp) or
// class_count (linear); w2 is [class_count x hidden] (mlp only).
struct Model {
    Architecture arch = Architecture::linear_softmax;
    int input_width = 32, input_height = 32, input_channels = 1;
    int class_count = 2;
    int hidden = 0;
    std::vector<double> w1, b1, w2, b2;

    int in_dim() const { return input_width * input_height * input_channels; }
};

struct Prediction {
    std::vector<double> probs;
};

enum class TrainVariant { I, I_hat, S, IS, IS_sob, I_hat_S, IS_x2, I_hat_plus_BTE };

std::string_view to_string(TrainVariant v);
std::optional<TrainVariant> variant_from_string(std::string_view name);

// True for variants whose batches contain a shape (edge-map) sub-batch.
bool variant_has_shape_branch(TrainVariant v);
// True for variants whose image slots may receive extra augmentations.
bool variant_has_extra_augs(TrainVariant v);

struct TrainConfig {
    TrainVariant variant = TrainVariant::I;
    double lambda = 1.0;
    double lr = 0.1;
    int epochs = 1;
    int batch_images = 64;
    int batch_btes = 0;
    std::uint64_t seed = 0;
    std::vector<AugmentationGroup> allowed_groups;  // extra-aug pool for I_hat variants
    double extra_prob = 0.5;
    BasicAugConfig basic;  // basic.out_size fixes the model input side
    BteRandomPolicy bte_policy;
    Architecture arch = Architecture::linear_softmax;
    int hidden = 16;
    int class_count = 2;

    // Diagnostics. ignore_shape_gradients assembles identical batches
    // (consuming identical randomness) but drops the shape-loss gradient;
    // record_weights snapshots the flattened weights after every step.
    bool ignore_shape_gradients = false;
    bool record_weights = false;
    std::string log_path;  // optional training-log CSV destination
};

struct TrainLogRow {
    int step = 0;
    double lr = 0.0, loss_total = 0.0, loss_i = 0.0, loss_s = 0.0;
};

struct TrainResult {
    Model model;
    std::optional<Model> shape_model;  // second model of IS_x2
    std::vector<TrainLogRow> log;
    std::vector<std::vector<double>> weight_trace;  // filled when record_weights
};

struct LossParts {
    double total = 0.0, loss_i = 0.0, loss_s = 0.0;
};

// Deterministic conversion of an input to the model's flat tensor: bilinear
// resize to the model raster when sizes differ, channel replication (1 -> 3)
// or luma reduction (3 -> 1) when channel counts differ.
std::vector<double> input_tensor(const Model& model, const Image& img);
std::vector<double> input_tensor(const Model& model, const BinaryMap& bte);

Prediction forward(const Model& model, const std::vector<double>& input);
Prediction forward(const Model& model, const Image& img);
Prediction forward(const Model& model, const BinaryMap& bte);

// Mean cross-entropy per sub-batch. An empty sub-batch contributes 0 and
// drops out of the total: both present -> l_i + lambda * l_s; shape only ->
// total = l_s; image only -> total = l_i.
LossParts loss(const std::vector<Prediction>& img_preds, const std::vector<int>& img_labels,
               const std::vector<Prediction>& bte_preds, const std::vector<int>& bte_labels,
               double lambda);

TrainResult train(const std::vector<LabeledImage>& data, const TrainConfig& cfg);

// Max relative error between analytic and central-difference gradients of the
// combined loss, over all parameters.
double gradient_check(const Model& model, const std::vector<std::vector<double>>& img_inputs,
                      const std::vector<int>& img_labels,
                      const std::vector<std::vector<double>>& bte_inputs,
                      const std::vector<int>& bte_labels, double lambda);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace shiftcraft
