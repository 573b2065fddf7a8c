#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shiftcraft/config.hpp"
#include "shiftcraft/protocol.hpp"
#include "shiftcraft/synthdata.hpp"
#include "shiftcraft/trainer.hpp"
#include "shiftcraft/valset.hpp"

namespace shiftcraft {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Signals a non-finite result where a finite number is required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Labeled-image directory layout: manifest.csv with columns
// id,source_id,label,group,spec,params plus one 8-bit PNG per row named by
// the sanitized id.
std::string sanitize_id(const std::string& id);
void write_labeled_dir(const std::vector<LabeledImage>& items, const std::string& dir);
void write_eval_dir(const EvalSet& set, const std::string& dir);
std::vector<LabeledImage> read_labeled_dir(const std::string& dir);

// A fully resolved experiment: dataset, grids, protocol, and run settings.
// Defaults are desk-scale; plan_from_config overrides them from a config
// document and rejects unknown sections or keys.
struct ExperimentPlan {
    // [data]
    SynthSpec synth;
    std::vector<ShiftKind> targets = {ShiftKind::invert, ShiftKind::heavy_noise,
                                      ShiftKind::edge_only, ShiftKind::color_jitter};
    // [train]
    std::vector<TrainVariant> variants = {TrainVariant::I, TrainVariant::S, TrainVariant::IS};
    std::vector<double> lrs = {0.03, 0.3};
    std::vector<double> lambdas = {1.0};
    std::vector<double> ws = {0.25, 0.5, 0.75};
    std::vector<std::uint64_t> seeds = {1};
    int epochs = 10;
    int batch_images = 64;
    int batch_btes = 32;
    double extra_prob = 0.5;
    Architecture arch = Architecture::linear_softmax;
    int hidden = 16;
    // [protocol]
    std::vector<EvalKind> val_kinds = {EvalKind::standard, EvalKind::augmented};
    bool use_tcv = false;
    bool allow_oracle = false;
    std::uint64_t valset_seed = 99;
    std::uint64_t tcv_split_seed = 7;
    // [run]
    std::string out_dir = "run-out";
    int threads = 0;  // 0 = hardware concurrency; SHIFTCRAFT_THREADS overrides both
};

ExperimentPlan plan_from_config(const ConfigDoc& doc);

// Renders the fully resolved plan in config syntax; its FNV-1a hash is the
// manifest hash referenced by every report row.
std::string plan_snapshot(const ExperimentPlan& plan);

struct RunOutcome {
    int records = 0;
    std::string manifest_hash;
};

// Executes the grid: one training per (seed, variant, lr, effective lambda),
// records per (training, test variant, validation kind). Writes manifest.txt
// before any computation, journals report.csv as records complete, and
// finishes with sorted report.csv, correlation.csv, and selection.txt.
// Reruns skip records already present under the same manifest hash.
RunOutcome run_experiment(const ExperimentPlan& plan, const std::string& config_path);

}  // namespace shiftcraft
