#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shiftcraft/valset.hpp"

namespace shiftcraft {

// Named target-domain shifts applied to freshly sampled instances.
enum class ShiftKind { identity, invert, heavy_noise, edge_only, color_jitter, blur_shift };

std::string_view to_string(ShiftKind s);
std::optional<ShiftKind> shift_from_string(std::string_view name);

// Procedural glyph dataset: each class is a distinct stroke glyph (shape is
// the invariant cue) drawn over a class-correlated tint and grating (texture
// is the spurious cue, scaled by texture_strength).
struct SynthSpec {
    int class_count = 7;  // at most 7 glyph families
    int image_size = 32;
    int per_class_train = 50;
    int per_class_val = 20;
    int per_class_test = 20;
    double texture_strength = 0.8;
    std::uint64_t seed = 1;
    // Texture randomness is drawn from its own stream so that re-seeding it
    // leaves texture_strength = 0 images pixelwise unchanged. 0 = use `seed`.
    std::uint64_t texture_seed = 0;
};

std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> generate_source(
    const SynthSpec& spec);

std::vector<LabeledImage> generate_target(const SynthSpec& spec, ShiftKind shift);

}  // namespace shiftcraft
