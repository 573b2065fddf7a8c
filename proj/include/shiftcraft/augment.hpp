#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shiftcraft/image.hpp"
#include "shiftcraft/rng.hpp"

namespace shiftcraft {

enum class AugmentationGroup {
    arithmetic,
    artistic,
    blur,
    color,
    contrast,
    convolutional,
    edges,
    geometric,
    segmentation,
    weather,
};

// Canonical group order; all iteration and sampling follows this order.
inline constexpr std::array<AugmentationGroup, 10> kAllGroups = {
    AugmentationGroup::arithmetic,    AugmentationGroup::artistic,
    AugmentationGroup::blur,          AugmentationGroup::color,
    AugmentationGroup::contrast,      AugmentationGroup::convolutional,
    AugmentationGroup::edges,         AugmentationGroup::geometric,
    AugmentationGroup::segmentation,  AugmentationGroup::weather,
};

std::string_view to_string(AugmentationGroup g);
std::optional<AugmentationGroup> group_from_string(std::string_view name);

// Closed parameter interval; sample_spec draws uniformly from it.
struct ParamRange {
    std::string name;
    double lo = 0.0, hi = 0.0;
};

// One registered transform with its documented parameter ranges.
struct SpecTemplate {
    AugmentationGroup group;
    std::string name;
    std::vector<ParamRange> params;
};

// A concrete transform instance: template name plus pinned parameter values.
struct AugmentationSpec {
    AugmentationGroup group;
    std::string name;
    std::vector<std::pair<std::string, double>> params;

    double param(std::string_view key) const;
};

// Deterministic ordered registry, grouped by kAllGroups order, >= 3 per group.
const std::vector<SpecTemplate>& registry();

// Templates of one group, in registry order.
std::vector<const SpecTemplate*> templates_for(AugmentationGroup g);

const SpecTemplate* find_template(std::string_view name);

// Pins each parameter uniformly within its range, in template order.
AugmentationSpec sample_spec(const SpecTemplate& tmpl, RandomStream& rng);

// Random crop / resize / horizontal flip applied to every training image.
struct BasicAugConfig {
    double crop_scale_lo = 0.8, crop_scale_hi = 1.0;
    double aspect_lo = 3.0 / 4.0, aspect_hi = 4.0 / 3.0;
    int out_size = 224;
    double hflip_prob = 0.5;
};

Image apply_basic(const Image& img, const BasicAugConfig& cfg, RandomStream& rng);

// Applies one registered transform; output stays in [0,1].
Image apply_extra(const Image& img, const AugmentationSpec& spec, RandomStream& rng);

// With probability extra_prob picks one group from allowed_groups, one
// transform within it, applies it, then always applies the basic pipeline.
// extra_prob = 0 consumes no randomness beyond apply_basic.
Image augment_for_training(const Image& img, const std::vector<AugmentationGroup>& allowed_groups,
                           double extra_prob, const BasicAugConfig& cfg, RandomStream& rng);

}  // namespace shiftcraft
