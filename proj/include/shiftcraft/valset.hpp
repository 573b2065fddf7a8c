#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftcraft/augment.hpp"
#include "shiftcraft/image.hpp"

namespace shiftcraft {

struct LabeledImage {
    Image image;
    int label = 0;
    std::string id;
};

enum class EvalKind { standard, augmented, augmented_small, oracle };

std::string_view to_string(EvalKind k);

// Where an evaluation item came from; group/spec are present for items that
// were produced by a transform.
struct ItemProvenance {
    std::string source_id;
    std::optional<AugmentationGroup> group;
    std::optional<AugmentationSpec> spec;
};

// An evaluation set with per-item provenance (parallel to items).
struct EvalSet {
    EvalKind kind = EvalKind::standard;
    std::vector<LabeledImage> items;
    std::vector<ItemProvenance> provenance;
};

// Raw images, unmodified.
EvalSet build_standard(const std::vector<LabeledImage>& val);

// One transformed copy per (image, group): |output| = |val| * |groups|.
// Each item's transform is seeded by (seed, image id, group), so the set is
// a pure function of its inputs and can be materialized once and reused.
EvalSet build_augmented(const std::vector<LabeledImage>& val,
                        const std::vector<AugmentationGroup>& groups, std::uint64_t seed);

// Same-size variant: one uniformly chosen group per image.
EvalSet build_augmented_small(const std::vector<LabeledImage>& val,
                              const std::vector<AugmentationGroup>& groups, std::uint64_t seed);

// Union of the test sets; usable only for upper-bound reporting.
EvalSet build_oracle(const std::vector<std::vector<LabeledImage>>& test_sets);

}  // namespace shiftcraft
