#include "shiftcraft/valset.hpp"

#include <stdexcept>

#include "shiftcraft/rng.hpp"

namespace shiftcraft {

namespace {

// Picks one template of the group and pins its parameters from the stream.
AugmentationSpec sample_group_spec(AugmentationGroup g, RandomStream& rng) {
    const auto tmpls = templates_for(g);
    const SpecTemplate* t = tmpls[rng.uniform_int(static_cast<int>(tmpls.size()))];
    return sample_spec(*t, rng);
}

}  // namespace

std::string_view to_string(EvalKind k) {
    switch (k) {
        case EvalKind::standard: return "standard";
        case EvalKind::augmented: return "augmented";
        case EvalKind::augmented_small: return "augmented_small";
        case EvalKind::oracle: return "oracle";
    }
    return "?";
}

EvalSet build_standard(const std::vector<LabeledImage>& val) {
    if (val.empty()) throw std::invalid_argument("build_standard: empty validation list");
    EvalSet out;
    out.kind = EvalKind::standard;
    out.items = val;
    for (const LabeledImage& li : val) {
        out.provenance.push_back({li.id, std::nullopt, std::nullopt});
    }
    return out;
}

EvalSet build_augmented(const std::vector<LabeledImage>& val,
                        const std::vector<AugmentationGroup>& groups, std::uint64_t seed) {
    if (val.empty()) throw std::invalid_argument("build_augmented: empty validation list");
    if (groups.empty()) throw std::invalid_argument("build_augmented: empty group subset");
    EvalSet out;
    out.kind = EvalKind::augmented;
    out.items.reserve(val.size() * groups.size());
    for (const LabeledImage& li : val) {
        for (AugmentationGroup g : groups) {
            RandomStream rng(derive_seed(seed, {hash_str(li.id), hash_str(to_string(g))}));
            const AugmentationSpec spec = sample_group_spec(g, rng);
            LabeledImage item;
            item.image = apply_extra(li.image, spec, rng);
            item.label = li.label;
            item.id = li.id + "#" + std::string(to_string(g));
            out.items.push_back(std::move(item));
            out.provenance.push_back({li.id, g, spec});
        }
    }
    return out;
}

EvalSet build_augmented_small(const std::vector<LabeledImage>& val,
                              const std::vector<AugmentationGroup>& groups, std::uint64_t seed) {
    if (val.empty()) throw std::invalid_argument("build_augmented_small: empty validation list");
    if (groups.empty()) throw std::invalid_argument("build_augmented_small: empty group subset");
    EvalSet out;
    out.kind = EvalKind::augmented_small;
    out.items.reserve(val.size());
    for (const LabeledImage& li : val) {
        RandomStream rng(derive_seed(seed, {hash_str(li.id), hash_str("small")}));
        const AugmentationGroup g = groups[rng.uniform_int(static_cast<int>(groups.size()))];
        const AugmentationSpec spec = sample_group_spec(g, rng);
        LabeledImage item;
        item.image = apply_extra(li.image, spec, rng);
        item.label = li.label;
        item.id = li.id + "#small";
        out.items.push_back(std::move(item));
        out.provenance.push_back({li.id, g, spec});
    }
    return out;
}

EvalSet build_oracle(const std::vector<std::vector<LabeledImage>>& test_sets) {
    if (test_sets.empty()) throw std::invalid_argument("build_oracle: no test sets");
    EvalSet out;
    out.kind = EvalKind::oracle;
    for (std::size_t s = 0; s < test_sets.size(); ++s) {
        for (const LabeledImage& li : test_sets[s]) {
            LabeledImage item = li;
            item.id = "t" + std::to_string(s) + "/" + li.id;
            out.provenance.push_back({li.id, std::nullopt, std::nullopt});
            out.items.push_back(std::move(item));
        }
    }
    return out;
}

}  // namespace shiftcraft
