#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "shiftcraft/valset.hpp"

using namespace shiftcraft;

namespace {

std::vector<LabeledImage> make_items(int n, std::uint64_t seed) {
    std::vector<LabeledImage> out;
    for (int i = 0; i < n; ++i) {
        LabeledImage item;
        item.image = oracles::random_rgb(18, 18, seed + static_cast<std::uint64_t>(i));
        item.label = i % 3;
        item.id = "img-" + std::to_string(i);
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<AugmentationGroup> all_groups() {
    return {kAllGroups.begin(), kAllGroups.end()};
}

}  // namespace

TEST_CASE("standard set copies items with self provenance") {
    auto items = make_items(5, 1);
    EvalSet set = build_standard(items);
    CHECK(set.kind == EvalKind::standard);
    REQUIRE(set.items.size() == 5);
    REQUIRE(set.provenance.size() == 5);
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        CHECK(set.items[i].image.data == items[i].image.data);
        CHECK(set.items[i].label == items[i].label);
        CHECK(set.provenance[i].source_id == items[i].id);
        CHECK_FALSE(set.provenance[i].group.has_value());
    }
}

TEST_CASE("augmented set is |groups| times larger with one item per group") {
    auto items = make_items(7, 2);
    EvalSet set = build_augmented(items, all_groups(), 99);
    CHECK(set.kind == EvalKind::augmented);
    CHECK(set.items.size() == items.size() * 10);
    REQUIRE(set.provenance.size() == set.items.size());

    std::map<std::string, std::multiset<AugmentationGroup>> per_source;
    for (const ItemProvenance& p : set.provenance) {
        REQUIRE(p.group.has_value());
        REQUIRE(p.spec.has_value());
        CHECK(p.spec->group == *p.group);
        per_source[p.source_id].insert(*p.group);
    }
    REQUIRE(per_source.size() == items.size());
    for (const auto& [id, groups] : per_source) {
        CHECK(groups.size() == 10);
        std::set<AugmentationGroup> unique(groups.begin(), groups.end());
        CHECK(unique.size() == 10);  // exactly one per group, no duplicates
    }
}

TEST_CASE("augmented set respects a reduced group list") {
    auto items = make_items(4, 3);
    std::vector<AugmentationGroup> half{AugmentationGroup::blur, AugmentationGroup::color,
                                        AugmentationGroup::weather};
    EvalSet set = build_augmented(items, half, 5);
    CHECK(set.items.size() == 12);
    for (const ItemProvenance& p : set.provenance) {
        CHECK(std::find(half.begin(), half.end(), *p.group) != half.end());
    }
}

TEST_CASE("augmented rebuilds are identical under the same seed") {
    auto items = make_items(6, 4);
    EvalSet a = build_augmented(items, all_groups(), 17);
    EvalSet b = build_augmented(items, all_groups(), 17);
    REQUIRE(a.items.size() == b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        CHECK(a.items[i].id == b.items[i].id);
        CHECK(a.items[i].image.data == b.items[i].image.data);
    }
    EvalSet c = build_augmented(items, all_groups(), 18);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        any_diff |= (a.items[i].image.data != c.items[i].image.data);
    }
    CHECK(any_diff);
}

TEST_CASE("augmented items depend on (seed, source id, group) only") {
    auto items = make_items(5, 6);
    EvalSet forward = build_augmented(items, all_groups(), 23);
    std::vector<LabeledImage> reversed(items.rbegin(), items.rend());
    EvalSet backward = build_augmented(reversed, all_groups(), 23);

    std::map<std::pair<std::string, AugmentationGroup>, const LabeledImage*> lookup;
    for (std::size_t i = 0; i < backward.items.size(); ++i) {
        lookup[{backward.provenance[i].source_id, *backward.provenance[i].group}] =
            &backward.items[i];
    }
    for (std::size_t i = 0; i < forward.items.size(); ++i) {
        auto key = std::make_pair(forward.provenance[i].source_id, *forward.provenance[i].group);
        REQUIRE(lookup.count(key) == 1);
        CHECK(forward.items[i].image.data == lookup[key]->image.data);
    }
}

TEST_CASE("augmented set keeps labels and marks item ids") {
    auto items = make_items(3, 7);
    EvalSet set = build_augmented(items, all_groups(), 8);
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        const std::string& src = set.provenance[i].source_id;
        auto match = std::find_if(items.begin(), items.end(),
                                  [&](const LabeledImage& it) { return it.id == src; });
        REQUIRE(match != items.end());
        CHECK(set.items[i].label == match->label);
        CHECK(set.items[i].id.find(src) == 0);
        CHECK(set.items[i].id.size() > src.size());  // id marks the derived item
    }
}

TEST_CASE("same-size augmented set picks one group per image") {
    auto items = make_items(9, 10);
    EvalSet set = build_augmented_small(items, all_groups(), 31);
    CHECK(set.kind == EvalKind::augmented_small);
    CHECK(set.items.size() == items.size());
    std::set<AugmentationGroup> used;
    for (const ItemProvenance& p : set.provenance) {
        REQUIRE(p.group.has_value());
        used.insert(*p.group);
    }
    CHECK(used.size() > 1);  // 9 draws over 10 groups collide into one only with ~1e-9 chance

    EvalSet again = build_augmented_small(items, all_groups(), 31);
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        CHECK(set.items[i].image.data == again.items[i].image.data);
    }
}

TEST_CASE("oracle set concatenates the test sets in order") {
    auto t0 = make_items(4, 20);
    auto t1 = make_items(3, 30);
    EvalSet set = build_oracle({t0, t1});
    CHECK(set.kind == EvalKind::oracle);
    REQUIRE(set.items.size() == 7);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(set.items[i].image.data == t0[i].image.data);
        CHECK(set.provenance[i].source_id == t0[i].id);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(set.items[4 + i].image.data == t1[i].image.data);
    }
    // ids are made unique across test sets even when sources collide
    std::set<std::string> ids;
    for (const LabeledImage& item : set.items) CHECK(ids.insert(item.id).second);
}

TEST_CASE("eval kind names") {
    CHECK(to_string(EvalKind::standard) == "standard");
    CHECK(to_string(EvalKind::augmented) == "augmented");
    CHECK(to_string(EvalKind::augmented_small) == "augmented_small");
    CHECK(to_string(EvalKind::oracle) == "oracle");
}
