#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "shiftcraft/synthdata.hpp"

using namespace shiftcraft;

namespace {

SynthSpec small_spec() {
    SynthSpec s;
    s.class_count = 7;
    s.image_size = 16;
    s.per_class_train = 3;
    s.per_class_val = 2;
    s.per_class_test = 2;
    s.texture_strength = 0.8;
    s.seed = 11;
    return s;
}

bool same_pixels(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.channels == b.channels &&
           a.data == b.data;
}

bool on_8bit_grid(const Image& img) {
    for (double v : img.data) {
        if (v < 0.0 || v > 1.0) return false;
        if (std::abs(v * 255.0 - std::lround(v * 255.0)) > 1e-9) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("generation is deterministic for fixed parameters") {
    SynthSpec s = small_spec();
    auto [train_a, val_a] = generate_source(s);
    auto [train_b, val_b] = generate_source(s);
    REQUIRE(train_a.size() == train_b.size());
    for (std::size_t i = 0; i < train_a.size(); ++i) {
        CHECK(train_a[i].id == train_b[i].id);
        CHECK(train_a[i].label == train_b[i].label);
        CHECK(same_pixels(train_a[i].image, train_b[i].image));
    }
    REQUIRE(val_a.size() == val_b.size());
    for (std::size_t i = 0; i < val_a.size(); ++i) {
        CHECK(same_pixels(val_a[i].image, val_b[i].image));
    }

    SynthSpec other = s;
    other.seed = 12;
    auto [train_c, val_c] = generate_source(other);
    bool any_diff = false;
    for (std::size_t i = 0; i < train_a.size(); ++i) {
        if (!same_pixels(train_a[i].image, train_c[i].image)) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("split sizes, labels, and ids") {
    SynthSpec s = small_spec();
    auto [train, val] = generate_source(s);
    auto target = generate_target(s, ShiftKind::identity);
    CHECK(train.size() == 7u * 3u);
    CHECK(val.size() == 7u * 2u);
    CHECK(target.size() == 7u * 2u);

    std::vector<int> per_label(s.class_count, 0);
    std::set<std::string> ids;
    for (const auto& item : train) {
        REQUIRE(item.label >= 0);
        REQUIRE(item.label < s.class_count);
        per_label[item.label]++;
        ids.insert(item.id);
        CHECK(item.image.width == s.image_size);
        CHECK(item.image.height == s.image_size);
        CHECK(item.image.channels == 3);
    }
    for (int c = 0; c < s.class_count; ++c) CHECK(per_label[c] == 3);
    CHECK(ids.size() == train.size());

    for (const auto& item : target) {
        CHECK(item.id.rfind("identity/", 0) == 0);
    }
}

TEST_CASE("texture stream is inert at zero texture strength") {
    SynthSpec a = small_spec();
    a.texture_strength = 0.0;
    a.texture_seed = 100;
    SynthSpec b = a;
    b.texture_seed = 200;
    auto [train_a, val_a] = generate_source(a);
    auto [train_b, val_b] = generate_source(b);
    for (std::size_t i = 0; i < train_a.size(); ++i) {
        CHECK(same_pixels(train_a[i].image, train_b[i].image));
    }

    // at nonzero strength the texture seed matters
    a.texture_strength = 0.8;
    b.texture_strength = 0.8;
    auto [train_c, val_c] = generate_source(a);
    auto [train_d, val_d] = generate_source(b);
    bool any_diff = false;
    for (std::size_t i = 0; i < train_c.size(); ++i) {
        if (!same_pixels(train_c[i].image, train_d[i].image)) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("inverted target is the level-exact inversion of the identity target") {
    SynthSpec s = small_spec();
    auto identity = generate_target(s, ShiftKind::identity);
    auto inverted = generate_target(s, ShiftKind::invert);
    REQUIRE(identity.size() == inverted.size());
    for (std::size_t i = 0; i < identity.size(); ++i) {
        const Image& a = identity[i].image;
        const Image& b = inverted[i].image;
        REQUIRE(a.data.size() == b.data.size());
        for (std::size_t k = 0; k < a.data.size(); ++k) {
            const long lvl = std::lround(a.data[k] * 255.0);
            CHECK(b.data[k] == static_cast<double>(255 - lvl) / 255.0);
        }
    }
}

TEST_CASE("every shift yields quantized images in range") {
    SynthSpec s = small_spec();
    s.per_class_test = 1;
    for (ShiftKind k : {ShiftKind::identity, ShiftKind::invert, ShiftKind::heavy_noise,
                        ShiftKind::edge_only, ShiftKind::color_jitter, ShiftKind::blur_shift}) {
        auto target = generate_target(s, k);
        REQUIRE(target.size() == 7u);
        for (const auto& item : target) CHECK(on_8bit_grid(item.image));
    }
    auto [train, val] = generate_source(s);
    for (const auto& item : train) CHECK(on_8bit_grid(item.image));
}

TEST_CASE("shifts share the per-sample stream, so targets are paired") {
    SynthSpec s = small_spec();
    auto noise_a = generate_target(s, ShiftKind::heavy_noise);
    auto noise_b = generate_target(s, ShiftKind::heavy_noise);
    for (std::size_t i = 0; i < noise_a.size(); ++i) {
        CHECK(same_pixels(noise_a[i].image, noise_b[i].image));
    }
    // different shifts of the same sample keep the same suffix id
    auto jitter = generate_target(s, ShiftKind::color_jitter);
    for (std::size_t i = 0; i < noise_a.size(); ++i) {
        std::string na = noise_a[i].id.substr(noise_a[i].id.find('/') + 1);
        std::string nj = jitter[i].id.substr(jitter[i].id.find('/') + 1);
        CHECK(na == nj);
        CHECK(noise_a[i].label == jitter[i].label);
    }
}

TEST_CASE("shift names round-trip") {
    for (ShiftKind k : {ShiftKind::identity, ShiftKind::invert, ShiftKind::heavy_noise,
                        ShiftKind::edge_only, ShiftKind::color_jitter, ShiftKind::blur_shift}) {
        auto back = shift_from_string(to_string(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK_FALSE(shift_from_string("sepia").has_value());
}

TEST_CASE("spec validation") {
    SynthSpec s = small_spec();
    s.class_count = 1;
    CHECK_THROWS_AS(generate_source(s), std::invalid_argument);
    s.class_count = 8;
    CHECK_THROWS_AS(generate_source(s), std::invalid_argument);
    s = small_spec();
    s.image_size = 4;
    CHECK_THROWS_AS(generate_source(s), std::invalid_argument);
    s = small_spec();
    s.texture_strength = 1.1;
    CHECK_THROWS_AS(generate_target(s, ShiftKind::identity), std::invalid_argument);
    s = small_spec();
    s.per_class_val = 0;
    CHECK_THROWS_AS(generate_source(s), std::invalid_argument);
}

TEST_CASE("reduced class counts stay in range") {
    SynthSpec s = small_spec();
    s.class_count = 3;
    auto [train, val] = generate_source(s);
    CHECK(train.size() == 3u * 3u);
    for (const auto& item : train) CHECK(item.label < 3);
}
