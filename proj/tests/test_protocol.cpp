#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "shiftcraft/protocol.hpp"

using namespace shiftcraft;

namespace {

Prediction pred(std::vector<double> p) { return Prediction{std::move(p)}; }

std::vector<LabeledImage> toy_data(int n, std::uint64_t seed, int classes = 2) {
    std::vector<LabeledImage> out;
    for (int i = 0; i < n; ++i) {
        LabeledImage item;
        item.image = oracles::random_rgb(12, 12, seed + static_cast<std::uint64_t>(i));
        item.label = i % classes;
        item.id = "p-" + std::to_string(i);
        out.push_back(std::move(item));
    }
    return out;
}

Model zero_linear(int side, int classes) {
    Model m;
    m.arch = Architecture::linear_softmax;
    m.input_width = m.input_height = side;
    m.input_channels = 3;
    m.class_count = classes;
    m.w1.assign(static_cast<std::size_t>(classes) * m.in_dim(), 0.0);
    m.b1.assign(classes, 0.0);
    return m;
}

ExperimentRecord rec(TrainVariant v, double lr, double lambda, double acc,
                     EvalKind kind = EvalKind::standard) {
    ExperimentRecord r;
    r.train_variant = v;
    r.test_kind = TestKind::I;
    r.w = 1.0;
    r.lambda = lambda;
    r.lr = lr;
    r.seed = 1;
    r.val_kind = kind;
    r.val_accuracy = acc;
    return r;
}

}  // namespace

TEST_CASE("ensembling reduces to either branch at the endpoints") {
    Prediction pi = pred({0.2, 0.5, 0.3});
    Prediction ps = pred({0.6, 0.1, 0.3});
    Prediction at_one = ensemble_predict(pi, ps, 1.0);
    Prediction at_zero = ensemble_predict(pi, ps, 0.0);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(at_one.probs[c] - pi.probs[c]) < 1e-9);
        CHECK(std::abs(at_zero.probs[c] - ps.probs[c]) < 1e-9);
    }
}

TEST_CASE("balanced ensembling of the hand case gives exactly [0.75, 0.25]") {
    Prediction out = ensemble_predict(pred({0.5, 0.5}), pred({0.9, 0.1}), 0.5);
    CHECK(std::abs(out.probs[0] - 0.75) < 1e-12);
    CHECK(std::abs(out.probs[1] - 0.25) < 1e-12);
}

TEST_CASE("ensemble argmax ignores positive rescaling") {
    RandomStream rng(404);
    for (int trial = 0; trial < 2000; ++trial) {
        int n = 2 + rng.uniform_int(5);
        std::vector<double> a(n), b(n);
        for (double& v : a) v = rng.uniform() + 1e-6;
        for (double& v : b) v = rng.uniform() + 1e-6;
        double w = rng.uniform();
        double ca = rng.uniform(0.1, 10.0), cb = rng.uniform(0.1, 10.0);
        std::vector<double> a2 = a, b2 = b;
        for (double& v : a2) v *= ca;
        for (double& v : b2) v *= cb;
        Prediction base = ensemble_predict(pred(a), pred(b), w);
        Prediction scaled = ensemble_predict(pred(a2), pred(b2), w);
        auto argmax = [](const Prediction& p) {
            return std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin();
        };
        CHECK(argmax(base) == argmax(scaled));
    }
}

TEST_CASE("ensemble validation") {
    CHECK_THROWS_AS(ensemble_predict(pred({0.5, 0.5}), pred({1.0}), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ensemble_predict(pred({}), pred({}), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ensemble_predict(pred({0.5, 0.5}), pred({0.5, 0.5}), 1.5),
                    std::invalid_argument);
    // outputs stay normalized even for very small probabilities
    Prediction out = ensemble_predict(pred({1e-30, 1.0}), pred({0.5, 0.5}), 0.5);
    double sum = out.probs[0] + out.probs[1];
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("learning-rate grid is log-equidistant from 1e-5 to 1") {
    std::vector<double> lrs = grid_lr();
    REQUIRE(lrs.size() == 33);
    CHECK(std::abs(lrs.front() - 1e-5) < 1e-17);
    CHECK(std::abs(lrs.back() - 1.0) < 1e-12);
    double step = std::log(lrs[1]) - std::log(lrs[0]);
    for (std::size_t i = 1; i < lrs.size(); ++i) {
        CHECK(std::abs((std::log(lrs[i]) - std::log(lrs[i - 1])) - step) < 1e-12);
    }

    std::vector<double> reduced = grid_lr_reduced();
    REQUIRE(reduced.size() == 9);
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        CHECK(reduced[i] == lrs[i * 4]);
    }
}

TEST_CASE("lambda and w grids are exact") {
    std::vector<double> lambdas = grid_lambda();
    REQUIRE(lambdas.size() == 17);
    for (int j = 0; j <= 16; ++j) CHECK(lambdas[j] == j / 16.0);

    std::vector<double> ws = grid_w();
    CHECK(ws == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("group splits are complementary halves, swapped by fold") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        TcvSplit f0 = tcv_split(0, seed);
        TcvSplit f1 = tcv_split(1, seed);
        REQUIRE(f0.train_groups.size() == 5);
        REQUIRE(f0.val_groups.size() == 5);
        CHECK(f0.train_groups == f1.val_groups);
        CHECK(f0.val_groups == f1.train_groups);
        std::set<AugmentationGroup> all(f0.train_groups.begin(), f0.train_groups.end());
        all.insert(f0.val_groups.begin(), f0.val_groups.end());
        CHECK(all.size() == 10);
        CHECK(std::is_sorted(f0.train_groups.begin(), f0.train_groups.end()));
        CHECK(std::is_sorted(f0.val_groups.begin(), f0.val_groups.end()));
    }
    CHECK(tcv_split(0, 3).train_groups == tcv_split(0, 3).train_groups);
    CHECK_THROWS_AS(tcv_split(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(tcv_split(-1, 1), std::invalid_argument);
}

TEST_CASE("cross-validation averages the two folds and respects the split") {
    auto train_data = toy_data(8, 1);
    auto val_images = toy_data(4, 50);
    TrainConfig cfg;
    cfg.variant = TrainVariant::I_hat;
    cfg.epochs = 1;
    cfg.batch_images = 4;
    cfg.seed = 3;
    cfg.class_count = 2;
    cfg.basic.out_size = 12;
    cfg.allowed_groups.assign(kAllGroups.begin(), kAllGroups.end());

    TestVariant tv{TestKind::I, 1.0};
    BteParams bte;
    TcvResult res = tcv_validate(train_data, cfg, val_images, tv, 11, 22, bte);
    CHECK(res.mean_accuracy == (res.folds[0].accuracy + res.folds[1].accuracy) / 2.0);
    TcvSplit f0 = tcv_split(0, 11);
    CHECK(res.folds[0].train_groups == f0.train_groups);
    CHECK(res.folds[0].val_groups == f0.val_groups);
    CHECK(res.folds[1].train_groups == f0.val_groups);

    cfg.variant = TrainVariant::I;  // no extra augmentations to cross-validate
    cfg.allowed_groups.clear();
    CHECK_THROWS_AS(tcv_validate(train_data, cfg, val_images, tv, 11, 22, bte),
                    std::invalid_argument);
}

TEST_CASE("evaluation ties resolve to the lowest class index") {
    auto val = toy_data(6, 9, 3);  // labels 0,1,2,0,1,2
    EvalSet set = build_standard(val);
    Model m = zero_linear(12, 3);  // uniform probabilities everywhere
    double acc = evaluate(m, nullptr, set, TestVariant{TestKind::I, 1.0}, BteParams{});
    CHECK(acc == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("evaluation guards oracle sets and the two-model variant") {
    auto val = toy_data(4, 13);
    EvalSet oracle = build_oracle({val});
    Model m = zero_linear(12, 2);
    CHECK_THROWS_AS(evaluate(m, nullptr, oracle, TestVariant{TestKind::I, 1.0}, BteParams{}),
                    std::invalid_argument);
    EvalPolicy allow;
    allow.allow_oracle = true;
    CHECK(evaluate(m, nullptr, oracle, TestVariant{TestKind::I, 1.0}, BteParams{}, allow) >= 0.0);

    EvalSet set = build_standard(val);
    CHECK_THROWS_AS(evaluate(m, nullptr, set, TestVariant{TestKind::IS_x2, 0.5}, BteParams{}),
                    std::invalid_argument);
    Model shape = zero_linear(12, 2);
    CHECK(evaluate(m, &shape, set, TestVariant{TestKind::IS_x2, 0.5}, BteParams{}) >= 0.0);
}

TEST_CASE("evaluation accepts every test kind") {
    auto val = toy_data(4, 21);
    EvalSet set = build_standard(val);
    Model m = zero_linear(12, 2);
    for (TestKind k : {TestKind::I, TestKind::S, TestKind::IS}) {
        double acc = evaluate(m, nullptr, set, TestVariant{k, 0.5}, BteParams{});
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
}

TEST_CASE("selection maximizes accuracy with deterministic tie-breaks") {
    std::vector<ExperimentRecord> records;
    records.push_back(rec(TrainVariant::I, 0.3, 1.0, 0.8));
    records.push_back(rec(TrainVariant::I, 0.1, 1.0, 0.9));
    records.push_back(rec(TrainVariant::S, 0.2, 1.0, 0.7));
    SelectionReport top = select(records, EvalKind::standard);
    CHECK(top.chosen.lr == 0.1);
    CHECK(top.chosen.val_accuracy == 0.9);
    REQUIRE(top.runner_ups.size() == 2);
    CHECK(top.runner_ups[0].val_accuracy == 0.8);

    // accuracy tie -> smaller lr wins
    std::vector<ExperimentRecord> tie{rec(TrainVariant::I, 0.3, 1.0, 0.8),
                                      rec(TrainVariant::I, 0.1, 1.0, 0.8)};
    CHECK(select(tie, EvalKind::standard).chosen.lr == 0.1);

    // then smaller lambda
    std::vector<ExperimentRecord> tie2{rec(TrainVariant::IS, 0.1, 0.75, 0.8),
                                       rec(TrainVariant::IS, 0.1, 0.25, 0.8)};
    CHECK(select(tie2, EvalKind::standard).chosen.lambda == 0.25);

    // then earlier variant
    std::vector<ExperimentRecord> tie3{rec(TrainVariant::S, 0.1, 1.0, 0.8),
                                       rec(TrainVariant::I, 0.1, 1.0, 0.8)};
    CHECK(select(tie3, EvalKind::standard).chosen.train_variant == TrainVariant::I);
}

TEST_CASE("selection rejects mismatched and malformed records") {
    std::vector<ExperimentRecord> records{rec(TrainVariant::I, 0.1, 1.0, 0.9)};
    CHECK_THROWS_AS(select(records, EvalKind::augmented), std::invalid_argument);
    CHECK_THROWS_AS(select({}, EvalKind::standard), std::invalid_argument);
    std::vector<ExperimentRecord> bad{rec(TrainVariant::I, 0.1, 1.0, 1.5)};
    CHECK_THROWS_AS(select(bad, EvalKind::standard), std::invalid_argument);
}

TEST_CASE("selection refuses oracle records without the upper-bound flag") {
    std::vector<ExperimentRecord> records{
        rec(TrainVariant::I, 0.1, 1.0, 0.9, EvalKind::oracle),
        rec(TrainVariant::I, 0.3, 1.0, 0.8, EvalKind::oracle)};
    CHECK_THROWS_AS(select(records, EvalKind::oracle), std::invalid_argument);
    EvalPolicy allow;
    allow.allow_oracle = true;
    SelectionReport rep = select(records, EvalKind::oracle, allow);
    CHECK(rep.chosen.val_accuracy == 0.9);
}

TEST_CASE("average ranks share tied positions") {
    std::vector<double> r = average_ranks({10, 20, 20, 30});
    CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    std::vector<double> flat = average_ranks({5, 5, 5});
    CHECK(flat == std::vector<double>{2.0, 2.0, 2.0});
    std::vector<double> rev = average_ranks({3, 2, 1});
    CHECK(rev == std::vector<double>{3.0, 2.0, 1.0});
}

TEST_CASE("rank correlation matches the counting oracle") {
    RandomStream rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 5 + rng.uniform_int(20);
        std::vector<double> x(n), y(n);
        for (double& v : x) v = rng.uniform_int(8);  // coarse values force ties
        for (double& v : y) v = rng.uniform_int(8);
        bool cx = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
        bool cy = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
        if (cx || cy) continue;
        CHECK(std::abs(spearman(x, y) - oracles::spearman_brute(x, y)) < 1e-12);
    }
}

TEST_CASE("rank correlation hits the monotone extremes") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> up{10, 20, 30, 40, 50};
    std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(std::abs(spearman(x, up) - 1.0) < 1e-12);
    CHECK(std::abs(spearman(x, down) + 1.0) < 1e-12);
}

TEST_CASE("rank correlation rejects degenerate input") {
    CHECK_THROWS_AS(spearman({1.0}, {2.0}), std::invalid_argument);
    CHECK_THROWS_AS(spearman({1, 2, 3}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(spearman({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("test kind names round-trip") {
    for (TestKind k : {TestKind::I, TestKind::S, TestKind::IS, TestKind::IS_x2}) {
        auto back = test_kind_from_string(to_string(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK_FALSE(test_kind_from_string("ISx3").has_value());
}
