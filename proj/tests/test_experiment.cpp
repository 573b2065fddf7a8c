#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shiftcraft/experiment.hpp"

using namespace shiftcraft;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / "sc_experiment_test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SynthSpec tiny_spec() {
    SynthSpec s;
    s.class_count = 2;
    s.image_size = 8;
    s.per_class_train = 2;
    s.per_class_val = 2;
    s.per_class_test = 1;
    s.seed = 5;
    return s;
}

ExperimentPlan tiny_plan(const std::string& out_dir) {
    ExperimentPlan p;
    p.synth = tiny_spec();
    p.targets = {ShiftKind::invert};
    p.variants = {TrainVariant::I, TrainVariant::S};
    p.lrs = {0.05, 0.1, 0.2};
    p.lambdas = {1.0};
    p.ws = {0.5};
    p.seeds = {1};
    p.epochs = 1;
    p.batch_images = 4;
    p.batch_btes = 2;
    p.val_kinds = {EvalKind::standard};
    p.out_dir = out_dir;
    p.threads = 2;
    return p;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("id sanitization keeps portable characters") {
    CHECK(sanitize_id("plain-id_1.png") == "plain-id_1.png");
    CHECK(sanitize_id("a/b c?") == "a_b_c_");
    CHECK(sanitize_id("") == "item");
}

TEST_CASE("labeled directories round-trip exactly") {
    SynthSpec s = tiny_spec();
    auto [train, val] = generate_source(s);
    train[0].id = "odd/id with space";
    train[1].id = "odd?id with space";  // sanitizes to the same stem
    fs::path dir = fresh_dir("roundtrip");
    write_labeled_dir(train, dir.string());
    auto back = read_labeled_dir(dir.string());
    REQUIRE(back.size() == train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        CHECK(back[i].id == train[i].id);
        CHECK(back[i].label == train[i].label);
        REQUIRE(back[i].image.data.size() == train[i].image.data.size());
        CHECK(back[i].image.data == train[i].image.data);
    }
    // colliding stems got distinct files
    CHECK(fs::exists(dir / "odd_id_with_space.png"));
    CHECK(fs::exists(dir / "odd_id_with_space-2.png"));
}

TEST_CASE("evaluation directories carry provenance columns") {
    SynthSpec s = tiny_spec();
    auto [train, val] = generate_source(s);
    EvalSet set = build_augmented(val, {kAllGroups[0], kAllGroups[1]}, 3);
    fs::path dir = fresh_dir("evaldir");
    write_eval_dir(set, dir.string());
    std::string manifest = slurp(dir / "manifest.csv");
    CHECK(manifest.rfind("id,source_id,label,group,spec,params,file\n", 0) == 0);
    CHECK(count_lines(manifest) == 1 + static_cast<int>(set.items.size()));
    // transformed rows name their group and transform
    std::istringstream in(manifest);
    std::string line;
    std::getline(in, line);
    REQUIRE(std::getline(in, line));
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    REQUIRE(fields.size() == 7);
    CHECK(fields[1] == set.provenance[0].source_id);
    CHECK(!fields[3].empty());
    CHECK(!fields[4].empty());

    auto back = read_labeled_dir(dir.string());
    REQUIRE(back.size() == set.items.size());
    // transformed pixels are off the 8-bit grid; readback is the quantized value
    REQUIRE(back[0].image.data.size() == set.items[0].image.data.size());
    for (std::size_t i = 0; i < back[0].image.data.size(); ++i) {
        const double want = std::lround(set.items[0].image.data[i] * 255.0) / 255.0;
        CHECK(back[0].image.data[i] == want);
    }
}

TEST_CASE("plans parse from config text with validation") {
    ConfigDoc doc = parse_config(
        "[data]\n"
        "classes = 3\n"
        "targets = invert, edge_only\n"
        "[train]\n"
        "variants = I, IS\n"
        "lrs = grid9\n"
        "lambdas = grid17\n"
        "ws = grid5\n"
        "seeds = 1, 2\n"
        "[protocol]\n"
        "val_kinds = standard, augmented\n"
        "[run]\n"
        "threads = 3\n");
    ExperimentPlan p = plan_from_config(doc);
    CHECK(p.synth.class_count == 3);
    CHECK(p.targets == std::vector<ShiftKind>{ShiftKind::invert, ShiftKind::edge_only});
    CHECK(p.variants == std::vector<TrainVariant>{TrainVariant::I, TrainVariant::IS});
    CHECK(p.lrs.size() == 9);
    CHECK(p.lambdas.size() == 17);
    CHECK(p.ws.size() == 5);
    CHECK(p.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(p.threads == 3);

    CHECK_THROWS_AS(plan_from_config(parse_config("[data]\nmystery = 1\n")), ConfigError);
    CHECK_THROWS_AS(plan_from_config(parse_config("[mystery]\nx = 1\n")), ConfigError);
    CHECK_THROWS_AS(plan_from_config(parse_config("[train]\nvariants = Z\n")), ConfigError);
    CHECK_THROWS_AS(plan_from_config(parse_config("[train]\nlrs = 0\n")), ConfigError);
    CHECK_THROWS_AS(plan_from_config(parse_config("[data]\nclasses = 9\n")), ConfigError);
    CHECK_THROWS_AS(plan_from_config(parse_config("[protocol]\nval_kinds = oracle\n")),
                    ConfigError);
    ExperimentPlan with_oracle = plan_from_config(
        parse_config("[protocol]\nval_kinds = oracle\nallow_oracle = true\n"));
    CHECK(with_oracle.allow_oracle);
}

TEST_CASE("plan snapshots are a config fixed point") {
    ExperimentPlan p = tiny_plan("snapshot-out");
    std::string snap = plan_snapshot(p);
    ExperimentPlan back = plan_from_config(parse_config(snap));
    CHECK(plan_snapshot(back) == snap);
}

TEST_CASE("the grid produces one record per train config, test variant, and val kind") {
    fs::path dir = fresh_dir("grid");
    ExperimentPlan p = tiny_plan(dir.string());
    RunOutcome out = run_experiment(p, "unit-test");
    // 2 variants x 3 lrs x 1 seed x 1 test variant x 1 val kind
    CHECK(out.records == 6);
    CHECK(out.manifest_hash.size() == 16);

    std::string report = slurp(dir / "report.csv");
    CHECK(count_lines(report) == 7);
    CHECK(report.rfind("manifest,train_variant,test_kind,w,lambda,lr,seed,val_kind,"
                       "val_accuracy,test_accuracy\n",
                       0) == 0);
    // every row is tied to the manifest hash
    std::istringstream in(report);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        CHECK(line.rfind(out.manifest_hash + ",", 0) == 0);
    }

    std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("manifest_hash = " + out.manifest_hash) != std::string::npos);
    CHECK(manifest.find("[train]") != std::string::npos);

    std::string corr = slurp(dir / "correlation.csv");
    CHECK(corr.rfind("val_kind,spearman_rho,n_points\n", 0) == 0);
    CHECK(corr.find("standard,") != std::string::npos);
    CHECK(corr.find(",6\n") != std::string::npos);

    std::string sel = slurp(dir / "selection.txt");
    CHECK(sel.find("manifest = " + out.manifest_hash) != std::string::npos);
    CHECK(sel.find("[standard]") != std::string::npos);
    CHECK(sel.find("chosen = variant=") != std::string::npos);
    CHECK(sel.find("runner_ups = 5") != std::string::npos);
}

TEST_CASE("reruns and resumes reproduce the report byte for byte") {
    fs::path dir = fresh_dir("resume");
    ExperimentPlan p = tiny_plan(dir.string());
    run_experiment(p, "unit-test");
    std::string first = slurp(dir / "report.csv");

    // full rerun recomputes nothing and changes nothing
    RunOutcome again = run_experiment(p, "unit-test");
    CHECK(again.records == 6);
    CHECK(slurp(dir / "report.csv") == first);

    // truncate the journal to 2 finished records and resume
    std::istringstream in(first);
    std::string line, partial;
    for (int i = 0; i < 3 && std::getline(in, line); ++i) partial += line + "\n";
    {
        std::ofstream out(dir / "report.csv", std::ios::trunc);
        out << partial;
    }
    run_experiment(p, "unit-test");
    CHECK(slurp(dir / "report.csv") == first);
}

TEST_CASE("stale rows from an older plan are recomputed, not reused") {
    fs::path dir = fresh_dir("stale");
    ExperimentPlan p = tiny_plan(dir.string());
    RunOutcome first = run_experiment(p, "unit-test");

    ExperimentPlan changed = p;
    changed.epochs = 2;
    RunOutcome second = run_experiment(changed, "unit-test");
    CHECK(second.manifest_hash != first.manifest_hash);
    std::string report = slurp(dir / "report.csv");
    CHECK(report.find(first.manifest_hash) == std::string::npos);
    CHECK(count_lines(report) == 7);
}

TEST_CASE("an empty grid axis is rejected") {
    ExperimentPlan p = tiny_plan("never-used");
    p.lrs.clear();
    CHECK_THROWS_AS(run_experiment(p, "unit-test"), std::invalid_argument);
}
