#include "shiftcraft/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shiftcraft/augment.hpp"
#include "shiftcraft/bte.hpp"
#include "shiftcraft/config.hpp"
#include "shiftcraft/experiment.hpp"
#include "shiftcraft/imageio.hpp"
#include "shiftcraft/rng.hpp"
#include "shiftcraft/synthdata.hpp"
#include "shiftcraft/valset.hpp"

namespace fs = std::filesystem;

namespace shiftcraft {
namespace {

std::string fmt_g(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
}

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

int cmd_bte_extract(const std::string& in_dir, const std::string& out_dir, bool random,
                    std::uint64_t seed, double sigma, const std::string& method_name) {
    auto method = threshold_method_from_string(method_name);
    if (!method) {
        std::cerr << "error: unknown threshold method '" << method_name << "'\n";
        return exit_usage;
    }
    if (!fs::is_directory(in_dir)) {
        std::cerr << "error: input directory not readable: " << in_dir << "\n";
        return exit_io;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    fs::create_directories(out_dir);
    std::ofstream prov(fs::path(out_dir) / "provenance.csv", std::ios::trunc);
    if (!prov) throw std::runtime_error("cannot write provenance.csv in " + out_dir);
    prov << "file,sigma,method,threshold_noise,bound_noise_low,bound_noise_high\n";
    if (files.empty()) {
        std::cerr << "warning: no images found in " << in_dir << "\n";
        return exit_ok;
    }

    bool any_failed = false;
    for (const fs::path& f : files) {
        const std::string name = f.filename().string();
        try {
            Image img = read_image(f.string());
            BteParams used;
            BinaryMap bte;
            if (random) {
                RandomStream rng(derive_seed(seed, {hash_str(name)}));
                bte = extract_bte_random(img, BteRandomPolicy{}, rng, &used);
            } else {
                used.sigma = sigma;
                used.method = *method;
                bte = extract_bte(img, used);
            }
            write_image(bte, (fs::path(out_dir) / (f.stem().string() + ".png")).string());
            prov << name << ',' << fmt_g(used.sigma) << ',' << to_string(used.method) << ','
                 << fmt_g(used.threshold_noise) << ',' << fmt_g(used.bound_noise_low) << ','
                 << fmt_g(used.bound_noise_high) << "\n";
        } catch (const std::exception& e) {
            std::cerr << "error: " << name << ": " << e.what() << "\n";
            any_failed = true;
        }
    }
    if (!prov) throw std::runtime_error("failed writing provenance.csv in " + out_dir);
    return any_failed ? exit_io : exit_ok;
}

int cmd_valset_build(const std::string& in_dir, const std::string& out_dir,
                     const std::string& kind_name, const std::string& groups_csv,
                     std::uint64_t seed) {
    EvalKind kind;
    if (kind_name == "standard") {
        kind = EvalKind::standard;
    } else if (kind_name == "augmented") {
        kind = EvalKind::augmented;
    } else if (kind_name == "augmented-small" || kind_name == "augmented_small") {
        kind = EvalKind::augmented_small;
    } else {
        std::cerr << "error: unknown kind '" << kind_name << "'\n";
        return exit_usage;
    }
    std::vector<AugmentationGroup> groups;
    if (kind != EvalKind::standard) {
        if (groups_csv.empty()) {
            std::cerr << "error: --groups is required for kind " << kind_name << "\n";
            return exit_usage;
        }
        if (groups_csv == "all") {
            groups.assign(kAllGroups.begin(), kAllGroups.end());
        } else {
            for (const auto& tok : split_list(groups_csv)) {
                auto g = group_from_string(tok);
                if (!g) {
                    std::cerr << "error: unknown augmentation group '" << tok << "'\n";
                    return exit_usage;
                }
                groups.push_back(*g);
            }
        }
    }
    std::vector<LabeledImage> items = read_labeled_dir(in_dir);
    EvalSet set;
    switch (kind) {
        case EvalKind::standard:
            set = build_standard(items);
            break;
        case EvalKind::augmented:
            set = build_augmented(items, groups, seed);
            break;
        default:
            set = build_augmented_small(items, groups, seed);
            break;
    }
    write_eval_dir(set, out_dir);
    std::cout << "wrote " << set.items.size() << " items to " << out_dir << "\n";
    return exit_ok;
}

int cmd_synth_generate(const std::string& out_dir, const SynthSpec& spec,
                       const std::string& targets_csv) {
    std::vector<ShiftKind> targets;
    for (const auto& tok : split_list(targets_csv)) {
        auto s = shift_from_string(tok);
        if (!s) {
            std::cerr << "error: unknown target shift '" << tok << "'\n";
            return exit_usage;
        }
        targets.push_back(*s);
    }
    auto [train, val] = generate_source(spec);
    write_labeled_dir(train, (fs::path(out_dir) / "train").string());
    write_labeled_dir(val, (fs::path(out_dir) / "val").string());
    std::cout << "train: " << train.size() << " images, val: " << val.size() << " images\n";
    for (ShiftKind shift : targets) {
        auto t = generate_target(spec, shift);
        std::string name = std::string("target-") + std::string(to_string(shift));
        write_labeled_dir(t, (fs::path(out_dir) / name).string());
        std::cout << name << ": " << t.size() << " images\n";
    }
    return exit_ok;
}

int cmd_augment_list() {
    AugmentationGroup last = AugmentationGroup::arithmetic;
    bool first = true;
    for (const SpecTemplate& t : registry()) {
        if (first || t.group != last) {
            std::cout << "group: " << to_string(t.group) << "\n";
            last = t.group;
            first = false;
        }
        std::cout << "  " << t.name;
        for (const ParamRange& p : t.params) {
            std::cout << "  " << p.name << " in [" << fmt_g(p.lo) << ", " << fmt_g(p.hi) << "]";
        }
        std::cout << "\n";
    }
    return exit_ok;
}

// One sampled transform per group, tiled 5 x 2 on a light canvas.
int cmd_augment_preview(const std::string& in_file, const std::string& out_file,
                        std::uint64_t seed) {
    Image src = read_image(in_file);
    const int gap = 2, cols = 5;
    const int rows = (static_cast<int>(kAllGroups.size()) + cols - 1) / cols;
    Image sheet(cols * src.width + (cols - 1) * gap, rows * src.height + (rows - 1) * gap, 3);
    std::fill(sheet.data.begin(), sheet.data.end(), 0.9);
    for (size_t gi = 0; gi < kAllGroups.size(); ++gi) {
        AugmentationGroup g = kAllGroups[gi];
        RandomStream rng(derive_seed(seed, {hash_str(to_string(g))}));
        auto tmpls = templates_for(g);
        const SpecTemplate* t = tmpls[rng.uniform_int(static_cast<int>(tmpls.size()))];
        AugmentationSpec spec = sample_spec(*t, rng);
        Image cell = apply_extra(src, spec, rng);
        const int cx = (static_cast<int>(gi) % cols) * (src.width + gap);
        const int cy = (static_cast<int>(gi) / cols) * (src.height + gap);
        for (int y = 0; y < cell.height; ++y) {
            for (int x = 0; x < cell.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    double v = cell.channels == 3 ? cell.at(x, y, c) : cell.at(x, y, 0);
                    sheet.at(cx + x, cy + y, c) = v;
                }
            }
        }
    }
    write_image(sheet, out_file);
    std::cout << "wrote " << out_file << "\n";
    return exit_ok;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    ConfigDoc doc = parse_config_file(config_path);
    ExperimentPlan plan = plan_from_config(doc);
    if (!out_override.empty()) plan.out_dir = out_override;
    RunOutcome oc = run_experiment(plan, config_path);
    std::cout << "manifest " << oc.manifest_hash << ": " << oc.records << " records in "
              << plan.out_dir << "\n";
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"binary-thin-edge shape extraction, grouped augmentation, and "
                 "validation-driven selection toolkit"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    auto* bte = app.add_subcommand("bte", "edge-map operations");
    bte->require_subcommand(1);
    auto* extract = bte->add_subcommand("extract", "extract binary thin edges per image");
    std::string bte_in, bte_out, bte_method = "otsu";
    bool bte_random = false;
    std::uint64_t bte_seed = 0;
    double bte_sigma = 1.0;
    extract->add_option("--in", bte_in, "input directory of PNG/PGM images")->required();
    extract->add_option("--out", bte_out, "output directory")->required();
    extract->add_flag("--random", bte_random, "sample sigma/method/noise per image");
    extract->add_option("--seed", bte_seed, "seed for --random");
    extract->add_option("--sigma", bte_sigma, "blur sigma (deterministic mode)");
    extract->add_option("--method", bte_method, "threshold method (deterministic mode)");

    auto* valset = app.add_subcommand("valset", "validation-set construction");
    valset->require_subcommand(1);
    auto* vbuild = valset->add_subcommand("build", "materialize a validation set");
    std::string vs_in, vs_out, vs_kind, vs_groups;
    std::uint64_t vs_seed = 0;
    vbuild->add_option("--in", vs_in, "labeled input directory (manifest.csv)")->required();
    vbuild->add_option("--out", vs_out, "output directory")->required();
    vbuild->add_option("--kind", vs_kind, "standard | augmented | augmented-small")->required();
    vbuild->add_option("--groups", vs_groups, "comma-separated group names, or 'all'");
    vbuild->add_option("--seed", vs_seed, "construction seed");

    auto* synth = app.add_subcommand("synth", "synthetic dataset generation");
    synth->require_subcommand(1);
    auto* sgen = synth->add_subcommand("generate", "write train/val/target directories");
    std::string sy_out, sy_targets = "invert, heavy_noise, edge_only, color_jitter";
    SynthSpec sy_spec;
    sgen->add_option("--out", sy_out, "output directory")->required();
    sgen->add_option("--classes", sy_spec.class_count, "number of classes (2-7)");
    sgen->add_option("--size", sy_spec.image_size, "image side length");
    sgen->add_option("--per-class-train", sy_spec.per_class_train, "training images per class");
    sgen->add_option("--per-class-val", sy_spec.per_class_val, "validation images per class");
    sgen->add_option("--per-class-test", sy_spec.per_class_test, "test images per class");
    sgen->add_option("--texture-strength", sy_spec.texture_strength, "texture cue strength [0,1]");
    sgen->add_option("--seed", sy_spec.seed, "master seed");
    sgen->add_option("--texture-seed", sy_spec.texture_seed, "texture stream seed (0 = master)");
    sgen->add_option("--targets", sy_targets, "comma-separated shift names");

    auto* augment = app.add_subcommand("augment", "augmentation registry utilities");
    augment->require_subcommand(1);
    auto* alist = augment->add_subcommand("list", "print the registry");
    std::string ap_in, ap_out;
    std::uint64_t ap_seed = 0;
    auto* apreview = augment->add_subcommand("preview", "contact sheet of one sample per group");
    apreview->add_option("--in", ap_in, "input image file")->required();
    apreview->add_option("--out", ap_out, "output PNG file")->required();
    apreview->add_option("--seed", ap_seed, "sampling seed");

    auto* run = app.add_subcommand("run", "execute an experiment grid from a config file");
    std::string run_config, run_out;
    run->add_option("--config", run_config, "config file path")->required();
    run->add_option("--out", run_out, "override [run] out_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    if (extract->parsed()) {
        return guarded([&] {
            return cmd_bte_extract(bte_in, bte_out, bte_random, bte_seed, bte_sigma, bte_method);
        });
    }
    if (vbuild->parsed()) {
        return guarded([&] { return cmd_valset_build(vs_in, vs_out, vs_kind, vs_groups, vs_seed); });
    }
    if (sgen->parsed()) {
        return guarded([&] { return cmd_synth_generate(sy_out, sy_spec, sy_targets); });
    }
    if (alist->parsed()) return guarded([&] { return cmd_augment_list(); });
    if (apreview->parsed()) {
        return guarded([&] { return cmd_augment_preview(ap_in, ap_out, ap_seed); });
    }
    if (run->parsed()) return guarded([&] { return cmd_run(run_config, run_out); });
    return exit_usage;
}

}  // namespace shiftcraft
