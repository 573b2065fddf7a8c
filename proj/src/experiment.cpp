#include "shiftcraft/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "shiftcraft/imageio.hpp"
#include "shiftcraft/rng.hpp"

namespace fs = std::filesystem;

namespace shiftcraft {
namespace {

// Shortest round-trip decimal form, so report rows and snapshots are exact
// and stable across reruns.
std::string fmt_g(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim_ws(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string arch_name(Architecture a) {
    return a == Architecture::linear_softmax ? "linear" : "mlp";
}

std::optional<EvalKind> eval_kind_from_string(std::string_view name) {
    if (name == "standard") return EvalKind::standard;
    if (name == "augmented") return EvalKind::augmented;
    if (name == "augmented_small" || name == "augmented-small") return EvalKind::augmented_small;
    if (name == "oracle") return EvalKind::oracle;
    return std::nullopt;
}

// Lambda only changes training for variants that mix an image and a shape
// sub-batch; for the rest one grid point stands in for the whole lambda axis.
bool lambda_matters(TrainVariant v) {
    return variant_has_shape_branch(v) && v != TrainVariant::S;
}

bool variant_supports_tcv(TrainVariant v) {
    return v == TrainVariant::I_hat || v == TrainVariant::I_hat_S ||
           v == TrainVariant::I_hat_plus_BTE;
}

std::vector<TestVariant> test_variants_for(TrainVariant v, const std::vector<double>& ws) {
    switch (v) {
        case TrainVariant::I:
        case TrainVariant::I_hat:
        case TrainVariant::I_hat_plus_BTE:
            return {TestVariant{TestKind::I, 1.0}};
        case TrainVariant::S:
            return {TestVariant{TestKind::S, 0.0}};
        case TrainVariant::IS_x2: {
            std::vector<TestVariant> out;
            for (double w : ws) out.push_back({TestKind::IS_x2, w});
            return out;
        }
        default: {
            std::vector<TestVariant> out;
            for (double w : ws) out.push_back({TestKind::IS, w});
            return out;
        }
    }
}

std::string record_key(const ExperimentRecord& r) {
    std::string s(to_string(r.train_variant));
    s += '|';
    s += to_string(r.test_kind);
    s += '|';
    s += fmt_g(r.w);
    s += '|';
    s += fmt_g(r.lambda);
    s += '|';
    s += fmt_g(r.lr);
    s += '|';
    s += std::to_string(r.seed);
    s += '|';
    s += to_string(r.val_kind);
    return s;
}

bool record_order(const ExperimentRecord& a, const ExperimentRecord& b) {
    auto key = [](const ExperimentRecord& r) {
        return std::make_tuple(static_cast<int>(r.train_variant), static_cast<int>(r.test_kind),
                               r.w, r.lambda, r.lr, r.seed, static_cast<int>(r.val_kind));
    };
    return key(a) < key(b);
}

std::string record_row(const std::string& hash, const ExperimentRecord& r) {
    std::string s = hash;
    s += ',';
    s += to_string(r.train_variant);
    s += ',';
    s += to_string(r.test_kind);
    s += ',';
    s += fmt_g(r.w);
    s += ',';
    s += fmt_g(r.lambda);
    s += ',';
    s += fmt_g(r.lr);
    s += ',';
    s += std::to_string(r.seed);
    s += ',';
    s += to_string(r.val_kind);
    s += ',';
    s += fmt_g(r.val_accuracy);
    s += ',';
    if (r.test_accuracy) s += fmt_g(*r.test_accuracy);
    return s;
}

constexpr const char* kReportHeader =
    "manifest,train_variant,test_kind,w,lambda,lr,seed,val_kind,val_accuracy,test_accuracy";

std::optional<ExperimentRecord> parse_record_row(const std::string& line,
                                                 const std::string& hash) {
    auto f = split_csv(line);
    if (f.size() != 10 || f[0] != hash) return std::nullopt;
    ExperimentRecord r;
    auto tv = variant_from_string(f[1]);
    auto tk = test_kind_from_string(f[2]);
    auto vk = eval_kind_from_string(f[7]);
    if (!tv || !tk || !vk) return std::nullopt;
    r.train_variant = *tv;
    r.test_kind = *tk;
    r.val_kind = *vk;
    try {
        r.w = std::stod(f[3]);
        r.lambda = std::stod(f[4]);
        r.lr = std::stod(f[5]);
        r.seed = std::stoull(f[6]);
        r.val_accuracy = std::stod(f[8]);
        if (!f[9].empty()) r.test_accuracy = std::stod(f[9]);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return r;
}

double tok_double(const std::string& tok, const ConfigDoc::Entry& e) {
    const char* b = tok.data();
    const char* end = b + tok.size();
    double v = 0.0;
    auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config: bad number '" + tok + "'", e.line, e.column);
    }
    return v;
}

std::uint64_t tok_u64(const std::string& tok, const ConfigDoc::Entry& e) {
    const char* b = tok.data();
    const char* end = b + tok.size();
    std::uint64_t v = 0;
    auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config: bad unsigned integer '" + tok + "'", e.line, e.column);
    }
    return v;
}

std::vector<double> parse_doubles(const ConfigDoc::Entry& e) {
    std::vector<double> out;
    for (const auto& tok : split_list(e.value)) out.push_back(tok_double(tok, e));
    if (out.empty()) throw ConfigError("config: empty list for " + e.key, e.line, e.column);
    return out;
}

}  // namespace

std::string sanitize_id(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    if (out.empty()) out = "item";
    return out;
}

namespace {

// Writer and reader run this over rows in the same order, so file names stay
// derivable even when sanitization collides.
std::string unique_stem(const std::string& id, std::set<std::string>& used) {
    std::string stem = sanitize_id(id);
    if (used.insert(stem).second) return stem;
    for (int k = 2;; ++k) {
        std::string cand = stem + "-" + std::to_string(k);
        if (used.insert(cand).second) return cand;
    }
}

std::string spec_params_text(const AugmentationSpec& spec) {
    std::string s;
    for (size_t i = 0; i < spec.params.size(); ++i) {
        if (i) s += ';';
        s += spec.params[i].first;
        s += '=';
        s += fmt_g(spec.params[i].second);
    }
    return s;
}

void write_manifest_rows(const std::vector<LabeledImage>& items,
                         const std::vector<ItemProvenance>* prov, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream man(fs::path(dir) / "manifest.csv", std::ios::trunc);
    if (!man) throw std::runtime_error("cannot write manifest in " + dir);
    man << "id,source_id,label,group,spec,params,file\n";
    std::set<std::string> used;
    for (size_t i = 0; i < items.size(); ++i) {
        const LabeledImage& it = items[i];
        std::string stem = unique_stem(it.id, used);
        std::string file = stem + ".png";
        write_image(it.image, (fs::path(dir) / file).string());
        std::string source = it.id, group, spec, params;
        if (prov) {
            const ItemProvenance& p = (*prov)[i];
            source = p.source_id;
            if (p.group) group = to_string(*p.group);
            if (p.spec) {
                spec = p.spec->name;
                params = spec_params_text(*p.spec);
            }
        }
        man << it.id << ',' << source << ',' << it.label << ',' << group << ',' << spec << ','
            << params << ',' << file << '\n';
    }
    if (!man) throw std::runtime_error("failed writing manifest in " + dir);
}

}  // namespace

void write_labeled_dir(const std::vector<LabeledImage>& items, const std::string& dir) {
    write_manifest_rows(items, nullptr, dir);
}

void write_eval_dir(const EvalSet& set, const std::string& dir) {
    write_manifest_rows(set.items, &set.provenance, dir);
}

std::vector<LabeledImage> read_labeled_dir(const std::string& dir) {
    std::ifstream man(fs::path(dir) / "manifest.csv");
    if (!man) throw std::runtime_error("cannot open manifest in " + dir);
    std::string line;
    if (!std::getline(man, line)) throw std::runtime_error("empty manifest in " + dir);
    std::vector<LabeledImage> out;
    while (std::getline(man, line)) {
        if (trim_ws(line).empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 7) throw std::runtime_error("malformed manifest row in " + dir);
        LabeledImage item;
        item.id = f[0];
        try {
            item.label = std::stoi(f[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("bad label in manifest row of " + dir);
        }
        item.image = read_image((fs::path(dir) / f[6]).string());
        out.push_back(std::move(item));
    }
    return out;
}

ExperimentPlan plan_from_config(const ConfigDoc& doc) {
    ExperimentPlan p;
    const ConfigDoc::Entry* val_kinds_entry = nullptr;
    for (const auto& e : doc.entries) {
        auto bad = [&](const std::string& msg) -> void {
            throw ConfigError("config: " + msg, e.line, e.column);
        };
        if (e.section == "data") {
            if (e.key == "classes") {
                p.synth.class_count = entry_int(e);
                if (p.synth.class_count < 2 || p.synth.class_count > 7) {
                    bad("classes must be in [2, 7]");
                }
            } else if (e.key == "image_size") {
                p.synth.image_size = entry_int(e);
                if (p.synth.image_size < 8) bad("image_size must be >= 8");
            } else if (e.key == "per_class_train") {
                p.synth.per_class_train = entry_int(e);
                if (p.synth.per_class_train < 1) bad("per_class_train must be >= 1");
            } else if (e.key == "per_class_val") {
                p.synth.per_class_val = entry_int(e);
                if (p.synth.per_class_val < 1) bad("per_class_val must be >= 1");
            } else if (e.key == "per_class_test") {
                p.synth.per_class_test = entry_int(e);
                if (p.synth.per_class_test < 1) bad("per_class_test must be >= 1");
            } else if (e.key == "texture_strength") {
                p.synth.texture_strength = entry_double(e);
                if (p.synth.texture_strength < 0.0 || p.synth.texture_strength > 1.0) {
                    bad("texture_strength must be in [0, 1]");
                }
            } else if (e.key == "texture_seed") {
                p.synth.texture_seed = entry_u64(e);
            } else if (e.key == "targets") {
                p.targets.clear();
                for (const auto& tok : split_list(e.value)) {
                    auto s = shift_from_string(tok);
                    if (!s) bad("unknown target shift '" + tok + "'");
                    p.targets.push_back(*s);
                }
                if (p.targets.empty()) bad("targets must be nonempty");
            } else {
                bad("unknown key '" + e.key + "' in [data]");
            }
        } else if (e.section == "train") {
            if (e.key == "variants") {
                p.variants.clear();
                for (const auto& tok : split_list(e.value)) {
                    auto v = variant_from_string(tok);
                    if (!v) bad("unknown variant '" + tok + "'");
                    p.variants.push_back(*v);
                }
                if (p.variants.empty()) bad("variants must be nonempty");
            } else if (e.key == "lrs") {
                if (e.value == "grid33") {
                    p.lrs = grid_lr();
                } else if (e.value == "grid9") {
                    p.lrs = grid_lr_reduced();
                } else {
                    p.lrs = parse_doubles(e);
                }
                for (double v : p.lrs) {
                    if (v <= 0.0) bad("lrs must be positive");
                }
            } else if (e.key == "lambdas") {
                p.lambdas = e.value == "grid17" ? grid_lambda() : parse_doubles(e);
                for (double v : p.lambdas) {
                    if (v < 0.0 || v > 1.0) bad("lambdas must be in [0, 1]");
                }
            } else if (e.key == "ws") {
                p.ws = e.value == "grid5" ? grid_w() : parse_doubles(e);
                for (double v : p.ws) {
                    if (v < 0.0 || v > 1.0) bad("ws must be in [0, 1]");
                }
            } else if (e.key == "seeds") {
                p.seeds.clear();
                for (const auto& tok : split_list(e.value)) p.seeds.push_back(tok_u64(tok, e));
                if (p.seeds.empty()) bad("seeds must be nonempty");
            } else if (e.key == "epochs") {
                p.epochs = entry_int(e);
                if (p.epochs < 1) bad("epochs must be >= 1");
            } else if (e.key == "batch_images") {
                p.batch_images = entry_int(e);
                if (p.batch_images < 1) bad("batch_images must be >= 1");
            } else if (e.key == "batch_btes") {
                p.batch_btes = entry_int(e);
                if (p.batch_btes < 0) bad("batch_btes must be >= 0");
            } else if (e.key == "extra_prob") {
                p.extra_prob = entry_double(e);
                if (p.extra_prob < 0.0 || p.extra_prob > 1.0) bad("extra_prob must be in [0, 1]");
            } else if (e.key == "arch") {
                if (e.value == "linear") {
                    p.arch = Architecture::linear_softmax;
                } else if (e.value == "mlp") {
                    p.arch = Architecture::mlp;
                } else {
                    bad("arch must be linear or mlp");
                }
            } else if (e.key == "hidden") {
                p.hidden = entry_int(e);
                if (p.hidden < 1) bad("hidden must be >= 1");
            } else {
                bad("unknown key '" + e.key + "' in [train]");
            }
        } else if (e.section == "protocol") {
            if (e.key == "val_kinds") {
                val_kinds_entry = &e;
                p.val_kinds.clear();
                for (const auto& tok : split_list(e.value)) {
                    auto k = eval_kind_from_string(tok);
                    if (!k) bad("unknown validation kind '" + tok + "'");
                    p.val_kinds.push_back(*k);
                }
                if (p.val_kinds.empty()) bad("val_kinds must be nonempty");
            } else if (e.key == "use_tcv") {
                p.use_tcv = entry_bool(e);
            } else if (e.key == "allow_oracle") {
                p.allow_oracle = entry_bool(e);
            } else if (e.key == "valset_seed") {
                p.valset_seed = entry_u64(e);
            } else if (e.key == "tcv_split_seed") {
                p.tcv_split_seed = entry_u64(e);
            } else {
                bad("unknown key '" + e.key + "' in [protocol]");
            }
        } else if (e.section == "run") {
            if (e.key == "out_dir") {
                if (e.value.empty()) bad("out_dir must be nonempty");
                p.out_dir = e.value;
            } else if (e.key == "threads") {
                p.threads = entry_int(e);
                if (p.threads < 0) bad("threads must be >= 0");
            } else {
                bad("unknown key '" + e.key + "' in [run]");
            }
        } else {
            bad("unknown section [" + e.section + "]");
        }
    }
    bool wants_oracle =
        std::find(p.val_kinds.begin(), p.val_kinds.end(), EvalKind::oracle) != p.val_kinds.end();
    if (wants_oracle && !p.allow_oracle) {
        const ConfigDoc::Entry* e = val_kinds_entry;
        throw ConfigError("config: oracle validation requires allow_oracle = true",
                          e ? e->line : 0, e ? e->column : 0);
    }
    return p;
}

std::string plan_snapshot(const ExperimentPlan& plan) {
    std::ostringstream os;
    auto list_d = [&](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += fmt_g(v[i]);
        }
        return s;
    };
    os << "[data]\n";
    os << "classes = " << plan.synth.class_count << "\n";
    os << "image_size = " << plan.synth.image_size << "\n";
    os << "per_class_train = " << plan.synth.per_class_train << "\n";
    os << "per_class_val = " << plan.synth.per_class_val << "\n";
    os << "per_class_test = " << plan.synth.per_class_test << "\n";
    os << "texture_strength = " << fmt_g(plan.synth.texture_strength) << "\n";
    os << "texture_seed = " << plan.synth.texture_seed << "\n";
    os << "targets = ";
    for (size_t i = 0; i < plan.targets.size(); ++i) {
        os << (i ? ", " : "") << to_string(plan.targets[i]);
    }
    os << "\n\n[train]\n";
    os << "variants = ";
    for (size_t i = 0; i < plan.variants.size(); ++i) {
        os << (i ? ", " : "") << to_string(plan.variants[i]);
    }
    os << "\n";
    os << "lrs = " << list_d(plan.lrs) << "\n";
    os << "lambdas = " << list_d(plan.lambdas) << "\n";
    os << "ws = " << list_d(plan.ws) << "\n";
    os << "seeds = ";
    for (size_t i = 0; i < plan.seeds.size(); ++i) os << (i ? ", " : "") << plan.seeds[i];
    os << "\n";
    os << "epochs = " << plan.epochs << "\n";
    os << "batch_images = " << plan.batch_images << "\n";
    os << "batch_btes = " << plan.batch_btes << "\n";
    os << "extra_prob = " << fmt_g(plan.extra_prob) << "\n";
    os << "arch = " << arch_name(plan.arch) << "\n";
    os << "hidden = " << plan.hidden << "\n";
    os << "\n[protocol]\n";
    os << "val_kinds = ";
    for (size_t i = 0; i < plan.val_kinds.size(); ++i) {
        os << (i ? ", " : "") << to_string(plan.val_kinds[i]);
    }
    os << "\n";
    os << "use_tcv = " << (plan.use_tcv ? "true" : "false") << "\n";
    os << "allow_oracle = " << (plan.allow_oracle ? "true" : "false") << "\n";
    os << "valset_seed = " << plan.valset_seed << "\n";
    os << "tcv_split_seed = " << plan.tcv_split_seed << "\n";
    os << "\n[run]\n";
    os << "out_dir = " << plan.out_dir << "\n";
    os << "threads = " << plan.threads << "\n";
    return os.str();
}

namespace {

struct SeedData {
    std::vector<LabeledImage> train, val;
    std::vector<std::vector<LabeledImage>> targets;
    std::vector<EvalSet> target_sets;        // one standard set per target shift
    std::map<EvalKind, EvalSet> val_sets;    // one per requested validation kind
};

SeedData build_seed_data(const ExperimentPlan& plan, std::uint64_t seed) {
    SynthSpec sp = plan.synth;
    sp.seed = seed;
    SeedData d;
    auto src = generate_source(sp);
    d.train = std::move(src.first);
    d.val = std::move(src.second);
    for (ShiftKind shift : plan.targets) d.targets.push_back(generate_target(sp, shift));
    for (const auto& t : d.targets) d.target_sets.push_back(build_standard(t));
    std::vector<AugmentationGroup> groups(kAllGroups.begin(), kAllGroups.end());
    std::uint64_t vseed = derive_seed(seed, {hash_str("valset"), plan.valset_seed});
    for (EvalKind kind : plan.val_kinds) {
        if (d.val_sets.count(kind)) continue;
        switch (kind) {
            case EvalKind::standard:
                d.val_sets.emplace(kind, build_standard(d.val));
                break;
            case EvalKind::augmented:
                d.val_sets.emplace(kind, build_augmented(d.val, groups, vseed));
                break;
            case EvalKind::augmented_small:
                d.val_sets.emplace(kind, build_augmented_small(d.val, groups, vseed));
                break;
            case EvalKind::oracle:
                d.val_sets.emplace(kind, build_oracle(d.targets));
                break;
        }
    }
    return d;
}

struct TrainJob {
    std::uint64_t seed = 0;
    TrainVariant variant = TrainVariant::I;
    double lr = 0.1, lambda = 1.0;
    std::vector<ExperimentRecord> pending;
};

TrainConfig job_config(const ExperimentPlan& plan, const TrainJob& job) {
    TrainConfig cfg;
    cfg.variant = job.variant;
    cfg.lambda = job.lambda;
    cfg.lr = job.lr;
    cfg.epochs = plan.epochs;
    cfg.seed = derive_seed(job.seed, {hash_str("train")});
    cfg.extra_prob = plan.extra_prob;
    cfg.arch = plan.arch;
    cfg.hidden = plan.hidden;
    cfg.class_count = plan.synth.class_count;
    cfg.basic.out_size = plan.synth.image_size;
    if (job.variant == TrainVariant::S) {
        cfg.batch_images = 0;
        cfg.batch_btes = plan.batch_btes;
    } else if (variant_has_shape_branch(job.variant)) {
        cfg.batch_images = plan.batch_images;
        cfg.batch_btes = plan.batch_btes;
    } else {
        cfg.batch_images = plan.batch_images;
        cfg.batch_btes = 0;
    }
    if (variant_has_extra_augs(job.variant) || job.variant == TrainVariant::I_hat_plus_BTE) {
        cfg.allowed_groups.assign(kAllGroups.begin(), kAllGroups.end());
    }
    return cfg;
}

std::vector<ExperimentRecord> run_job(const ExperimentPlan& plan, const TrainJob& job,
                                      const SeedData& data) {
    TrainConfig cfg = job_config(plan, job);
    TrainResult tr = train(data.train, cfg);
    const Model* shape = tr.shape_model ? &*tr.shape_model : nullptr;
    BteParams test_bte;  // deterministic defaults for evaluation-time edge maps
    EvalPolicy policy{plan.allow_oracle};

    // Target accuracy depends only on the test variant, not the validation
    // kind; cache it across the job's records.
    std::map<std::pair<int, double>, double> target_acc;
    auto test_accuracy = [&](const TestVariant& tv) {
        auto key = std::make_pair(static_cast<int>(tv.kind), tv.w);
        auto it = target_acc.find(key);
        if (it != target_acc.end()) return it->second;
        double sum = 0.0;
        for (const EvalSet& t : data.target_sets) {
            sum += evaluate(tr.model, shape, t, tv, test_bte, policy);
        }
        double acc = sum / static_cast<double>(data.target_sets.size());
        target_acc.emplace(key, acc);
        return acc;
    };

    std::vector<ExperimentRecord> out = job.pending;
    for (ExperimentRecord& r : out) {
        TestVariant tv{r.test_kind, r.w};
        if (plan.use_tcv && r.val_kind == EvalKind::augmented &&
            variant_supports_tcv(job.variant)) {
            TcvResult tcv = tcv_validate(data.train, cfg, data.val, tv, plan.tcv_split_seed,
                                         derive_seed(job.seed, {hash_str("tcv-valset")}),
                                         test_bte);
            r.val_accuracy = tcv.mean_accuracy;
        } else {
            r.val_accuracy = evaluate(tr.model, shape, data.val_sets.at(r.val_kind), tv,
                                      test_bte, policy);
        }
        r.test_accuracy = test_accuracy(tv);
        if (!std::isfinite(r.val_accuracy) || !std::isfinite(*r.test_accuracy)) {
            throw NumericError("experiment: non-finite accuracy for " + record_key(r));
        }
    }
    return out;
}

int resolve_threads(const ExperimentPlan& plan) {
    if (const char* env = std::getenv("SHIFTCRAFT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    if (plan.threads > 0) return plan.threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

RunOutcome run_experiment(const ExperimentPlan& plan, const std::string& config_path) {
    if (plan.variants.empty() || plan.lrs.empty() || plan.lambdas.empty() || plan.ws.empty() ||
        plan.seeds.empty() || plan.targets.empty() || plan.val_kinds.empty()) {
        throw std::invalid_argument("experiment: plan has an empty grid axis");
    }
    const std::string snapshot = plan_snapshot(plan);
    char hash_buf[20];
    std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                  static_cast<unsigned long long>(hash_str(snapshot)));
    const std::string hash = hash_buf;

    fs::create_directories(plan.out_dir);
    const fs::path out(plan.out_dir);
    const int threads = resolve_threads(plan);

    // The manifest lands on disk before any computation so every later row
    // can be tied back to the exact resolved settings.
    {
        std::ofstream man(out / "manifest.txt", std::ios::trunc);
        if (!man) throw std::runtime_error("cannot write manifest.txt in " + plan.out_dir);
        man << "tool_version = " << kToolVersion << "\n";
        man << "config_path = " << config_path << "\n";
        man << "manifest_hash = " << hash << "\n";
        man << "threads = " << threads << "\n\n";
        man << snapshot;
        if (!man) throw std::runtime_error("failed writing manifest.txt in " + plan.out_dir);
    }

    // Resume: rows journaled under the same manifest hash are kept; anything
    // else (stale config, torn line) is recomputed.
    const fs::path report_path = out / "report.csv";
    std::map<std::string, ExperimentRecord> done;
    if (fs::exists(report_path)) {
        std::ifstream in(report_path);
        std::string line;
        while (std::getline(in, line)) {
            line = trim_ws(line);
            if (line.empty() || line == kReportHeader) continue;
            if (auto r = parse_record_row(line, hash)) done.emplace(record_key(*r), *r);
        }
    }

    std::vector<TrainJob> jobs;
    int planned = 0;
    for (std::uint64_t seed : plan.seeds) {
        for (TrainVariant variant : plan.variants) {
            const auto tvs = test_variants_for(variant, plan.ws);
            const size_t n_lambdas = lambda_matters(variant) ? plan.lambdas.size() : 1;
            for (double lr : plan.lrs) {
                for (size_t li = 0; li < n_lambdas; ++li) {
                    TrainJob job;
                    job.seed = seed;
                    job.variant = variant;
                    job.lr = lr;
                    job.lambda = plan.lambdas[li];
                    for (const TestVariant& tv : tvs) {
                        for (EvalKind kind : plan.val_kinds) {
                            ExperimentRecord r;
                            r.train_variant = variant;
                            r.test_kind = tv.kind;
                            r.w = tv.w;
                            r.lambda = job.lambda;
                            r.lr = lr;
                            r.seed = seed;
                            r.val_kind = kind;
                            ++planned;
                            if (!done.count(record_key(r))) job.pending.push_back(r);
                        }
                    }
                    if (!job.pending.empty()) jobs.push_back(std::move(job));
                }
            }
        }
    }

    if (!jobs.empty()) {
        std::map<std::uint64_t, SeedData> data;
        for (const TrainJob& j : jobs) {
            if (!data.count(j.seed)) data.emplace(j.seed, build_seed_data(plan, j.seed));
        }

        std::ofstream journal(report_path, std::ios::app);
        if (!journal) throw std::runtime_error("cannot open report.csv in " + plan.out_dir);
        if (done.empty() && fs::file_size(report_path) == 0) journal << kReportHeader << "\n";

        std::atomic<size_t> next{0};
        std::mutex mu;
        std::exception_ptr first_err;
        auto worker = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (first_err) return;
                }
                try {
                    auto rows = run_job(plan, jobs[i], data.at(jobs[i].seed));
                    std::lock_guard<std::mutex> lock(mu);
                    for (const ExperimentRecord& r : rows) {
                        done.emplace(record_key(r), r);
                        journal << record_row(hash, r) << "\n";
                    }
                    journal.flush();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_err) first_err = std::current_exception();
                    return;
                }
            }
        };
        const size_t n_workers = std::min<size_t>(static_cast<size_t>(threads), jobs.size());
        std::vector<std::thread> pool;
        for (size_t i = 0; i < std::max<size_t>(n_workers, 1); ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_err) std::rethrow_exception(first_err);
    }

    std::vector<ExperimentRecord> records;
    records.reserve(done.size());
    for (const auto& [key, r] : done) records.push_back(r);
    std::sort(records.begin(), records.end(), record_order);

    {
        const fs::path tmp = out / "report.csv.tmp";
        std::ofstream rep(tmp, std::ios::trunc);
        if (!rep) throw std::runtime_error("cannot rewrite report.csv in " + plan.out_dir);
        rep << kReportHeader << "\n";
        for (const ExperimentRecord& r : records) rep << record_row(hash, r) << "\n";
        rep.close();
        if (!rep) throw std::runtime_error("failed rewriting report.csv in " + plan.out_dir);
        fs::rename(tmp, report_path);
    }

    {
        std::ofstream cor(out / "correlation.csv", std::ios::trunc);
        if (!cor) throw std::runtime_error("cannot write correlation.csv in " + plan.out_dir);
        cor << "val_kind,spearman_rho,n_points\n";
        for (EvalKind kind : plan.val_kinds) {
            std::vector<double> vx, tx;
            for (const ExperimentRecord& r : records) {
                if (r.val_kind != kind || !r.test_accuracy) continue;
                vx.push_back(r.val_accuracy);
                tx.push_back(*r.test_accuracy);
            }
            std::string rho = "nan";
            try {
                rho = fmt_g(spearman(vx, tx));
            } catch (const std::invalid_argument&) {
                // degenerate inputs (constant or too few points) stay "nan"
            }
            cor << to_string(kind) << ',' << rho << ',' << vx.size() << "\n";
        }
        if (!cor) throw std::runtime_error("failed writing correlation.csv in " + plan.out_dir);
    }

    {
        std::ofstream sel(out / "selection.txt", std::ios::trunc);
        if (!sel) throw std::runtime_error("cannot write selection.txt in " + plan.out_dir);
        sel << "manifest = " << hash << "\n";
        EvalPolicy policy{plan.allow_oracle};
        for (EvalKind kind : plan.val_kinds) {
            std::vector<ExperimentRecord> rs;
            for (const ExperimentRecord& r : records) {
                if (r.val_kind == kind) rs.push_back(r);
            }
            sel << "\n[" << to_string(kind) << "]\n";
            if (rs.empty()) {
                sel << "chosen = none\n";
                continue;
            }
            SelectionReport rep = select(rs, kind, policy);
            const ExperimentRecord& c = rep.chosen;
            sel << "chosen = variant=" << to_string(c.train_variant)
                << " test=" << to_string(c.test_kind) << " w=" << fmt_g(c.w)
                << " lambda=" << fmt_g(c.lambda) << " lr=" << fmt_g(c.lr) << " seed=" << c.seed
                << "\n";
            sel << "val_accuracy = " << fmt_g(c.val_accuracy) << "\n";
            if (c.test_accuracy) sel << "test_accuracy = " << fmt_g(*c.test_accuracy) << "\n";
            sel << "runner_ups = " << rep.runner_ups.size() << "\n";
        }
        if (!sel) throw std::runtime_error("failed writing selection.txt in " + plan.out_dir);
    }

    RunOutcome outcome;
    outcome.records = planned;
    outcome.manifest_hash = hash;
    return outcome;
}

}  // namespace shiftcraft
