#include "shiftcraft/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "shiftcraft/imgcore.hpp"
#include "shiftcraft/rng.hpp"

namespace shiftcraft {

namespace {

struct Grads {
    std::vector<double> w1, b1, w2, b2;

    explicit Grads(const Model& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0),
          b2(m.b2.size(), 0.0) {}
};

void softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

Prediction forward_flat(const Model& m, const double* x) {
    Prediction out;
    if (m.arch == Architecture::linear_softmax) {
        std::vector<double> z(m.class_count);
        const int d = m.in_dim();
        for (int r = 0; r < m.class_count; ++r) {
            double acc = m.b1[r];
            const double* w = &m.w1[static_cast<std::size_t>(r) * d];
            for (int i = 0; i < d; ++i) acc += w[i] * x[i];
            z[r] = acc;
        }
        softmax_inplace(z);
        out.probs = std::move(z);
        return out;
    }
    const int d = m.in_dim();
    std::vector<double> h(m.hidden);
    for (int r = 0; r < m.hidden; ++r) {
        double acc = m.b1[r];
        const double* w = &m.w1[static_cast<std::size_t>(r) * d];
        for (int i = 0; i < d; ++i) acc += w[i] * x[i];
        h[r] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> z(m.class_count);
    for (int r = 0; r < m.class_count; ++r) {
        double acc = m.b2[r];
        const double* w = &m.w2[static_cast<std::size_t>(r) * m.hidden];
        for (int i = 0; i < m.hidden; ++i) acc += w[i] * h[i];
        z[r] = acc;
    }
    softmax_inplace(z);
    out.probs = std::move(z);
    return out;
}

double cross_entropy(const Prediction& p, int label) {
    const double pv = std::max(p.probs[label], 1e-300);
    return -std::log(pv);
}

void check_label(int label, int classes) {
    if (label < 0 || label >= classes) {
        throw std::invalid_argument("trainer: label out of range");
    }
}

// Accumulates weight * d(cross_entropy)/d(params) for one sample.
void backprop(const Model& m, const double* x, const Prediction& p, int label, double weight,
              Grads& g) {
    const int d = m.in_dim();
    std::vector<double> dz(p.probs);
    dz[label] -= 1.0;
    for (double& v : dz) v *= weight;

    if (m.arch == Architecture::linear_softmax) {
        for (int r = 0; r < m.class_count; ++r) {
            double* gw = &g.w1[static_cast<std::size_t>(r) * d];
            for (int i = 0; i < d; ++i) gw[i] += dz[r] * x[i];
            g.b1[r] += dz[r];
        }
        return;
    }
    std::vector<double> hpre(m.hidden), h(m.hidden);
    for (int r = 0; r < m.hidden; ++r) {
        double acc = m.b1[r];
        const double* w = &m.w1[static_cast<std::size_t>(r) * d];
        for (int i = 0; i < d; ++i) acc += w[i] * x[i];
        hpre[r] = acc;
        h[r] = acc > 0.0 ? acc : 0.0;
    }
    for (int r = 0; r < m.class_count; ++r) {
        double* gw = &g.w2[static_cast<std::size_t>(r) * m.hidden];
        for (int i = 0; i < m.hidden; ++i) gw[i] += dz[r] * h[i];
        g.b2[r] += dz[r];
    }
    std::vector<double> dh(m.hidden, 0.0);
    for (int r = 0; r < m.class_count; ++r) {
        const double* w = &m.w2[static_cast<std::size_t>(r) * m.hidden];
        for (int i = 0; i < m.hidden; ++i) dh[i] += w[i] * dz[r];
    }
    for (int r = 0; r < m.hidden; ++r) {
        if (hpre[r] <= 0.0) continue;
        double* gw = &g.w1[static_cast<std::size_t>(r) * d];
        for (int i = 0; i < d; ++i) gw[i] += dh[r] * x[i];
        g.b1[r] += dh[r];
    }
}

void sgd_step(Model& m, const Grads& g, double lr) {
    for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= lr * g.w1[i];
    for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= lr * g.b1[i];
    for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= lr * g.w2[i];
    for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= lr * g.b2[i];
}

Model init_model(const TrainConfig& cfg, int input_channels, std::uint64_t init_seed) {
    Model m;
    m.arch = cfg.arch;
    m.input_width = cfg.basic.out_size;
    m.input_height = cfg.basic.out_size;
    m.input_channels = input_channels;
    m.class_count = cfg.class_count;
    const int d = m.in_dim();
    if (cfg.arch == Architecture::linear_softmax) {
        m.hidden = 0;
        m.w1.assign(static_cast<std::size_t>(m.class_count) * d, 0.0);
        m.b1.assign(m.class_count, 0.0);
        return m;
    }
    m.hidden = cfg.hidden;
    RandomStream rng(init_seed);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    m.w1.resize(static_cast<std::size_t>(m.hidden) * d);
    for (double& v : m.w1) v = rng.uniform(-s1, s1);
    m.b1.assign(m.hidden, 0.0);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    m.w2.resize(static_cast<std::size_t>(m.class_count) * m.hidden);
    for (double& v : m.w2) v = rng.uniform(-s2, s2);
    m.b2.assign(m.class_count, 0.0);
    return m;
}

Image adapt_channels(const Image& img, int channels) {
    if (img.channels == channels) return img;
    if (img.channels == 1 && channels == 3) {
        Image out(img.width, img.height, 3);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
            }
        }
        return out;
    }
    if (img.channels == 3 && channels == 1) {
        const GrayImage g = to_grayscale(img);
        return to_image(g, 1);
    }
    throw std::invalid_argument("trainer: unsupported channel conversion");
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
        throw std::invalid_argument("trainer: lambda outside [0, 1]");
    }
    if (cfg.lr <= 0.0) throw std::invalid_argument("trainer: lr must be positive");
    if (cfg.epochs < 1) throw std::invalid_argument("trainer: epochs must be >= 1");
    if (cfg.class_count < 2) throw std::invalid_argument("trainer: need >= 2 classes");
    if (cfg.basic.out_size < 3) throw std::invalid_argument("trainer: out_size too small");

    const bool shape = variant_has_shape_branch(cfg.variant);
    if (cfg.variant == TrainVariant::S) {
        if (cfg.batch_btes < 1) {
            throw std::invalid_argument("trainer: variant S needs batch_btes >= 1");
        }
    } else if (shape) {
        if (cfg.batch_btes < 1 || cfg.batch_images < 1) {
            throw std::invalid_argument("trainer: mixed variant needs both sub-batches");
        }
        if (cfg.batch_btes > cfg.batch_images) {
            throw std::invalid_argument("trainer: batch_btes exceeds batch_images");
        }
    } else {
        if (cfg.batch_images < 1) {
            throw std::invalid_argument("trainer: batch_images must be >= 1");
        }
        if (cfg.batch_btes != 0) {
            throw std::invalid_argument("trainer: image-only variant with batch_btes != 0");
        }
    }
    if ((variant_has_extra_augs(cfg.variant) || cfg.variant == TrainVariant::I_hat_plus_BTE) &&
        cfg.extra_prob > 0.0 && cfg.allowed_groups.empty()) {
        throw std::invalid_argument("trainer: extra augmentations need allowed_groups");
    }
}

// Image-slot pipeline for I_hat_plus_BTE: when the extra fires, the edge-map
// rendering competes uniformly with the allowed groups (k + 1 options).
Image slot_with_bte_option(const Image& raw, const TrainConfig& cfg, RandomStream& rng) {
    if (cfg.extra_prob > 0.0 && rng.uniform() < cfg.extra_prob) {
        const int k = static_cast<int>(cfg.allowed_groups.size());
        const int r = rng.uniform_int(k + 1);
        if (r == k) {
            const BinaryMap b = extract_bte_random(raw, cfg.bte_policy, rng);
            GrayImage g(b.width, b.height);
            for (std::size_t i = 0; i < b.bits.size(); ++i) g.data[i] = b.bits[i] ? 1.0 : 0.0;
            return apply_basic(to_image(g, raw.channels), cfg.basic, rng);
        }
        const auto tmpls = templates_for(cfg.allowed_groups[r]);
        const SpecTemplate* t = tmpls[rng.uniform_int(static_cast<int>(tmpls.size()))];
        const AugmentationSpec spec = sample_spec(*t, rng);
        return apply_basic(apply_extra(raw, spec, rng), cfg.basic, rng);
    }
    return apply_basic(raw, cfg.basic, rng);
}

}  // namespace

std::string_view to_string(TrainVariant v) {
    switch (v) {
        case TrainVariant::I: return "I";
        case TrainVariant::I_hat: return "I_hat";
        case TrainVariant::S: return "S";
        case TrainVariant::IS: return "IS";
        case TrainVariant::IS_sob: return "IS_sob";
        case TrainVariant::I_hat_S: return "I_hat_S";
        case TrainVariant::IS_x2: return "IS_x2";
        case TrainVariant::I_hat_plus_BTE: return "I_hat_plus_BTE";
    }
    return "?";
}

std::optional<TrainVariant> variant_from_string(std::string_view name) {
    static constexpr TrainVariant all[] = {
        TrainVariant::I,      TrainVariant::I_hat, TrainVariant::S,
        TrainVariant::IS,     TrainVariant::IS_sob, TrainVariant::I_hat_S,
        TrainVariant::IS_x2,  TrainVariant::I_hat_plus_BTE};
    for (TrainVariant v : all) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

bool variant_has_shape_branch(TrainVariant v) {
    switch (v) {
        case TrainVariant::S:
        case TrainVariant::IS:
        case TrainVariant::IS_sob:
        case TrainVariant::I_hat_S:
        case TrainVariant::IS_x2:
            return true;
        default:
            return false;
    }
}

bool variant_has_extra_augs(TrainVariant v) {
    return v == TrainVariant::I_hat || v == TrainVariant::I_hat_S;
}

std::vector<double> input_tensor(const Model& model, const Image& img) {
    if (img.empty()) throw std::invalid_argument("input_tensor: empty image");
    Image adapted = adapt_channels(img, model.input_channels);
    if (adapted.width != model.input_width || adapted.height != model.input_height) {
        adapted = resize_bilinear(adapted, model.input_width, model.input_height);
    }
    return adapted.data;
}

std::vector<double> input_tensor(const Model& model, const BinaryMap& bte) {
    GrayImage g(bte.width, bte.height);
    for (std::size_t i = 0; i < bte.bits.size(); ++i) g.data[i] = bte.bits[i] ? 1.0 : 0.0;
    return input_tensor(model, to_image(g, model.input_channels));
}

Prediction forward(const Model& model, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != model.in_dim()) {
        throw std::invalid_argument("forward: input size mismatch");
    }
    return forward_flat(model, input.data());
}

Prediction forward(const Model& model, const Image& img) {
    return forward(model, input_tensor(model, img));
}

Prediction forward(const Model& model, const BinaryMap& bte) {
    return forward(model, input_tensor(model, bte));
}

LossParts loss(const std::vector<Prediction>& img_preds, const std::vector<int>& img_labels,
               const std::vector<Prediction>& bte_preds, const std::vector<int>& bte_labels,
               double lambda) {
    if (img_preds.size() != img_labels.size() || bte_preds.size() != bte_labels.size()) {
        throw std::invalid_argument("loss: prediction/label size mismatch");
    }
    if (img_preds.empty() && bte_preds.empty()) {
        throw std::invalid_argument("loss: both sub-batches empty");
    }
    LossParts out;
    for (std::size_t i = 0; i < img_preds.size(); ++i) {
        check_label(img_labels[i], static_cast<int>(img_preds[i].probs.size()));
        out.loss_i += cross_entropy(img_preds[i], img_labels[i]);
    }
    if (!img_preds.empty()) out.loss_i /= static_cast<double>(img_preds.size());
    for (std::size_t i = 0; i < bte_preds.size(); ++i) {
        check_label(bte_labels[i], static_cast<int>(bte_preds[i].probs.size()));
        out.loss_s += cross_entropy(bte_preds[i], bte_labels[i]);
    }
    if (!bte_preds.empty()) out.loss_s /= static_cast<double>(bte_preds.size());

    if (img_preds.empty()) {
        out.total = out.loss_s;
    } else if (bte_preds.empty()) {
        out.total = out.loss_i;
    } else {
        out.total = out.loss_i + lambda * out.loss_s;
    }
    return out;
}

TrainResult train(const std::vector<LabeledImage>& data, const TrainConfig& cfg) {
    validate_config(cfg);
    if (data.empty()) throw std::invalid_argument("train: empty training split");
    for (const LabeledImage& li : data) check_label(li.label, cfg.class_count);

    const int input_channels = data[0].image.channels;
    TrainResult result;
    result.model = init_model(cfg, input_channels, derive_seed(cfg.seed, {hash_str("init")}));
    Model* shape_model = nullptr;
    if (cfg.variant == TrainVariant::IS_x2) {
        result.shape_model = init_model(cfg, input_channels,
                                        derive_seed(cfg.seed, {hash_str("init2")}));
        shape_model = &*result.shape_model;
    }
    Model& model = result.model;

    const int n = static_cast<int>(data.size());
    const bool image_branch = cfg.variant != TrainVariant::S;
    const bool shape_branch = variant_has_shape_branch(cfg.variant);
    const int driver = image_branch ? cfg.batch_images : cfg.batch_btes;
    const int steps_per_epoch = std::max(1, n / driver);
    const int total_steps = steps_per_epoch * cfg.epochs;

    std::vector<int> order(n);
    int t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        RandomStream shuffle_rng(
            derive_seed(cfg.seed, {hash_str("shuffle"), static_cast<std::uint64_t>(epoch)}));
        shuffle_rng.shuffle(order.data(), n);
        int cursor = 0;

        for (int step = 0; step < steps_per_epoch; ++step, ++t) {
            const double lr_t =
                total_steps == 1
                    ? cfg.lr
                    : cfg.lr * std::pow(0.01, static_cast<double>(t) / (total_steps - 1));

            std::vector<std::vector<double>> img_inputs, bte_inputs;
            std::vector<int> img_labels, bte_labels;

            if (image_branch) {
                for (int j = 0; j < cfg.batch_images; ++j) {
                    const LabeledImage& src = data[order[(cursor + j) % n]];
                    RandomStream rng(derive_seed(
                        cfg.seed, {hash_str("aug"), static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(j)}));
                    Image a;
                    if (cfg.variant == TrainVariant::I_hat_plus_BTE) {
                        a = slot_with_bte_option(src.image, cfg, rng);
                    } else if (variant_has_extra_augs(cfg.variant)) {
                        a = augment_for_training(src.image, cfg.allowed_groups, cfg.extra_prob,
                                                 cfg.basic, rng);
                    } else {
                        a = apply_basic(src.image, cfg.basic, rng);
                    }
                    img_inputs.push_back(input_tensor(model, a));
                    img_labels.push_back(src.label);
                }
                cursor += cfg.batch_images;
            }

            if (shape_branch) {
                const Model& sm = shape_model ? *shape_model : model;
                if (cfg.variant == TrainVariant::S) {
                    for (int j = 0; j < cfg.batch_btes; ++j) {
                        const LabeledImage& src = data[order[(cursor + j) % n]];
                        RandomStream rng(derive_seed(
                            cfg.seed, {hash_str("bteaug"), static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(j)}));
                        const Image base = apply_basic(src.image, cfg.basic, rng);
                        bte_inputs.push_back(
                            input_tensor(sm, extract_bte_random(base, cfg.bte_policy, rng)));
                        bte_labels.push_back(src.label);
                    }
                    cursor += cfg.batch_btes;
                } else {
                    RandomStream pick(derive_seed(
                        cfg.seed, {hash_str("btepick"), static_cast<std::uint64_t>(t)}));
                    for (int j = 0; j < cfg.batch_btes; ++j) {
                        const LabeledImage& src = data[pick.uniform_int(n)];
                        RandomStream rng(derive_seed(
                            cfg.seed, {hash_str("bteaug"), static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(j)}));
                        const Image base = apply_basic(src.image, cfg.basic, rng);
                        if (cfg.variant == TrainVariant::IS_sob) {
                            const double sigma = cfg.bte_policy.sigma_choices[rng.uniform_int(
                                static_cast<int>(cfg.bte_policy.sigma_choices.size()))];
                            const GrayImage e = sobel_edge_map(base, sigma);
                            bte_inputs.push_back(
                                input_tensor(sm, to_image(e, sm.input_channels)));
                        } else {
                            bte_inputs.push_back(
                                input_tensor(sm, extract_bte_random(base, cfg.bte_policy, rng)));
                        }
                        bte_labels.push_back(src.label);
                    }
                }
            }

            std::vector<Prediction> img_preds, bte_preds;
            img_preds.reserve(img_inputs.size());
            bte_preds.reserve(bte_inputs.size());
            for (const auto& x : img_inputs) img_preds.push_back(forward_flat(model, x.data()));
            {
                const Model& sm = shape_model ? *shape_model : model;
                for (const auto& x : bte_inputs) bte_preds.push_back(forward_flat(sm, x.data()));
            }
            const LossParts parts = loss(img_preds, img_labels, bte_preds, bte_labels, cfg.lambda);

            Grads g(model);
            if (image_branch) {
                const double w = 1.0 / static_cast<double>(img_inputs.size());
                for (std::size_t i = 0; i < img_inputs.size(); ++i) {
                    backprop(model, img_inputs[i].data(), img_preds[i], img_labels[i], w, g);
                }
            }
            if (shape_branch && !cfg.ignore_shape_gradients) {
                const double branch_w = image_branch ? cfg.lambda : 1.0;
                const double w = branch_w / static_cast<double>(bte_inputs.size());
                if (shape_model) {
                    Grads gs(*shape_model);
                    const double ws = 1.0 / static_cast<double>(bte_inputs.size());
                    for (std::size_t i = 0; i < bte_inputs.size(); ++i) {
                        backprop(*shape_model, bte_inputs[i].data(), bte_preds[i], bte_labels[i],
                                 ws, gs);
                    }
                    sgd_step(*shape_model, gs, lr_t);
                } else if (branch_w != 0.0) {
                    for (std::size_t i = 0; i < bte_inputs.size(); ++i) {
                        backprop(model, bte_inputs[i].data(), bte_preds[i], bte_labels[i], w, g);
                    }
                }
            }
            sgd_step(model, g, lr_t);

            result.log.push_back({t, lr_t, parts.total, parts.loss_i, parts.loss_s});
            if (cfg.record_weights) {
                std::vector<double> snap;
                snap.reserve(model.w1.size() + model.b1.size() + model.w2.size() +
                             model.b2.size());
                snap.insert(snap.end(), model.w1.begin(), model.w1.end());
                snap.insert(snap.end(), model.b1.begin(), model.b1.end());
                snap.insert(snap.end(), model.w2.begin(), model.w2.end());
                snap.insert(snap.end(), model.b2.begin(), model.b2.end());
                result.weight_trace.push_back(std::move(snap));
            }
        }
    }

    if (!cfg.log_path.empty()) {
        std::ofstream out(cfg.log_path);
        if (!out) throw std::runtime_error("train: cannot open log file " + cfg.log_path);
        out << "step,lr,loss_total,loss_I,loss_S\n";
        for (const TrainLogRow& r : result.log) {
            out << r.step << ',' << r.lr << ',' << r.loss_total << ',' << r.loss_i << ','
                << r.loss_s << '\n';
        }
    }
    return result;
}

double gradient_check(const Model& model, const std::vector<std::vector<double>>& img_inputs,
                      const std::vector<int>& img_labels,
                      const std::vector<std::vector<double>>& bte_inputs,
                      const std::vector<int>& bte_labels, double lambda) {
    auto total_loss = [&](const Model& m) {
        std::vector<Prediction> ip, bp;
        for (const auto& x : img_inputs) ip.push_back(forward_flat(m, x.data()));
        for (const auto& x : bte_inputs) bp.push_back(forward_flat(m, x.data()));
        return loss(ip, img_labels, bp, bte_labels, lambda).total;
    };

    Grads g(model);
    const bool image_branch = !img_inputs.empty();
    if (image_branch) {
        const double w = 1.0 / static_cast<double>(img_inputs.size());
        for (std::size_t i = 0; i < img_inputs.size(); ++i) {
            backprop(model, img_inputs[i].data(), forward_flat(model, img_inputs[i].data()),
                     img_labels[i], w, g);
        }
    }
    if (!bte_inputs.empty()) {
        const double branch_w = image_branch ? lambda : 1.0;
        const double w = branch_w / static_cast<double>(bte_inputs.size());
        for (std::size_t i = 0; i < bte_inputs.size(); ++i) {
            backprop(model, bte_inputs[i].data(), forward_flat(model, bte_inputs[i].data()),
                     bte_labels[i], w, g);
        }
    }

    Model probe = model;
    const double h = 1e-5;
    double max_rel = 0.0;
    auto check_array = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + h;
            const double lp = total_loss(probe);
            params[i] = saved - h;
            const double lm = total_loss(probe);
            params[i] = saved;
            const double gn = (lp - lm) / (2.0 * h);
            const double ga = analytic[i];
            const double rel = std::abs(ga - gn) / std::max({1.0, std::abs(ga), std::abs(gn)});
            max_rel = std::max(max_rel, rel);
        }
    };
    check_array(probe.w1, g.w1);
    check_array(probe.b1, g.b1);
    check_array(probe.w2, g.w2);
    check_array(probe.b2, g.b2);
    return max_rel;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64_array(std::ostream& out, const std::vector<double>& a) {
    put_u64(out, a.size());
    for (double v : a) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::vector<double> get_f64_array(std::istream& in) {
    const std::uint64_t n = get_u64(in);
    std::vector<double> a(n);
    for (std::uint64_t i = 0; i < n; ++i) a[i] = std::bit_cast<double>(get_u64(in));
    return a;
}

constexpr char kMagic[8] = {'S', 'C', 'M', 'O', 'D', 'E', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, model.arch == Architecture::linear_softmax ? 0 : 1);
    put_u32(out, static_cast<std::uint32_t>(model.input_width));
    put_u32(out, static_cast<std::uint32_t>(model.input_height));
    put_u32(out, static_cast<std::uint32_t>(model.input_channels));
    put_u32(out, static_cast<std::uint32_t>(model.class_count));
    put_u32(out, static_cast<std::uint32_t>(model.hidden));
    put_f64_array(out, model.w1);
    put_f64_array(out, model.b1);
    put_f64_array(out, model.w2);
    put_f64_array(out, model.b2);
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("load_model: bad magic in " + path);
    }
    if (get_u32(in) != kVersion) throw std::runtime_error("load_model: unsupported version");
    Model m;
    m.arch = get_u32(in) == 0 ? Architecture::linear_softmax : Architecture::mlp;
    m.input_width = static_cast<int>(get_u32(in));
    m.input_height = static_cast<int>(get_u32(in));
    m.input_channels = static_cast<int>(get_u32(in));
    m.class_count = static_cast<int>(get_u32(in));
    m.hidden = static_cast<int>(get_u32(in));
    m.w1 = get_f64_array(in);
    m.b1 = get_f64_array(in);
    m.w2 = get_f64_array(in);
    m.b2 = get_f64_array(in);
    if (!in) throw std::runtime_error("load_model: truncated file " + path);
    return m;
}

}  // namespace shiftcraft
