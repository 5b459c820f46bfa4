#include "dbias/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dbias/text.hpp"

namespace dbias {

namespace {

constexpr char kModelMagic[4] = {'D', 'B', 'D', 'M'};
constexpr uint32_t kModelVersion = 1;
// Keeps probabilities strictly inside (0, 1) even for saturated logits.
constexpr double kProbEpsilon = 1e-12;

uint64_t fnv1a(std::string_view data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> lowercased_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& tok : tokenize(text).tokens) {
        std::string lower;
        lower.reserve(tok.surface.size());
        for (char c : tok.surface) {
            lower.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        out.push_back(std::move(lower));
    }
    return out;
}

void write_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 4);
}

uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw std::runtime_error("detector model: truncated file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

double read_f64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("detector model: truncated file");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SparseCounts featurize(const FeatureConfig& config, std::string_view text) {
    const auto tokens = lowercased_tokens(text);
    std::vector<uint32_t> indices;
    std::string gram;
    for (uint32_t order : config.ngram_orders) {
        if (order == 0 || tokens.size() < order) continue;
        for (size_t i = 0; i + order <= tokens.size(); ++i) {
            gram.clear();
            for (size_t k = 0; k < order; ++k) {
                if (k > 0) gram.push_back(' ');
                gram.append(tokens[i + k]);
            }
            indices.push_back(
                static_cast<uint32_t>(fnv1a(gram) % config.hash_dimension));
        }
    }
    std::sort(indices.begin(), indices.end());
    SparseCounts counts;
    for (size_t i = 0; i < indices.size();) {
        size_t j = i;
        while (j < indices.size() && indices[j] == indices[i]) ++j;
        counts.entries.emplace_back(indices[i], static_cast<float>(j - i));
        i = j;
    }
    return counts;
}

double DetectorModel::predict_proba(std::string_view text) const {
    const SparseCounts x = featurize(config_, text);
    double z = bias_term_;
    for (const auto& [index, count] : x.entries) {
        z += weights_[index] * count;
    }
    const double p = sigmoid(z);
    return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

DetectionResult DetectorModel::classify(std::string_view text) const {
    DetectionResult r;
    r.probability = predict_proba(text);
    r.label = r.probability >= threshold_ ? BiasLabel::Biased : BiasLabel::NonBiased;
    return r;
}

std::vector<DetectionResult> DetectorModel::classify(
    const std::vector<std::string>& texts) const {
    std::vector<DetectionResult> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(classify(text));
    return out;
}

void DetectorModel::set_decision_threshold(double t) {
    if (!(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument("decision threshold must be in (0, 1)");
    }
    threshold_ = t;
}

double bce_loss(const std::vector<SparseCounts>& features,
                const std::vector<int>& labels,
                const std::vector<double>& weights, double bias_term, double l2) {
    double loss = 0.0;
    for (size_t i = 0; i < features.size(); ++i) {
        double z = bias_term;
        for (const auto& [index, count] : features[i].entries) {
            z += weights[index] * count;
        }
        // softplus(z) - y*z == -[y log s + (1-y) log(1-s)]
        const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        loss += softplus - static_cast<double>(labels[i]) * z;
    }
    loss /= static_cast<double>(features.size());
    if (l2 > 0.0) {
        double norm2 = 0.0;
        for (double w : weights) norm2 += w * w;
        loss += l2 * norm2;
    }
    return loss;
}

std::vector<double> bce_gradient(const std::vector<SparseCounts>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<double>& weights,
                                 double bias_term, double l2) {
    std::vector<double> grad(weights.size() + 1, 0.0);
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (size_t i = 0; i < features.size(); ++i) {
        double z = bias_term;
        for (const auto& [index, count] : features[i].entries) {
            z += weights[index] * count;
        }
        const double residual = (sigmoid(z) - static_cast<double>(labels[i])) * inv_n;
        for (const auto& [index, count] : features[i].entries) {
            grad[index] += residual * count;
        }
        grad.back() += residual;
    }
    if (l2 > 0.0) {
        for (size_t j = 0; j < weights.size(); ++j) {
            grad[j] += 2.0 * l2 * weights[j];
        }
    }
    return grad;
}

DetectorModel train_detector(const std::vector<LabeledText>& records,
                             const TrainConfig& config,
                             const FeatureConfig& features,
                             std::vector<double>* epoch_losses) {
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("learning_rate must be positive");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& rec : records) {
        (rec.label != 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw std::invalid_argument("degenerate labels: need both classes");
    }

    std::vector<SparseCounts> xs;
    std::vector<int> ys;
    xs.reserve(records.size());
    ys.reserve(records.size());
    for (const auto& rec : records) {
        xs.push_back(featurize(features, rec.text));
        ys.push_back(rec.label != 0 ? 1 : 0);
    }

    DetectorModel model(features);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    const double decay = 1.0 - config.learning_rate * 2.0 * config.l2;
    std::vector<double> grad(model.weights_.size(), 0.0);

    if (epoch_losses != nullptr) epoch_losses->clear();
    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        double loss = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            double z = model.bias_term_;
            for (const auto& [index, count] : xs[i].entries) {
                z += model.weights_[index] * count;
            }
            const double softplus =
                std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
            loss += softplus - static_cast<double>(ys[i]) * z;
            const double residual = (sigmoid(z) - static_cast<double>(ys[i])) * inv_n;
            for (const auto& [index, count] : xs[i].entries) {
                grad[index] += residual * count;
            }
            grad_bias += residual;
        }
        if (epoch_losses != nullptr) {
            double norm2 = 0.0;
            for (double w : model.weights_) norm2 += w * w;
            epoch_losses->push_back(loss * inv_n + config.l2 * norm2);
        }
        // l2 term folded in as multiplicative decay, then the data gradient.
        if (config.l2 > 0.0) {
            for (double& w : model.weights_) w *= decay;
        }
        for (size_t j = 0; j < grad.size(); ++j) {
            model.weights_[j] -= config.learning_rate * grad[j];
        }
        model.bias_term_ -= config.learning_rate * grad_bias;
    }
    return model;
}

void DetectorModel::save(std::ostream& out) const {
    out.write(kModelMagic, 4);
    write_u32(out, kModelVersion);
    write_u32(out, config_.hash_dimension);
    write_u32(out, static_cast<uint32_t>(config_.ngram_orders.size()));
    for (uint32_t order : config_.ngram_orders) write_u32(out, order);
    write_f64(out, threshold_);
    for (double w : weights_) write_f64(out, w);
    write_f64(out, bias_term_);
    if (!out) throw std::runtime_error("detector model: write failed");
}

void DetectorModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save(out);
}

DetectorModel DetectorModel::load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw std::runtime_error("detector model: bad magic bytes");
    }
    const uint32_t version = read_u32(in);
    if (version != kModelVersion) {
        throw std::runtime_error("detector model: unknown format version " +
                                 std::to_string(version));
    }
    FeatureConfig config;
    config.hash_dimension = read_u32(in);
    if (config.hash_dimension == 0) {
        throw std::runtime_error("detector model: hash_dimension must be >= 1");
    }
    const uint32_t n_orders = read_u32(in);
    config.ngram_orders.clear();
    for (uint32_t i = 0; i < n_orders; ++i) config.ngram_orders.push_back(read_u32(in));
    DetectorModel model(config);
    model.threshold_ = read_f64(in);
    for (auto& w : model.weights_) w = read_f64(in);
    model.bias_term_ = read_f64(in);
    for (double w : model.weights_) {
        if (!std::isfinite(w)) throw std::runtime_error("detector model: non-finite weight");
    }
    return model;
}

DetectorModel DetectorModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load(in);
}

}  // namespace dbias
