#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dbias {

// Anything that can score a sentence for bias plugs into the pipeline
// through this interface.
class Detector {
  public:
    virtual ~Detector() = default;
    // Probability that the text is biased, strictly inside (0, 1).
    virtual double predict_proba(std::string_view text) const = 0;
    // Probability at or above which a text classifies as biased.
    virtual double decision_threshold() const { return 0.5; }
};

struct FeatureConfig {
    uint32_t hash_dimension = 1u << 18;
    std::vector<uint32_t> ngram_orders = {1, 2};
};

// Hashed n-gram counts, sorted by feature index.
struct SparseCounts {
    std::vector<std::pair<uint32_t, float>> entries;
};

SparseCounts featurize(const FeatureConfig& config, std::string_view text);

struct TrainConfig {
    uint32_t epochs = 200;
    double learning_rate = 0.5;
    double l2 = 1e-6;
    uint64_t seed = 0;
};

struct LabeledText {
    std::string text;
    int label = 0;  // 1 = biased
};

enum class BiasLabel { NonBiased = 0, Biased = 1 };

struct DetectionResult {
    BiasLabel label = BiasLabel::NonBiased;
    double probability = 0.0;
};

class DetectorModel final : public Detector {
  public:
    DetectorModel() : weights_(config_.hash_dimension, 0.0) {}
    explicit DetectorModel(FeatureConfig config)
        : config_(std::move(config)), weights_(config_.hash_dimension, 0.0) {}

    double predict_proba(std::string_view text) const override;
    DetectionResult classify(std::string_view text) const;
    std::vector<DetectionResult> classify(const std::vector<std::string>& texts) const;

    double decision_threshold() const override { return threshold_; }
    void set_decision_threshold(double t);

    const FeatureConfig& feature_config() const { return config_; }
    const std::vector<double>& weights() const { return weights_; }
    double bias_term() const { return bias_term_; }

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static DetectorModel load(std::istream& in);
    static DetectorModel load_file(const std::string& path);

    friend DetectorModel train_detector(const std::vector<LabeledText>& records,
                                        const TrainConfig& config,
                                        const FeatureConfig& features,
                                        std::vector<double>* epoch_losses);

  private:
    FeatureConfig config_;
    std::vector<double> weights_;
    double bias_term_ = 0.0;
    double threshold_ = 0.5;
};

// Full-batch gradient descent on mean binary cross-entropy with an
// l2*||w||^2 penalty. Deterministic for a fixed (records, config, seed).
// Throws std::invalid_argument on a single-class corpus.
DetectorModel train_detector(const std::vector<LabeledText>& records,
                             const TrainConfig& config = {},
                             const FeatureConfig& features = {},
                             std::vector<double>* epoch_losses = nullptr);

// Mean BCE + l2 penalty of a weight/bias setting on featurized records;
// exposed for the finite-difference gradient checks.
double bce_loss(const std::vector<SparseCounts>& features,
                const std::vector<int>& labels,
                const std::vector<double>& weights, double bias_term, double l2);

// Analytic gradient of bce_loss w.r.t. (weights, bias); the bias slot is
// appended as the last element.
std::vector<double> bce_gradient(const std::vector<SparseCounts>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<double>& weights,
                                 double bias_term, double l2);

double sigmoid(double z);

}  // namespace dbias
