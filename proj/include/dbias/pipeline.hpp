#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbias/dataset.hpp"
#include "dbias/debias.hpp"
#include "dbias/detector.hpp"
#include "dbias/metrics.hpp"
#include "dbias/recognition.hpp"

namespace dbias {

// One input unit (article or sentence batch) through the whole pipeline.
struct DocumentDebiasResult {
    std::string id;
    std::string original_text;
    std::string debiased_text;
    double mean_probability_before = 0.0;
    double mean_probability_after = 0.0;
    std::vector<DebiasResult> sentences;  // in order
};

// Splits each text into sentences, debiases per sentence, and re-joins
// with the original separators. Non-biased sentences pass through
// byte-identical.
std::vector<DocumentDebiasResult> run_pipeline(
    const Detector& detector, const Recognizer& recognizer,
    const Infiller& infiller, const std::vector<std::string>& texts,
    const DebiasConfig& config = {}, const std::vector<std::string>& ids = {});

struct SplitIndices {
    std::vector<size_t> train;
    std::vector<size_t> test;
};

// 80/20 split stratified by label, deterministic per seed.
SplitIndices stratified_split(const std::vector<MbicRecord>& records,
                              uint64_t seed, double test_fraction = 0.2);

struct DiReading {
    double di = 0.0;
    DiVerdict verdict = DiVerdict::Acceptable;
};

struct EvalMetrics {
    PrfAcc classification;
    // Disparate impact with the stored labels as the positive outcome.
    std::map<std::string, DiReading> di_by_attribute;
    std::optional<DiReading> di_pooled;
    // Same split with detector predictions as the positive outcome.
    std::map<std::string, DiReading> di_pred_by_attribute;
    std::optional<DiReading> di_pred_pooled;
    std::optional<double> g_auc;
    std::vector<std::string> warnings;
};

struct SentenceSummary {
    std::string original;
    std::string output;
    double probability_before = 0.0;
    double probability_after = 0.0;
    std::string status;
};

struct PipelineReport {
    EvalMetrics before;
    EvalMetrics after;
    std::vector<SentenceSummary> per_document;
    uint64_t split_seed = 0;
    size_t train_size = 0;
    size_t test_size = 0;
    bool debias_enabled = true;
};

struct EvaluateOptions {
    uint64_t split_seed = 0;
    double test_fraction = 0.2;
    TrainConfig train;
    FeatureConfig features;
    DebiasConfig debias;
    bool debias_enabled = true;
    GaucConfig gauc;
};

// Trains detector, lexicon and infiller on the train split, then computes
// the metric suite on the raw test split (before) and on the debiased
// test split with the original labels (after). With debiasing disabled
// the transform is the identity and before == after exactly.
PipelineReport evaluate_before_after(const std::vector<MbicRecord>& records,
                                     const GroupConfig& groups,
                                     const EvaluateOptions& options = {});

struct AblationRow {
    std::string label;  // "p=0.30" or "exact"
    double p = 0.0;
    bool exact = false;
    size_t biased_inputs = 0;
    size_t accepted = 0;
    double success_rate = 0.0;
};

// Masking ablation: replaces span masking with mask_random at each p,
// reporting the fraction of biased inputs whose chosen candidate meets
// the acceptance rule, plus the exact-span-masking row.
std::vector<AblationRow> ablation_masking(
    const Detector& detector, const Recognizer& recognizer,
    const Infiller& infiller, const std::vector<std::string>& texts,
    const std::vector<double>& p_values, double fraction, uint64_t seed,
    const DebiasConfig& config = {});

}  // namespace dbias
