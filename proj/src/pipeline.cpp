#include "dbias/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dbias/text.hpp"

namespace dbias {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<DocumentDebiasResult> run_pipeline(
    const Detector& detector, const Recognizer& recognizer,
    const Infiller& infiller, const std::vector<std::string>& texts,
    const DebiasConfig& config, const std::vector<std::string>& ids) {
    if (!ids.empty() && ids.size() != texts.size()) {
        throw std::invalid_argument("ids length mismatch");
    }
    std::vector<DocumentDebiasResult> results;
    results.reserve(texts.size());
    for (size_t i = 0; i < texts.size(); ++i) {
        DocumentDebiasResult doc;
        doc.id = ids.empty() ? std::to_string(i) : ids[i];
        doc.original_text = texts[i];

        double before_sum = 0.0;
        double after_sum = 0.0;
        const auto pieces = split_sentences(texts[i]);
        for (const auto& piece : pieces) {
            DebiasResult r = debias(detector, recognizer, infiller, piece, config);
            const double after_p =
                r.chosen ? r.chosen->probability : r.original_probability;
            before_sum += r.original_probability;
            after_sum += after_p;
            doc.debiased_text += r.chosen ? r.chosen->text : r.original;
            doc.sentences.push_back(std::move(r));
        }
        if (!pieces.empty()) {
            before_sum /= static_cast<double>(pieces.size());
            after_sum /= static_cast<double>(pieces.size());
        }
        doc.mean_probability_before = before_sum;
        doc.mean_probability_after = after_sum;
        results.push_back(std::move(doc));
    }
    return results;
}

SplitIndices stratified_split(const std::vector<MbicRecord>& records,
                              uint64_t seed, double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must be in (0, 1)");
    }
    std::vector<size_t> positives;
    std::vector<size_t> negatives;
    for (size_t i = 0; i < records.size(); ++i) {
        (records[i].label == RecordLabel::Biased ? positives : negatives).push_back(i);
    }
    if (positives.empty() || negatives.empty()) {
        throw std::invalid_argument("degenerate split: need both classes");
    }

    std::mt19937_64 rng(seed);
    SplitIndices out;
    for (auto* cls : {&positives, &negatives}) {
        auto& idx = *cls;
        for (size_t i = idx.size(); i > 1; --i) {
            std::swap(idx[i - 1], idx[static_cast<size_t>(rng() % i)]);
        }
        const auto n_test = static_cast<size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        if (n_test == 0 || n_test == idx.size()) {
            throw std::invalid_argument("degenerate split: a class has too few rows");
        }
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + n_test);
        out.train.insert(out.train.end(), idx.begin() + n_test, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

namespace {

// All identity values across attributes become G-AUC subgroups, with
// membership decided by mention in the evaluated sentence.
std::vector<SubgroupMembership> mention_subgroups(
    const std::vector<std::string>& sentences, const GroupConfig& groups) {
    std::vector<SubgroupMembership> subgroups;
    for (const auto& spec : groups.groups) {
        for (const auto* side : {&spec.privileged, &spec.unprivileged}) {
            for (const auto& gv : *side) {
                SubgroupMembership sg;
                sg.name = spec.attribute + "/" + gv.value;
                sg.member.resize(sentences.size(), 0);
                for (size_t i = 0; i < sentences.size(); ++i) {
                    sg.member[i] =
                        mentions_any(sentences[i], gv.identity_terms) ? 1 : 0;
                }
                subgroups.push_back(std::move(sg));
            }
        }
    }
    return subgroups;
}

EvalMetrics compute_metrics(const std::vector<MbicRecord>& test_records,
                            const std::vector<std::string>& sentences,
                            const std::vector<int>& labels,
                            const std::vector<int>& predictions,
                            const std::vector<double>& scores,
                            const GroupConfig& groups, const GaucConfig& gauc) {
    EvalMetrics m;
    m.classification = prf_acc(confusion(predictions, labels));

    std::vector<MbicRecord> eval_records = test_records;
    for (size_t i = 0; i < eval_records.size(); ++i) {
        eval_records[i].sentence = sentences[i];
    }

    GroupOutcome pooled_unpriv{"pooled:unprivileged", false, 0, 0};
    GroupOutcome pooled_priv{"pooled:privileged", true, 0, 0};
    GroupOutcome pred_pooled_unpriv{"pooled:unprivileged", false, 0, 0};
    GroupOutcome pred_pooled_priv{"pooled:privileged", true, 0, 0};
    for (const auto& spec : groups.groups) {
        try {
            const auto [unpriv, priv] = group_outcomes(eval_records, spec);
            const auto di = disparate_impact(unpriv, priv);
            m.di_by_attribute[spec.attribute] = {di.di, di.verdict};
            pooled_unpriv.num_positives += unpriv.num_positives;
            pooled_unpriv.num_instances += unpriv.num_instances;
            pooled_priv.num_positives += priv.num_positives;
            pooled_priv.num_instances += priv.num_instances;
        } catch (const std::exception& e) {
            m.warnings.push_back("di[" + spec.attribute + "]: " + e.what());
        }
        try {
            const auto [unpriv, priv] =
                group_outcomes_with(eval_records, spec, predictions);
            const auto di = disparate_impact(unpriv, priv);
            m.di_pred_by_attribute[spec.attribute] = {di.di, di.verdict};
            pred_pooled_unpriv.num_positives += unpriv.num_positives;
            pred_pooled_unpriv.num_instances += unpriv.num_instances;
            pred_pooled_priv.num_positives += priv.num_positives;
            pred_pooled_priv.num_instances += priv.num_instances;
        } catch (const std::exception& e) {
            m.warnings.push_back("di_pred[" + spec.attribute + "]: " + e.what());
        }
    }
    try {
        const auto di = disparate_impact(pooled_unpriv, pooled_priv);
        m.di_pooled = DiReading{di.di, di.verdict};
    } catch (const std::exception& e) {
        m.warnings.push_back(std::string("di[pooled]: ") + e.what());
    }
    try {
        const auto di = disparate_impact(pred_pooled_unpriv, pred_pooled_priv);
        m.di_pred_pooled = DiReading{di.di, di.verdict};
    } catch (const std::exception& e) {
        m.warnings.push_back(std::string("di_pred[pooled]: ") + e.what());
    }

    try {
        GaucBreakdown breakdown;
        m.g_auc = generalized_bias_auc(scores, labels,
                                       mention_subgroups(sentences, groups), gauc,
                                       &breakdown);
        for (auto& w : breakdown.warnings) m.warnings.push_back(std::move(w));
    } catch (const std::exception& e) {
        m.warnings.push_back(std::string("g_auc: ") + e.what());
    }
    return m;
}

}  // namespace

PipelineReport evaluate_before_after(const std::vector<MbicRecord>& records,
                                     const GroupConfig& groups,
                                     const EvaluateOptions& options) {
    const SplitIndices split =
        stratified_split(records, options.split_seed, options.test_fraction);

    std::vector<LabeledText> train_set;
    train_set.reserve(split.train.size());
    std::vector<LexiconRecord> lexicon_records;
    std::vector<std::string> infill_corpus;
    for (size_t idx : split.train) {
        const auto& rec = records[idx];
        const int label = rec.label == RecordLabel::Biased ? 1 : 0;
        train_set.push_back({rec.sentence, label});
        lexicon_records.push_back({rec.biased_words, label == 1});
        // Suggestions are counted over non-biased sentences so infills
        // lean neutral.
        if (label == 0) infill_corpus.push_back(rec.sentence);
    }

    const DetectorModel detector =
        train_detector(train_set, options.train, options.features);
    const LexiconRecognizer recognizer(build_lexicon(lexicon_records));
    const BigramInfiller infiller(infill_corpus);

    std::vector<MbicRecord> test_records;
    std::vector<std::string> raw_sentences;
    std::vector<int> labels;
    for (size_t idx : split.test) {
        test_records.push_back(records[idx]);
        raw_sentences.push_back(records[idx].sentence);
        labels.push_back(records[idx].label == RecordLabel::Biased ? 1 : 0);
    }

    auto score_all = [&](const std::vector<std::string>& sentences) {
        std::pair<std::vector<int>, std::vector<double>> out;
        out.first.reserve(sentences.size());
        out.second.reserve(sentences.size());
        for (const auto& s : sentences) {
            const auto r = detector.classify(s);
            out.first.push_back(r.label == BiasLabel::Biased ? 1 : 0);
            out.second.push_back(r.probability);
        }
        return out;
    };

    PipelineReport report;
    report.split_seed = options.split_seed;
    report.train_size = split.train.size();
    report.test_size = split.test.size();
    report.debias_enabled = options.debias_enabled;

    const auto [before_preds, before_scores] = score_all(raw_sentences);
    report.before = compute_metrics(test_records, raw_sentences, labels,
                                    before_preds, before_scores, groups,
                                    options.gauc);

    std::vector<std::string> transformed = raw_sentences;
    if (options.debias_enabled) {
        for (size_t i = 0; i < raw_sentences.size(); ++i) {
            DebiasResult r = debias(detector, recognizer, infiller,
                                    raw_sentences[i], options.debias);
            if (r.chosen) transformed[i] = r.chosen->text;
            SentenceSummary summary;
            summary.original = r.original;
            summary.output = transformed[i];
            summary.probability_before = r.original_probability;
            summary.probability_after =
                r.chosen ? r.chosen->probability : r.original_probability;
            summary.status = std::string(to_string(r.status));
            report.per_document.push_back(std::move(summary));
        }
    }

    const auto [after_preds, after_scores] = score_all(transformed);
    report.after = compute_metrics(test_records, transformed, labels, after_preds,
                                   after_scores, groups, options.gauc);
    return report;
}

std::vector<AblationRow> ablation_masking(
    const Detector& detector, const Recognizer& recognizer,
    const Infiller& infiller, const std::vector<std::string>& texts,
    const std::vector<double>& p_values, double fraction, uint64_t seed,
    const DebiasConfig& config) {
    struct BiasedInput {
        Document doc;
        double probability;
        std::string text;
    };
    std::vector<BiasedInput> biased;
    for (const auto& text : texts) {
        if (text.empty()) continue;
        const double p0 = detector.predict_proba(text);
        if (p0 < detector.decision_threshold()) continue;
        biased.push_back({tokenize(text), p0, text});
    }

    std::vector<AblationRow> rows;
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("masking probability outside [0, 1]");
        }
        AblationRow row;
        char label[32];
        std::snprintf(label, sizeof(label), "p=%.2f", p);
        row.label = label;
        row.p = p;
        row.biased_inputs = biased.size();
        for (size_t i = 0; i < biased.size(); ++i) {
            const MaskedText masked =
                mask_random(biased[i].doc, fraction, p, splitmix64(seed + i));
            const DebiasResult r = debias_masked(detector, infiller, masked,
                                                 biased[i].probability, config);
            if (r.status == DebiasStatus::Debiased) row.accepted += 1;
        }
        row.success_rate = biased.empty()
                               ? 0.0
                               : static_cast<double>(row.accepted) /
                                     static_cast<double>(row.biased_inputs);
        rows.push_back(std::move(row));
    }

    AblationRow exact;
    exact.label = "exact";
    exact.exact = true;
    exact.biased_inputs = biased.size();
    for (const auto& input : biased) {
        const DebiasResult r =
            debias(detector, recognizer, infiller, input.text, config);
        if (r.status == DebiasStatus::Debiased) exact.accepted += 1;
    }
    exact.success_rate = biased.empty()
                             ? 0.0
                             : static_cast<double>(exact.accepted) /
                                   static_cast<double>(exact.biased_inputs);
    rows.push_back(std::move(exact));
    return rows;
}

}  // namespace dbias
