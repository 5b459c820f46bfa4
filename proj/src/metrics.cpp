#include "dbias/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dbias {

ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("predictions/labels length mismatch");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("empty prediction sequence");
    }
    ConfusionMatrix cm;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const bool pred = predictions[i] != 0;
        const bool truth = labels[i] != 0;
        if (pred && truth) ++cm.tp;
        else if (pred && !truth) ++cm.fp;
        else if (!pred && truth) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

PrfAcc prf_acc(const ConfusionMatrix& cm) {
    PrfAcc out;
    const double tp = static_cast<double>(cm.tp);
    if (cm.tp + cm.fp > 0) {
        out.precision = tp / static_cast<double>(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn > 0) {
        out.recall = tp / static_cast<double>(cm.tp + cm.fn);
    }
    if (2 * cm.tp + cm.fn + cm.fp > 0) {
        out.f1 = 2.0 * tp / static_cast<double>(2 * cm.tp + cm.fn + cm.fp);
    }
    if (cm.total() > 0) {
        out.accuracy =
            static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    }
    return out;
}

std::string_view to_string(DiVerdict verdict) {
    switch (verdict) {
        case DiVerdict::FavorsPrivileged: return "favors_privileged";
        case DiVerdict::Acceptable: return "acceptable";
        case DiVerdict::FavorsUnprivileged: return "favors_unprivileged";
    }
    return "unknown";
}

DisparateImpact disparate_impact(const GroupOutcome& unprivileged,
                                 const GroupOutcome& privileged) {
    if (unprivileged.num_instances == 0 || privileged.num_instances == 0) {
        throw std::invalid_argument("group with zero instances");
    }
    if (unprivileged.num_positives > unprivileged.num_instances ||
        privileged.num_positives > privileged.num_instances) {
        throw std::invalid_argument("num_positives exceeds num_instances");
    }
    const double priv_rate = static_cast<double>(privileged.num_positives) /
                             static_cast<double>(privileged.num_instances);
    if (priv_rate == 0.0) {
        throw std::domain_error("undefined DI: privileged positive rate is zero");
    }
    const double unpriv_rate = static_cast<double>(unprivileged.num_positives) /
                               static_cast<double>(unprivileged.num_instances);
    DisparateImpact out;
    out.di = unpriv_rate / priv_rate;
    if (out.di < 0.8) {
        out.verdict = DiVerdict::FavorsPrivileged;
    } else if (out.di <= 1.25) {
        out.verdict = DiVerdict::Acceptable;
    } else {
        out.verdict = DiVerdict::FavorsUnprivileged;
    }
    return out;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores/labels length mismatch");
    }
    const size_t n = scores.size();
    size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0) ? 1 : 0;
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("roc_auc requires both classes");
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tied scores, then the Mann-Whitney statistic.
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (size_t t = i; t < j; ++t) {
            if (labels[order[t]] != 0) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    const double u = pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0;
    return u / (n_pos_d * static_cast<double>(n_neg));
}

std::string_view to_string(BiasAucKind kind) {
    switch (kind) {
        case BiasAucKind::Subgroup: return "subgroup_auc";
        case BiasAucKind::Bpsn: return "bpsn_auc";
        case BiasAucKind::Bnsp: return "bnsp_auc";
    }
    return "unknown";
}

double power_mean(const std::vector<double>& values, double power) {
    if (values.empty()) throw std::invalid_argument("power_mean of empty set");
    if (power == 0.0) throw std::invalid_argument("power must be nonzero");
    if (power < 0.0) {
        for (double v : values) {
            if (v == 0.0) return 0.0;  // limit of the negative-power mean
        }
    }
    double acc = 0.0;
    for (double v : values) acc += std::pow(v, power);
    acc /= static_cast<double>(values.size());
    return std::pow(acc, 1.0 / power);
}

namespace {

// Scores/labels restricted to a selected subset; nullopt when the subset
// lacks one of the classes.
std::optional<double> masked_auc(const std::vector<double>& scores,
                                 const std::vector<int>& labels,
                                 const std::vector<char>& selected) {
    std::vector<double> s;
    std::vector<int> y;
    bool pos = false;
    bool neg = false;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!selected[i]) continue;
        s.push_back(scores[i]);
        y.push_back(labels[i]);
        (labels[i] != 0 ? pos : neg) = true;
    }
    if (!pos || !neg) return std::nullopt;
    return roc_auc(s, y);
}

}  // namespace

double generalized_bias_auc(const std::vector<double>& scores,
                            const std::vector<int>& labels,
                            const std::vector<SubgroupMembership>& subgroups,
                            const GaucConfig& config, GaucBreakdown* breakdown) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores/labels length mismatch");
    }
    if (config.power == 0.0) throw std::invalid_argument("power must be nonzero");
    if (config.submetrics.empty()) {
        throw std::invalid_argument("at least one submetric required");
    }
    for (const auto& sg : subgroups) {
        if (sg.member.size() != scores.size()) {
            throw std::invalid_argument("subgroup mask length mismatch: " + sg.name);
        }
    }

    const size_t n_terms = config.submetrics.size() + (config.include_overall_auc ? 1 : 0);
    std::vector<double> weights = config.weights;
    if (weights.empty()) {
        weights.assign(n_terms, 1.0 / static_cast<double>(n_terms));
    }
    if (weights.size() != n_terms) {
        throw std::invalid_argument("one weight per term required");
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative submetric weight");
        weight_sum += w;
    }
    if (weight_sum <= 0.0) throw std::invalid_argument("weights sum to zero");

    const size_t n = scores.size();
    double combined = 0.0;
    size_t term = 0;
    for (const BiasAucKind kind : config.submetrics) {
        std::vector<double> aucs;
        for (const auto& sg : subgroups) {
            std::vector<char> selected(n, 0);
            for (size_t i = 0; i < n; ++i) {
                const bool in_subgroup = sg.member[i] != 0;
                const bool positive = labels[i] != 0;
                switch (kind) {
                    case BiasAucKind::Subgroup:
                        selected[i] = in_subgroup;
                        break;
                    case BiasAucKind::Bpsn:
                        selected[i] = (in_subgroup && !positive) ||
                                      (!in_subgroup && positive);
                        break;
                    case BiasAucKind::Bnsp:
                        selected[i] = (in_subgroup && positive) ||
                                      (!in_subgroup && !positive);
                        break;
                }
            }
            const auto auc = masked_auc(scores, labels, selected);
            if (!auc) {
                if (breakdown != nullptr) {
                    breakdown->warnings.push_back(
                        std::string(to_string(kind)) + ": subgroup '" + sg.name +
                        "' lacks a class and was excluded");
                }
                continue;
            }
            if (breakdown != nullptr) {
                breakdown->subgroup_aucs.emplace_back(
                    std::string(to_string(kind)) + "/" + sg.name, *auc);
            }
            aucs.push_back(*auc);
        }
        if (aucs.empty()) {
            throw std::runtime_error(
                std::string("all subgroups excluded for submetric ") +
                std::string(to_string(kind)));
        }
        combined += weights[term] * power_mean(aucs, config.power);
        ++term;
    }
    if (config.include_overall_auc) {
        const double overall = roc_auc(scores, labels);
        if (breakdown != nullptr) breakdown->overall_auc = overall;
        combined += weights[term] * overall;
    }
    return combined / weight_sum;
}

}  // namespace dbias
