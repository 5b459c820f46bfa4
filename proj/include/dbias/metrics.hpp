#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dbias {

struct ConfusionMatrix {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t tn = 0;

    uint64_t total() const { return tp + fp + fn + tn; }
};

// Biased is the positive class. Throws on length mismatch or empty input.
ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& labels);

// A metric with a zero denominator is undefined, never a silent 0.
struct PrfAcc {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;  // 2TP / (2TP + FN + FP)
    std::optional<double> accuracy;
};

PrfAcc prf_acc(const ConfusionMatrix& cm);

struct GroupOutcome {
    std::string group_id;
    bool privileged = false;
    uint64_t num_positives = 0;
    uint64_t num_instances = 0;
};

enum class DiVerdict { FavorsPrivileged, Acceptable, FavorsUnprivileged };

std::string_view to_string(DiVerdict verdict);

struct DisparateImpact {
    double di = 0.0;
    DiVerdict verdict = DiVerdict::Acceptable;
};

// Four-fifths rule, boundaries inclusive: di < 0.8 favors the privileged
// group, di > 1.25 the unprivileged one. Throws std::domain_error when the
// privileged positive rate is zero ("undefined DI").
DisparateImpact disparate_impact(const GroupOutcome& unprivileged,
                                 const GroupOutcome& privileged);

// Probability that a random positive outscores a random negative, ties
// counted 0.5 (rank / Mann-Whitney formulation). Throws when only one
// class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

enum class BiasAucKind {
    Subgroup,  // instances within the subgroup
    Bpsn,      // background positives + subgroup negatives
    Bnsp,      // background negatives + subgroup positives
};

std::string_view to_string(BiasAucKind kind);

struct GaucConfig {
    double power = -5.0;
    std::vector<BiasAucKind> submetrics = {BiasAucKind::Subgroup, BiasAucKind::Bpsn,
                                           BiasAucKind::Bnsp};
    // One weight per submetric; empty means equal weights. When
    // include_overall_auc is set, a trailing weight covers the overall
    // AUC term (again equal by default).
    std::vector<double> weights;
    bool include_overall_auc = false;
};

struct SubgroupMembership {
    std::string name;
    std::vector<char> member;  // one flag per instance
};

// Generalized power mean Mp(a) = (mean(a_i^p))^(1/p).
double power_mean(const std::vector<double>& values, double power);

struct GaucBreakdown {
    // per submetric, per subgroup AUC actually used
    std::vector<std::pair<std::string, double>> subgroup_aucs;
    std::vector<std::string> warnings;  // subgroups skipped per submetric
    double overall_auc = 0.0;
};

// Per-subgroup bias AUCs aggregated by power mean within each submetric,
// then combined across submetrics by the configured weights. Subgroups
// missing a class in a submetric's partition are excluded with a warning;
// throws when every subgroup is excluded.
double generalized_bias_auc(const std::vector<double>& scores,
                            const std::vector<int>& labels,
                            const std::vector<SubgroupMembership>& subgroups,
                            const GaucConfig& config = {},
                            GaucBreakdown* breakdown = nullptr);

}  // namespace dbias
