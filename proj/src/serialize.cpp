#include "dbias/serialize.hpp"

namespace dbias {

using nlohmann::json;

json to_json(const BiasSpan& span) {
    return json{{"start", span.span.first_token},
                {"end", span.span.last_token},
                {"surface", span.span.surface},
                {"score", span.score}};
}

json to_json(const Candidate& candidate) {
    return json{{"text", candidate.text},
                {"probability", candidate.probability},
                {"accepted", candidate.accepted}};
}

json to_json(const DebiasResult& result) {
    json spans = json::array();
    for (const auto& s : result.spans) spans.push_back(to_json(s));
    json candidates = json::array();
    for (const auto& c : result.candidates) candidates.push_back(to_json(c));
    json j{{"original", result.original},
           {"original_probability", result.original_probability},
           {"spans", spans},
           {"candidates", candidates},
           {"status", std::string(to_string(result.status))}};
    j["chosen"] = result.chosen ? to_json(*result.chosen) : json(nullptr);
    return j;
}

json to_json(const DocumentDebiasResult& result) {
    json sentences = json::array();
    for (const auto& s : result.sentences) sentences.push_back(to_json(s));
    return json{{"id", result.id},
                {"original", result.original_text},
                {"debiased", result.debiased_text},
                {"probability_before", result.mean_probability_before},
                {"probability_after", result.mean_probability_after},
                {"sentences", sentences}};
}

json to_json(const DetectionResult& result) {
    return json{
        {"label", result.label == BiasLabel::Biased ? "Biased" : "Non-biased"},
        {"probability", result.probability}};
}

namespace {

json di_map_json(const std::map<std::string, DiReading>& by_attr,
                 const std::optional<DiReading>& pooled) {
    json j = json::object();
    for (const auto& [attr, reading] : by_attr) {
        j[attr] = json{{"di", reading.di},
                       {"verdict", std::string(to_string(reading.verdict))}};
    }
    if (pooled) {
        j["pooled"] = json{{"di", pooled->di},
                           {"verdict", std::string(to_string(pooled->verdict))}};
    }
    return j;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const EvalMetrics& metrics) {
    return json{{"precision", optional_json(metrics.classification.precision)},
                {"recall", optional_json(metrics.classification.recall)},
                {"f1", optional_json(metrics.classification.f1)},
                {"accuracy", optional_json(metrics.classification.accuracy)},
                {"di", di_map_json(metrics.di_by_attribute, metrics.di_pooled)},
                {"di_predicted", di_map_json(metrics.di_pred_by_attribute,
                                             metrics.di_pred_pooled)},
                {"g_auc", optional_json(metrics.g_auc)},
                {"warnings", metrics.warnings}};
}

json to_json(const PipelineReport& report) {
    json per_document = json::array();
    for (const auto& s : report.per_document) {
        per_document.push_back(json{{"original", s.original},
                                    {"output", s.output},
                                    {"probability_before", s.probability_before},
                                    {"probability_after", s.probability_after},
                                    {"status", s.status}});
    }
    return json{{"before", to_json(report.before)},
                {"after", to_json(report.after)},
                {"per_document", per_document},
                {"split_seed", report.split_seed},
                {"train_size", report.train_size},
                {"test_size", report.test_size},
                {"debias_enabled", report.debias_enabled}};
}

json to_json(const NewsArticle& article) {
    return json{{"url", article.url},
                {"title", article.title},
                {"body", article.body},
                {"fetched_at", article.fetched_at}};
}

json to_json(const AblationRow& row) {
    return json{{"label", row.label},
                {"p", row.p},
                {"exact", row.exact},
                {"biased_inputs", row.biased_inputs},
                {"accepted", row.accepted},
                {"success_rate", row.success_rate}};
}

std::string error_record(const std::string& type, const std::string& message) {
    return json{{"error", {{"type", type}, {"message", message}}}}.dump();
}

}  // namespace dbias
