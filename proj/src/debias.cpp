#include "dbias/debias.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dbias {

std::string_view to_string(DebiasStatus status) {
    switch (status) {
        case DebiasStatus::NotBiased: return "not_biased";
        case DebiasStatus::Debiased: return "debiased";
        case DebiasStatus::NoCandidateAccepted: return "no_candidate_accepted";
        case DebiasStatus::UnlocatableBias: return "unlocatable_bias";
    }
    return "unknown";
}

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::vector<Span> sorted_validated(const Document& doc, std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
        return a.first_token < b.first_token;
    });
    for (size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].first_token > spans[i].last_token ||
            spans[i].last_token >= doc.tokens.size()) {
            throw std::invalid_argument("span out of range");
        }
        if (i > 0 && spans[i].first_token <= spans[i - 1].last_token) {
            throw std::invalid_argument("overlapping spans");
        }
    }
    return spans;
}

}  // namespace

MaskedText mask_spans(const Document& doc, const std::vector<Span>& spans) {
    MaskedText masked;
    masked.original = doc;
    masked.masked_spans = sorted_validated(doc, spans);
    std::map<Span, std::string, SpanOrder> replacements;
    for (const auto& span : masked.masked_spans) {
        replacements.emplace(span, std::string(kMaskToken));
    }
    masked.rendering = detokenize(doc, replacements);
    return masked;
}

std::vector<MaskedInstance> shift_decompose(const MaskedText& masked) {
    std::vector<MaskedInstance> instances;
    instances.reserve(masked.masked_spans.size());
    for (const auto& span : masked.masked_spans) {
        std::map<Span, std::string, SpanOrder> replacement;
        replacement.emplace(span, std::string(kMaskToken));
        instances.push_back({detokenize(masked.original, replacement), span});
    }
    return instances;
}

const std::vector<std::string>& neutral_fallback_words() {
    static const std::vector<std::string> words = {"information", "statement",
                                                   "report", "people", "group"};
    return words;
}

std::vector<std::string> suggest_topk(const Infiller& infiller,
                                      const Document& original,
                                      const MaskedInstance& instance, size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    const std::string masked_surface = lowercase(instance.target_span.surface);

    // Ask for extra in case the original surface is among the suggestions.
    std::vector<ScoredWord> raw = infiller.suggest(original, instance, k + 4);
    std::vector<std::string> out;
    for (const auto& sw : raw) {
        if (out.size() >= k) break;
        if (lowercase(sw.word) == masked_surface) continue;
        out.push_back(sw.word);
    }
    if (out.empty()) {
        for (const auto& word : neutral_fallback_words()) {
            if (out.size() >= k) break;
            if (word == masked_surface) continue;
            out.push_back(word);
        }
    }
    return out;
}

std::vector<Candidate> assemble_candidates(
    const MaskedText& masked,
    const std::vector<std::vector<std::string>>& per_span_suggestions,
    const DebiasConfig& config) {
    if (per_span_suggestions.size() != masked.masked_spans.size()) {
        throw std::invalid_argument("one suggestion list per span required");
    }
    size_t longest = 0;
    for (const auto& list : per_span_suggestions) {
        if (list.empty()) throw std::invalid_argument("empty suggestion list");
        longest = std::max(longest, list.size());
    }
    const size_t count = std::min<size_t>(config.top_k, longest);

    std::vector<Candidate> candidates;
    candidates.reserve(count);
    for (size_t rank = 0; rank < count; ++rank) {
        Candidate cand;
        for (size_t s = 0; s < masked.masked_spans.size(); ++s) {
            const auto& list = per_span_suggestions[s];
            cand.fills.emplace(masked.masked_spans[s],
                               list[std::min(rank, list.size() - 1)]);
        }
        cand.text = detokenize(masked.original, cand.fills);
        candidates.push_back(std::move(cand));
    }
    return candidates;
}

DebiasResult debias_masked(const Detector& detector, const Infiller& infiller,
                           const MaskedText& masked, double original_probability,
                           const DebiasConfig& config) {
    DebiasResult result;
    result.original = masked.original.raw_text;
    result.original_probability = original_probability;

    if (masked.masked_spans.empty()) {
        result.status = DebiasStatus::NoCandidateAccepted;
        return result;
    }

    const auto instances = shift_decompose(masked);
    std::vector<std::vector<std::string>> suggestions;
    suggestions.reserve(instances.size());
    for (const auto& instance : instances) {
        suggestions.push_back(
            suggest_topk(infiller, masked.original, instance, config.top_k));
    }

    result.candidates = assemble_candidates(masked, suggestions, config);
    for (auto& cand : result.candidates) {
        cand.probability = detector.predict_proba(cand.text);
        cand.accepted = cand.probability < config.accept_threshold ||
                        cand.probability < original_probability;
    }
    std::stable_sort(result.candidates.begin(), result.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.probability < b.probability;
                     });
    if (result.candidates.size() > config.candidate_cap()) {
        result.candidates.resize(config.candidate_cap());
    }

    for (const auto& cand : result.candidates) {
        if (cand.accepted) {
            result.chosen = cand;
            result.status = DebiasStatus::Debiased;
            return result;
        }
    }
    result.status = DebiasStatus::NoCandidateAccepted;
    return result;
}

DebiasResult debias(const Detector& detector, const Recognizer& recognizer,
                    const Infiller& infiller, std::string_view text,
                    const DebiasConfig& config) {
    if (text.empty()) throw std::invalid_argument("text must be non-empty");
    if (config.top_k == 0) throw std::invalid_argument("top_k must be >= 1");
    if (!(config.accept_threshold > 0.0 && config.accept_threshold < 1.0)) {
        throw std::invalid_argument("accept_threshold must be in (0, 1)");
    }

    DebiasResult result;
    result.original.assign(text);
    result.original_probability = detector.predict_proba(text);

    const auto passthrough = [&](DebiasStatus status) {
        Candidate original;
        original.text = result.original;
        original.probability = result.original_probability;
        original.accepted = original.probability < config.accept_threshold;
        result.chosen = std::move(original);
        result.status = status;
        return result;
    };

    if (result.original_probability < detector.decision_threshold()) {
        return passthrough(DebiasStatus::NotBiased);
    }

    const Document doc = tokenize(text);
    result.spans = recognizer.recognize(doc);
    if (result.spans.empty()) {
        return passthrough(DebiasStatus::UnlocatableBias);
    }

    std::vector<Span> spans;
    spans.reserve(result.spans.size());
    for (const auto& bs : result.spans) spans.push_back(bs.span);
    const MaskedText masked = mask_spans(doc, spans);

    auto scored = debias_masked(detector, infiller, masked,
                                result.original_probability, config);
    result.candidates = std::move(scored.candidates);
    result.chosen = std::move(scored.chosen);
    result.status = scored.status;
    return result;
}

MaskedText mask_random(const Document& doc, double fraction, double p,
                       uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("fraction must be in (0, 1]");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("p must be in [0, 1]");
    }
    const size_t n = doc.tokens.size();
    std::mt19937_64 rng(seed);

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    for (size_t i = n; i > 1; --i) {  // Fisher-Yates, explicit bounded draws
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const auto subset_size =
        static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<size_t> subset(order.begin(),
                               order.begin() + std::min(subset_size, n));
    std::sort(subset.begin(), subset.end());

    std::vector<Span> spans;
    for (size_t index : subset) {
        const double u =
            static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
        if (u < p) spans.push_back(make_span(doc, index, index));
    }
    return mask_spans(doc, spans);
}

BigramInfiller::BigramInfiller(const std::vector<std::string>& corpus_sentences) {
    for (const auto& sentence : corpus_sentences) add_sentence(sentence);
}

void BigramInfiller::add_sentence(std::string_view sentence) {
    const Document doc = tokenize(sentence);
    uint32_t prev_id = 0;
    bool have_prev = false;
    for (const auto& tok : doc.tokens) {
        if (!is_word_token(tok)) {  // punctuation breaks adjacency
            have_prev = false;
            continue;
        }
        const std::string word = lowercase(tok.surface);
        auto [it, inserted] = vocab_.emplace(word, static_cast<uint32_t>(words_.size()));
        if (inserted) words_.push_back(word);
        const uint32_t id = it->second;
        if (have_prev) {
            forward_[{prev_id, id}] += 1;
            backward_[{id, prev_id}] += 1;
        }
        prev_id = id;
        have_prev = true;
    }
}

std::vector<ScoredWord> BigramInfiller::suggest(const Document& original,
                                                const MaskedInstance& instance,
                                                size_t k) const {
    const Span& span = instance.target_span;

    // Immediate word neighbor, if any; punctuation breaks adjacency just
    // as it does when the bigram counts are collected.
    auto context_id = [&](size_t token, bool exists) -> std::optional<uint32_t> {
        if (!exists) return std::nullopt;
        const auto& tok = original.tokens[token];
        if (!is_word_token(tok)) return std::nullopt;
        const auto it = vocab_.find(lowercase(tok.surface));
        if (it == vocab_.end()) return std::nullopt;
        return it->second;
    };
    const auto left = context_id(span.first_token - 1, span.first_token > 0);
    const auto right = context_id(span.last_token + 1,
                                  span.last_token + 1 < original.tokens.size());

    std::map<uint32_t, double> left_scores;
    std::map<uint32_t, double> right_scores;
    if (left) {
        for (auto it = forward_.lower_bound({*left, 0});
             it != forward_.end() && it->first.first == *left; ++it) {
            left_scores[it->first.second] += it->second;
        }
    }
    if (right) {
        for (auto it = backward_.lower_bound({*right, 0});
             it != backward_.end() && it->first.first == *right; ++it) {
            right_scores[it->first.second] += it->second;
        }
    }

    // Words attested on both sides rank first; when the intersection is
    // empty (or one side is unknown) the remaining counts still score.
    std::map<uint32_t, double> scores;
    if (left && right) {
        for (const auto& [id, score] : left_scores) {
            const auto it = right_scores.find(id);
            if (it != right_scores.end()) scores[id] = score + it->second;
        }
    }
    if (scores.empty()) {
        scores = std::move(left_scores);
        for (const auto& [id, score] : right_scores) scores[id] += score;
    }

    std::vector<ScoredWord> ranked;
    ranked.reserve(scores.size());
    for (const auto& [id, score] : scores) {
        ranked.push_back({words_[id], score});
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const ScoredWord& a, const ScoredWord& b) {
                  return a.score != b.score ? a.score > b.score : a.word < b.word;
              });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

}  // namespace dbias
