#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbias/detector.hpp"
#include "dbias/recognition.hpp"
#include "dbias/text.hpp"

namespace dbias {

inline constexpr std::string_view kMaskToken = "[MASK]";

struct MaskedText {
    Document original;
    std::vector<Span> masked_spans;  // sorted by position
    std::string rendering;           // each span replaced by "[MASK]"
};

struct MaskedInstance {
    std::string text;  // exactly one "[MASK]"; other spans show originals
    Span target_span;
};

struct Candidate {
    std::string text;
    std::map<Span, std::string, SpanOrder> fills;
    double probability = 0.0;
    bool accepted = false;
};

struct DebiasConfig {
    uint32_t top_k = 5;
    double accept_threshold = 0.5;
    uint32_t max_candidates_returned = 0;  // 0 = top_k

    uint32_t candidate_cap() const {
        return max_candidates_returned == 0 ? top_k : max_candidates_returned;
    }
};

enum class DebiasStatus {
    NotBiased,           // detector already scores the input below threshold
    Debiased,            // an accepted candidate was chosen
    NoCandidateAccepted, // candidates exist but none met the acceptance rule
    UnlocatableBias,     // classified biased, but no spans were recognized
};

struct DebiasResult {
    std::string original;
    double original_probability = 0.0;
    std::vector<BiasSpan> spans;
    std::vector<Candidate> candidates;  // ascending by probability
    std::optional<Candidate> chosen;
    DebiasStatus status = DebiasStatus::NotBiased;
};

std::string_view to_string(DebiasStatus status);

// Replaces each span (even multi-word) with exactly one "[MASK]".
// Throws std::invalid_argument on overlapping spans.
MaskedText mask_spans(const Document& doc, const std::vector<Span>& spans);

// Mask shifting: one instance per span; instance i masks only span i and
// restores the original surface everywhere else.
std::vector<MaskedInstance> shift_decompose(const MaskedText& masked);

struct ScoredWord {
    std::string word;
    double score = 0.0;
};

class Infiller {
  public:
    virtual ~Infiller() = default;
    // Ranked suggestions for the masked position, best first.
    virtual std::vector<ScoredWord> suggest(const Document& original,
                                            const MaskedInstance& instance,
                                            size_t k) const = 0;
};

// Words that stand in when the infiller has nothing for a context.
const std::vector<std::string>& neutral_fallback_words();

// Ranked suggestions with the original masked surface filtered out and the
// neutral fallback applied; never returns an empty list.
std::vector<std::string> suggest_topk(const Infiller& infiller,
                                      const Document& original,
                                      const MaskedInstance& instance, size_t k);

// Candidate j pairs the rank-j suggestion of every span, clamped to each
// list's length. Probabilities are not scored here.
std::vector<Candidate> assemble_candidates(
    const MaskedText& masked,
    const std::vector<std::vector<std::string>>& per_span_suggestions,
    const DebiasConfig& config);

// Full single-round loop: classify, recognize, mask, shift, infill,
// re-score every candidate, choose the least biased acceptable one.
DebiasResult debias(const Detector& detector, const Recognizer& recognizer,
                    const Infiller& infiller, std::string_view text,
                    const DebiasConfig& config = {});

// The shift -> infill -> score -> choose stage on an already masked text;
// shared by debias() and the random-masking ablation.
DebiasResult debias_masked(const Detector& detector, const Infiller& infiller,
                           const MaskedText& masked, double original_probability,
                           const DebiasConfig& config = {});

// Masks a uniformly pre-selected `fraction` of tokens, each independently
// with probability p. Deterministic per seed; ablation harness only.
MaskedText mask_random(const Document& doc, double fraction, double p,
                       uint64_t seed);

// Bidirectional bigram suggester: scores vocabulary words by how often
// they follow the left context word plus how often the right context word
// follows them, counted over the training sentences. Words attested on
// both sides outrank one-sided matches.
class BigramInfiller final : public Infiller {
  public:
    BigramInfiller() = default;
    explicit BigramInfiller(const std::vector<std::string>& corpus_sentences);

    void add_sentence(std::string_view sentence);

    std::vector<ScoredWord> suggest(const Document& original,
                                    const MaskedInstance& instance,
                                    size_t k) const override;

    size_t vocabulary_size() const { return vocab_.size(); }

  private:
    std::map<std::string, uint32_t> vocab_;
    std::vector<std::string> words_;
    // (left, word) -> count and the mirrored (right, word) -> count.
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> forward_;
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> backward_;
};

}  // namespace dbias
