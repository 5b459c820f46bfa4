#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dbias/text.hpp"

namespace dbias {

struct LexiconEntry {
    uint64_t count_in_biased = 0;
    uint64_t count_total = 0;
};

// Keys are normalized terms: 1-3 lowercased word tokens joined by single
// spaces. Punctuation tokens are dropped during normalization; phrases
// longer than 3 word tokens are not representable and are skipped.
struct Lexicon {
    std::map<std::string, LexiconEntry> entries;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static Lexicon load(std::istream& in);
    static Lexicon load_file(const std::string& path);
};

// Normalized form of a phrase (empty if nothing survives normalization).
std::string normalize_term(std::string_view phrase);

struct BiasSpan {
    Span span;
    double score = 0.0;  // count_in_biased / count_total of the matched entry
};

enum class BioTag : uint8_t { B, I, O };

struct TagSequence {
    std::vector<BioTag> tags;
};

struct LexiconRecord {
    std::vector<std::string> biased_words;
    bool biased = false;
};

Lexicon build_lexicon(const std::vector<LexiconRecord>& records);

class Recognizer {
  public:
    virtual ~Recognizer() = default;
    // Non-overlapping spans sorted by position.
    virtual std::vector<BiasSpan> recognize(const Document& doc) const = 0;
};

// Longest-match scan against the lexicon: 3-token windows down to 1,
// leftmost-first; windows containing punctuation tokens never match.
class LexiconRecognizer final : public Recognizer {
  public:
    explicit LexiconRecognizer(Lexicon lexicon, double min_score = 0.0)
        : lexicon_(std::move(lexicon)), min_score_(min_score) {}

    std::vector<BiasSpan> recognize(const Document& doc) const override;

    const Lexicon& lexicon() const { return lexicon_; }

  private:
    Lexicon lexicon_;
    double min_score_;
};

// B at each span start, I on continuations, O elsewhere. Throws
// std::invalid_argument on overlapping spans.
TagSequence spans_to_bio(const Document& doc, const std::vector<BiasSpan>& spans);

// Inverse extraction; scores are not recoverable and default to 1.0.
std::vector<BiasSpan> bio_to_spans(const Document& doc, const TagSequence& tags);

}  // namespace dbias
