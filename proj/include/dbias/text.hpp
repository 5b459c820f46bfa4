#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dbias {

// Offsets throughout are Unicode code point indices into the raw text,
// not byte indices. Invalid UTF-8 bytes are treated as single code points.
namespace utf8 {

// Byte offset of every code point start, plus text.size() as a sentinel.
std::vector<size_t> code_point_offsets(std::string_view text);

size_t length(std::string_view text);

// Slice [first, last) in code points.
std::string slice(std::string_view text, size_t first, size_t last);

uint32_t decode_at(std::string_view text, size_t byte_pos, size_t* byte_len);

}  // namespace utf8

struct Token {
    std::string surface;
    size_t start = 0;  // inclusive
    size_t end = 0;    // exclusive
};

struct SentenceBound {
    size_t first_token = 0;
    size_t last_token = 0;  // inclusive
};

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<Token> tokens;
    std::vector<SentenceBound> sentence_bounds;
};

// Token index range, inclusive on both ends.
struct Span {
    size_t first_token = 0;
    size_t last_token = 0;
    std::string surface;
};

struct SentenceSplitOptions {
    bool abbreviation_guard = true;
    // Lowercased, without the trailing period.
    std::vector<std::string> extra_abbreviations;
};

// Rule-based word tokenizer: splits on whitespace and punctuation
// boundaries, keeps intra-word hyphens and apostrophes attached, emits
// each remaining punctuation character as its own token. Sentence bounds
// are filled from split_sentences over the same text.
Document tokenize(std::string_view text, std::string id = {});

// Span over [first, last] with surface taken from the document.
Span make_span(const Document& doc, size_t first_token, size_t last_token);

// False for the single-character punctuation tokens the tokenizer emits.
bool is_word_token(const Token& token);

// Lowercased single-space join of the covered token surfaces.
std::string normalized_span_text(const Document& doc, const Span& span);

struct SpanOrder {
    bool operator()(const Span& a, const Span& b) const {
        return a.first_token != b.first_token ? a.first_token < b.first_token
                                              : a.last_token < b.last_token;
    }
};

// raw_text with each replaced span's character range substituted; all
// other characters are copied through unchanged. Throws
// std::invalid_argument on overlapping or out-of-range spans.
std::string detokenize(const Document& doc,
                       const std::map<Span, std::string, SpanOrder>& replacements);

// Pieces partition the input (concatenation reproduces it exactly); each
// piece carries its terminal punctuation and trailing whitespace.
std::vector<std::string> split_sentences(std::string_view text,
                                         const SentenceSplitOptions& opts = {});

// Same split as code point ranges [first, last).
std::vector<std::pair<size_t, size_t>> split_sentence_ranges(
    std::string_view text, const SentenceSplitOptions& opts = {});

}  // namespace dbias
