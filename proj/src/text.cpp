#include "dbias/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace dbias {

namespace utf8 {

uint32_t decode_at(std::string_view text, size_t byte_pos, size_t* byte_len) {
    const auto first = static_cast<unsigned char>(text[byte_pos]);
    size_t len = 1;
    uint32_t cp = first;
    if (first >= 0xF0) {
        len = 4;
        cp = first & 0x07u;
    } else if (first >= 0xE0) {
        len = 3;
        cp = first & 0x0Fu;
    } else if (first >= 0xC0) {
        len = 2;
        cp = first & 0x1Fu;
    }
    if (len > 1) {
        if (byte_pos + len > text.size()) {
            len = 1;
            cp = first;
        } else {
            for (size_t i = 1; i < len; ++i) {
                const auto cont = static_cast<unsigned char>(text[byte_pos + i]);
                if ((cont & 0xC0u) != 0x80u) {  // malformed continuation
                    len = 1;
                    cp = first;
                    break;
                }
                cp = (cp << 6) | (cont & 0x3Fu);
            }
        }
    }
    if (byte_len != nullptr) *byte_len = len;
    return cp;
}

std::vector<size_t> code_point_offsets(std::string_view text) {
    std::vector<size_t> offsets;
    offsets.reserve(text.size() + 1);
    size_t pos = 0;
    while (pos < text.size()) {
        offsets.push_back(pos);
        size_t len = 1;
        decode_at(text, pos, &len);
        pos += len;
    }
    offsets.push_back(text.size());
    return offsets;
}

size_t length(std::string_view text) { return code_point_offsets(text).size() - 1; }

std::string slice(std::string_view text, size_t first, size_t last) {
    const auto offsets = code_point_offsets(text);
    const size_t n = offsets.size() - 1;
    first = std::min(first, n);
    last = std::min(last, n);
    if (first >= last) return {};
    return std::string(text.substr(offsets[first], offsets[last] - offsets[first]));
}

}  // namespace utf8

namespace {

bool is_space_cp(uint32_t cp) {
    if (cp < 128) return std::isspace(static_cast<int>(cp)) != 0;
    return cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
           cp == 0x2029 || cp == 0x202F || cp == 0x3000;
}

// ASCII alphanumerics and all non-ASCII, non-space code points count as
// word constituents; ASCII punctuation does not.
bool is_word_cp(uint32_t cp) {
    if (cp < 128) return std::isalnum(static_cast<int>(cp)) != 0;
    return !is_space_cp(cp);
}

bool is_joiner_cp(uint32_t cp) {
    return cp == '-' || cp == '\'' || cp == 0x2019;
}

bool is_terminal_cp(uint32_t cp) { return cp == '.' || cp == '!' || cp == '?'; }

bool is_closing_cp(uint32_t cp) {
    return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x2019 ||
           cp == 0x201D;
}

bool is_opening_quote_cp(uint32_t cp) {
    return cp == '"' || cp == '\'' || cp == 0x2018 || cp == 0x201C;
}

struct DecodedText {
    std::vector<uint32_t> cps;
    std::vector<size_t> byte_offsets;  // size cps.size() + 1
};

DecodedText decode(std::string_view text) {
    DecodedText out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t len = 1;
        out.cps.push_back(utf8::decode_at(text, pos, &len));
        out.byte_offsets.push_back(pos);
        pos += len;
    }
    out.byte_offsets.push_back(text.size());
    return out;
}

const std::array<std::string_view, 34> kDefaultAbbreviations = {
    "mr",  "mrs", "ms",  "dr",   "prof", "sen",  "rep", "gov", "gen",
    "col", "sgt", "lt",  "st",   "mt",   "vs",   "inc", "ltd", "co",
    "corp", "jan", "feb", "mar",  "apr",  "jun",  "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",  "no",   "dept", "approx"};

bool is_guarded_word(std::string_view word,
                     const SentenceSplitOptions& opts) {
    if (word.empty()) return false;
    // Single capital letters read as initials ("A. Lincoln").
    if (word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0]))) {
        return true;
    }
    std::string lower(word);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto abbr : kDefaultAbbreviations) {
        if (lower == abbr) return true;
    }
    for (const auto& abbr : opts.extra_abbreviations) {
        if (lower == abbr) return true;
    }
    return false;
}

}  // namespace

std::vector<std::pair<size_t, size_t>> split_sentence_ranges(
    std::string_view text, const SentenceSplitOptions& opts) {
    const DecodedText dec = decode(text);
    const size_t n = dec.cps.size();
    std::vector<std::pair<size_t, size_t>> ranges;
    if (n == 0) return ranges;

    size_t begin = 0;
    size_t i = 0;
    while (i < n) {
        if (!is_terminal_cp(dec.cps[i])) {
            ++i;
            continue;
        }
        const bool is_period = dec.cps[i] == '.';
        size_t j = i;
        while (j < n && (is_terminal_cp(dec.cps[j]) || is_closing_cp(dec.cps[j]))) ++j;
        size_t ws_end = j;
        while (ws_end < n && is_space_cp(dec.cps[ws_end])) ++ws_end;
        if (ws_end == j || ws_end == n) {  // no whitespace after terminal, or EOF
            i = j;
            continue;
        }
        uint32_t next = dec.cps[ws_end];
        if (is_opening_quote_cp(next) && ws_end + 1 < n) next = dec.cps[ws_end + 1];
        const bool capital_follows = next < 128 && std::isupper(static_cast<int>(next));
        if (!capital_follows) {
            i = j;
            continue;
        }
        if (is_period && opts.abbreviation_guard) {
            // Word immediately before the terminal run.
            size_t w_end = i;
            size_t w_begin = w_end;
            while (w_begin > 0 && (is_word_cp(dec.cps[w_begin - 1]) ||
                                   is_joiner_cp(dec.cps[w_begin - 1]))) {
                --w_begin;
            }
            std::string word = utf8::slice(text, w_begin, w_end);
            if (is_guarded_word(word, opts)) {
                i = j;
                continue;
            }
        }
        ranges.emplace_back(begin, ws_end);
        begin = ws_end;
        i = ws_end;
    }
    if (begin < n) ranges.emplace_back(begin, n);
    return ranges;
}

std::vector<std::string> split_sentences(std::string_view text,
                                         const SentenceSplitOptions& opts) {
    std::vector<std::string> out;
    for (const auto& [first, last] : split_sentence_ranges(text, opts)) {
        out.push_back(utf8::slice(text, first, last));
    }
    return out;
}

Document tokenize(std::string_view text, std::string id) {
    Document doc;
    doc.id = std::move(id);
    doc.raw_text.assign(text);

    const DecodedText dec = decode(text);
    const size_t n = dec.cps.size();
    size_t i = 0;
    while (i < n) {
        if (is_space_cp(dec.cps[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        if (is_word_cp(dec.cps[i])) {
            ++j;
            while (j < n) {
                if (is_word_cp(dec.cps[j])) {
                    ++j;
                } else if (is_joiner_cp(dec.cps[j]) && j + 1 < n &&
                           is_word_cp(dec.cps[j + 1])) {
                    j += 2;
                } else {
                    break;
                }
            }
        } else {
            ++j;  // punctuation: one code point per token
        }
        Token tok;
        tok.start = i;
        tok.end = j;
        tok.surface.assign(text.substr(dec.byte_offsets[i],
                                       dec.byte_offsets[j] - dec.byte_offsets[i]));
        doc.tokens.push_back(std::move(tok));
        i = j;
    }

    // Group tokens by the sentence piece containing their first character.
    const auto ranges = split_sentence_ranges(text, {});
    size_t piece = 0;
    size_t sent_first = 0;
    size_t sent_piece = 0;
    for (size_t t = 0; t < doc.tokens.size(); ++t) {
        while (piece + 1 < ranges.size() && doc.tokens[t].start >= ranges[piece].second) {
            ++piece;
        }
        if (t == 0) {
            sent_piece = piece;
        } else if (piece != sent_piece) {
            doc.sentence_bounds.push_back({sent_first, t - 1});
            sent_first = t;
            sent_piece = piece;
        }
    }
    if (!doc.tokens.empty()) {
        doc.sentence_bounds.push_back({sent_first, doc.tokens.size() - 1});
    }
    return doc;
}

bool is_word_token(const Token& token) {
    size_t len = 1;
    const uint32_t cp = utf8::decode_at(token.surface, 0, &len);
    if (len < token.surface.size()) return true;  // multi-code-point surface
    if (cp < 128) return std::isalnum(static_cast<int>(cp)) != 0;
    return true;
}

Span make_span(const Document& doc, size_t first_token, size_t last_token) {
    if (first_token > last_token || last_token >= doc.tokens.size()) {
        throw std::invalid_argument("span out of range");
    }
    Span span;
    span.first_token = first_token;
    span.last_token = last_token;
    span.surface = utf8::slice(doc.raw_text, doc.tokens[first_token].start,
                               doc.tokens[last_token].end);
    return span;
}

std::string normalized_span_text(const Document& doc, const Span& span) {
    std::string out;
    for (size_t t = span.first_token; t <= span.last_token; ++t) {
        if (!out.empty()) out.push_back(' ');
        for (char c : doc.tokens[t].surface) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

std::string detokenize(const Document& doc,
                       const std::map<Span, std::string, SpanOrder>& replacements) {
    for (const auto& [span, _] : replacements) {
        if (span.first_token > span.last_token ||
            span.last_token >= doc.tokens.size()) {
            throw std::invalid_argument("replacement span out of range");
        }
    }
    const Span* prev = nullptr;
    for (const auto& [span, _] : replacements) {
        if (prev != nullptr && span.first_token <= prev->last_token) {
            throw std::invalid_argument("overlapping replacement spans");
        }
        prev = &span;
    }

    const auto byte_offsets = utf8::code_point_offsets(doc.raw_text);
    std::string out;
    out.reserve(doc.raw_text.size());
    size_t cursor = 0;  // byte position
    for (const auto& [span, replacement] : replacements) {
        const size_t span_begin = byte_offsets[doc.tokens[span.first_token].start];
        const size_t span_end = byte_offsets[doc.tokens[span.last_token].end];
        out.append(doc.raw_text, cursor, span_begin - cursor);
        out.append(replacement);
        cursor = span_end;
    }
    out.append(doc.raw_text, cursor, doc.raw_text.size() - cursor);
    return out;
}

}  // namespace dbias
