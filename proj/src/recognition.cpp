#include "dbias/recognition.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dbias {

std::string normalize_term(std::string_view phrase) {
    const Document doc = tokenize(phrase);
    std::string out;
    size_t words = 0;
    for (const auto& tok : doc.tokens) {
        if (!is_word_token(tok)) continue;
        if (++words > 3) return {};
        if (!out.empty()) out.push_back(' ');
        for (char c : tok.surface) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

Lexicon build_lexicon(const std::vector<LexiconRecord>& records) {
    Lexicon lex;
    for (const auto& rec : records) {
        for (const auto& phrase : rec.biased_words) {
            const std::string term = normalize_term(phrase);
            if (term.empty()) continue;
            auto& entry = lex.entries[term];
            entry.count_total += 1;
            if (rec.biased) entry.count_in_biased += 1;
        }
    }
    return lex;
}

std::vector<BiasSpan> LexiconRecognizer::recognize(const Document& doc) const {
    std::vector<BiasSpan> spans;
    const size_t n = doc.tokens.size();
    size_t i = 0;
    while (i < n) {
        if (!is_word_token(doc.tokens[i])) {
            ++i;
            continue;
        }
        bool matched = false;
        for (size_t window = 3; window >= 1; --window) {
            if (i + window > n) continue;
            bool clean = true;
            for (size_t k = i; k < i + window; ++k) {
                if (!is_word_token(doc.tokens[k])) {
                    clean = false;
                    break;
                }
            }
            if (!clean) continue;
            const Span candidate = make_span(doc, i, i + window - 1);
            const auto it = lexicon_.entries.find(normalized_span_text(doc, candidate));
            if (it == lexicon_.entries.end()) continue;
            const auto& entry = it->second;
            const double score =
                entry.count_total == 0
                    ? 0.0
                    : static_cast<double>(entry.count_in_biased) /
                          static_cast<double>(entry.count_total);
            if (score < min_score_) continue;
            spans.push_back({candidate, score});
            i += window;
            matched = true;
            break;
        }
        if (!matched) ++i;
    }
    return spans;
}

TagSequence spans_to_bio(const Document& doc, const std::vector<BiasSpan>& spans) {
    TagSequence seq;
    seq.tags.assign(doc.tokens.size(), BioTag::O);
    std::vector<BiasSpan> sorted = spans;
    std::sort(sorted.begin(), sorted.end(), [](const BiasSpan& a, const BiasSpan& b) {
        return a.span.first_token < b.span.first_token;
    });
    size_t prev_end = 0;
    bool first = true;
    for (const auto& bs : sorted) {
        if (bs.span.first_token > bs.span.last_token ||
            bs.span.last_token >= doc.tokens.size()) {
            throw std::invalid_argument("span out of range");
        }
        if (!first && bs.span.first_token <= prev_end) {
            throw std::invalid_argument("overlapping spans");
        }
        seq.tags[bs.span.first_token] = BioTag::B;
        for (size_t t = bs.span.first_token + 1; t <= bs.span.last_token; ++t) {
            seq.tags[t] = BioTag::I;
        }
        prev_end = bs.span.last_token;
        first = false;
    }
    return seq;
}

std::vector<BiasSpan> bio_to_spans(const Document& doc, const TagSequence& tags) {
    if (tags.tags.size() != doc.tokens.size()) {
        throw std::invalid_argument("tag sequence length mismatch");
    }
    std::vector<BiasSpan> spans;
    size_t i = 0;
    while (i < tags.tags.size()) {
        if (tags.tags[i] == BioTag::I) {
            throw std::invalid_argument("I tag without preceding B");
        }
        if (tags.tags[i] == BioTag::O) {
            ++i;
            continue;
        }
        size_t j = i + 1;
        while (j < tags.tags.size() && tags.tags[j] == BioTag::I) ++j;
        spans.push_back({make_span(doc, i, j - 1), 1.0});
        i = j;
    }
    return spans;
}

void Lexicon::save(std::ostream& out) const {
    // std::map iteration gives the sorted order the format requires.
    for (const auto& [term, entry] : entries) {
        out << term << '\t' << entry.count_in_biased << '\t' << entry.count_total
            << '\n';
    }
    if (!out) throw std::runtime_error("lexicon: write failed");
}

void Lexicon::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save(out);
}

Lexicon Lexicon::load(std::istream& in) {
    Lexicon lex;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const size_t tab1 = line.find('\t');
        const size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                      : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            throw std::runtime_error("lexicon: malformed line " + std::to_string(line_no));
        }
        const std::string term = line.substr(0, tab1);
        if (term.empty()) {
            throw std::runtime_error("lexicon: empty term at line " +
                                     std::to_string(line_no));
        }
        LexiconEntry entry;
        try {
            entry.count_in_biased = std::stoull(line.substr(tab1 + 1, tab2 - tab1 - 1));
            entry.count_total = std::stoull(line.substr(tab2 + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("lexicon: bad counts at line " +
                                     std::to_string(line_no));
        }
        if (entry.count_in_biased > entry.count_total) {
            throw std::runtime_error("lexicon: count_in_biased > count_total at line " +
                                     std::to_string(line_no));
        }
        lex.entries[term] = entry;
    }
    return lex;
}

Lexicon Lexicon::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    return load(in);
}

}  // namespace dbias
