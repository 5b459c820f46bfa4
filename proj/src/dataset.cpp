#include "dbias/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dbias/recognition.hpp"
#include "dbias/text.hpp"

namespace dbias {

namespace {

using nlohmann::json;

// RFC-4180 style: quoted fields may contain commas, quotes ("") and
// newlines. Returns one row per record.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_started = false;

    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                row_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !field.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                    row_started = false;
                }
                break;
            default:
                field.push_back(c);
                row_started = true;
                break;
        }
    }
    if (row_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

// Either a delimiter-separated cell or a bracketed quoted list, which is
// how some MBIC releases serialize the words column.
std::vector<std::string> parse_biased_words(const std::string& cell, char delimiter) {
    std::vector<std::string> words;
    const std::string trimmed = trim(cell);
    if (trimmed.empty()) return words;
    if (trimmed.front() == '[') {
        std::string current;
        bool in_quotes = false;
        char quote = '\0';
        for (size_t i = 1; i < trimmed.size(); ++i) {
            const char c = trimmed[i];
            if (in_quotes) {
                if (c == quote) {
                    in_quotes = false;
                    if (!trim(current).empty()) words.push_back(trim(current));
                    current.clear();
                } else {
                    current.push_back(c);
                }
            } else if (c == '\'' || c == '"') {
                in_quotes = true;
                quote = c;
            }
        }
        return words;
    }
    std::string current;
    std::istringstream ss(trimmed);
    while (std::getline(ss, current, delimiter)) {
        const std::string word = trim(current);
        if (!word.empty()) words.push_back(word);
    }
    return words;
}

}  // namespace

LoadResult load_mbic_stream(std::istream& in, const CsvMapping& mapping) {
    const auto rows = parse_csv(in);
    if (rows.empty()) throw std::runtime_error("empty dataset: no header row");

    std::map<std::string, size_t> header;
    for (size_t i = 0; i < rows[0].size(); ++i) {
        header[lower(trim(rows[0][i]))] = i;
    }
    auto column = [&](const std::string& name,
                      bool required) -> std::optional<size_t> {
        const auto it = header.find(lower(name));
        if (it == header.end()) {
            if (required) {
                throw std::runtime_error("missing required column: " + name);
            }
            return std::nullopt;
        }
        return it->second;
    };

    const auto sentence_col = column(mapping.sentence, true);
    const auto label_col = column(mapping.label, true);
    const auto words_col = column(mapping.biased_words, false);
    const auto link_col = column(mapping.news_link, false);
    const auto outlet_col = column(mapping.outlet, false);
    const auto topic_col = column(mapping.topic, false);
    const auto age_col = column(mapping.age, false);
    const auto gender_col = column(mapping.gender, false);
    const auto education_col = column(mapping.education, false);

    LoadResult result;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](const std::optional<size_t>& col) -> std::string {
            if (!col || *col >= row.size()) return {};
            return row[*col];
        };

        MbicRecord rec;
        rec.sentence = cell(sentence_col);
        if (trim(rec.sentence).empty()) {
            result.errors.push_back({r, "empty sentence"});
            continue;
        }
        const std::string label = trim(cell(label_col));
        if (label == mapping.biased_value) {
            rec.label = RecordLabel::Biased;
        } else if (label == mapping.non_biased_value) {
            rec.label = RecordLabel::NonBiased;
        } else {
            result.errors.push_back({r, "unrecognized label: '" + label + "'"});
            continue;
        }
        rec.news_link = cell(link_col);
        rec.outlet = cell(outlet_col);
        rec.topic = cell(topic_col);
        rec.annotator_age = trim(cell(age_col));
        rec.annotator_gender = trim(cell(gender_col));
        rec.annotator_education = trim(cell(education_col));
        rec.biased_words =
            parse_biased_words(cell(words_col), mapping.biased_words_delimiter);
        result.records.push_back(std::move(rec));
    }
    return result;
}

LoadResult load_mbic(const std::string& path, const CsvMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return load_mbic_stream(in, mapping);
}

void save_mbic_stream(const std::vector<MbicRecord>& records, std::ostream& out,
                      const CsvMapping& mapping) {
    out << mapping.sentence << ',' << mapping.news_link << ',' << mapping.outlet
        << ',' << mapping.topic << ',' << mapping.age << ',' << mapping.gender
        << ',' << mapping.education << ',' << mapping.biased_words << ','
        << mapping.label << '\n';
    for (const auto& rec : records) {
        std::string words;
        for (size_t i = 0; i < rec.biased_words.size(); ++i) {
            if (i > 0) words.push_back(mapping.biased_words_delimiter);
            words += rec.biased_words[i];
        }
        out << csv_escape(rec.sentence) << ',' << csv_escape(rec.news_link) << ','
            << csv_escape(rec.outlet) << ',' << csv_escape(rec.topic) << ','
            << csv_escape(rec.annotator_age) << ','
            << csv_escape(rec.annotator_gender) << ','
            << csv_escape(rec.annotator_education) << ',' << csv_escape(words)
            << ','
            << (rec.label == RecordLabel::Biased ? mapping.biased_value
                                                 : mapping.non_biased_value)
            << '\n';
    }
    if (!out) throw std::runtime_error("dataset: write failed");
}

void save_mbic(const std::vector<MbicRecord>& records, const std::string& path,
               const CsvMapping& mapping) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_mbic_stream(records, out, mapping);
}

void save_jsonl(const std::vector<MbicRecord>& records, std::ostream& out) {
    for (const auto& rec : records) {
        json j{{"sentence", rec.sentence},
               {"news_link", rec.news_link},
               {"outlet", rec.outlet},
               {"topic", rec.topic},
               {"age", rec.annotator_age},
               {"gender", rec.annotator_gender},
               {"education", rec.annotator_education},
               {"biased_words", rec.biased_words},
               {"label", rec.label == RecordLabel::Biased ? "Biased" : "Non-biased"}};
        out << j.dump() << '\n';
    }
}

std::vector<MbicRecord> load_jsonl(std::istream& in) {
    std::vector<MbicRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("jsonl: parse error at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        MbicRecord rec;
        rec.sentence = j.value("sentence", "");
        rec.news_link = j.value("news_link", "");
        rec.outlet = j.value("outlet", "");
        rec.topic = j.value("topic", "");
        rec.annotator_age = j.value("age", "");
        rec.annotator_gender = j.value("gender", "");
        rec.annotator_education = j.value("education", "");
        rec.biased_words = j.value("biased_words", std::vector<std::string>{});
        rec.label = j.value("label", "") == "Biased" ? RecordLabel::Biased
                                                     : RecordLabel::NonBiased;
        records.push_back(std::move(rec));
    }
    return records;
}

std::string bucketize_age(const std::string& age, const BucketBoundaries& b) {
    const std::string t = lower(trim(age));
    if (t.empty()) return "unknown";
    if (t == "young" || t == "adult" || t == "elder") return t;
    try {
        size_t consumed = 0;
        const int value = std::stoi(t, &consumed);
        if (consumed != t.size()) return "unknown";
        if (value < b.young_below) return "young";
        if (value > b.elder_above) return "elder";
        return "adult";
    } catch (const std::exception&) {
        return "unknown";
    }
}

std::string bucketize_education(const std::string& education) {
    const std::string t = lower(trim(education));
    if (t.empty()) return "unknown";
    // Keyword buckets; order matters ("postgraduate" lands in graduate).
    static const std::vector<std::pair<std::string, std::string>> keywords = {
        {"phd", "graduate"},          {"ph.d", "graduate"},
        {"doctor", "graduate"},       {"master", "graduate"},
        {"graduate", "graduate"},     {"msc", "graduate"},
        {"mba", "graduate"},          {"bachelor", "undergraduate"},
        {"undergrad", "undergraduate"}, {"bsc", "undergraduate"},
        {"college", "undergraduate"}, {"university", "undergraduate"},
        {"associate", "undergraduate"}, {"high school", "high school"},
        {"highschool", "high school"}, {"secondary", "high school"},
    };
    // "undergraduate" must not fall into the "graduate" bucket.
    if (t.find("undergrad") != std::string::npos) return "undergraduate";
    for (const auto& [key, bucket] : keywords) {
        if (t.find(key) != std::string::npos) return bucket;
    }
    return "unknown";
}

MbicRecord bucketize(MbicRecord record, const BucketBoundaries& b) {
    record.annotator_age = bucketize_age(record.annotator_age, b);
    record.annotator_education = bucketize_education(record.annotator_education);
    return record;
}

GroupConfig GroupConfig::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("group config: parse error: ") +
                                 e.what());
    }
    GroupConfig config;
    if (j.contains("buckets")) {
        config.buckets.young_below = j["buckets"].value("age_young_below", 30);
        config.buckets.elder_above = j["buckets"].value("age_elder_above", 60);
    }
    if (!j.contains("groups") || !j["groups"].is_array()) {
        throw std::runtime_error("group config: missing 'groups' array");
    }
    for (const auto& g : j["groups"]) {
        GroupSpec spec;
        spec.attribute = g.value("attribute", "");
        if (spec.attribute.empty()) {
            throw std::runtime_error("group config: group without attribute");
        }
        auto parse_side = [&](const char* key, std::vector<GroupValue>& side) {
            if (!g.contains(key)) return;
            for (const auto& [value, terms] : g[key].items()) {
                GroupValue gv;
                gv.value = value;
                for (const auto& term : terms) {
                    const std::string norm = normalize_term(term.get<std::string>());
                    if (!norm.empty()) gv.identity_terms.push_back(norm);
                }
                side.push_back(std::move(gv));
            }
        };
        parse_side("privileged", spec.privileged);
        parse_side("unprivileged", spec.unprivileged);
        if (spec.privileged.empty() || spec.unprivileged.empty()) {
            throw std::runtime_error("group config: attribute '" + spec.attribute +
                                     "' needs both privileged and unprivileged values");
        }
        config.groups.push_back(std::move(spec));
    }
    return config;
}

GroupConfig GroupConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open group config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string GroupConfig::to_json() const {
    json groups_json = json::array();
    for (const auto& spec : groups) {
        json g;
        g["attribute"] = spec.attribute;
        for (const auto& gv : spec.privileged) {
            g["privileged"][gv.value] = gv.identity_terms;
        }
        for (const auto& gv : spec.unprivileged) {
            g["unprivileged"][gv.value] = gv.identity_terms;
        }
        groups_json.push_back(std::move(g));
    }
    json j{{"groups", groups_json},
           {"buckets",
            {{"age_young_below", buckets.young_below},
             {"age_elder_above", buckets.elder_above}}}};
    return j.dump(2);
}

GroupConfig GroupConfig::builtin() {
    static const char* kBuiltin = R"json({
  "buckets": {"age_young_below": 30, "age_elder_above": 60},
  "groups": [
    {
      "attribute": "gender",
      "privileged": {
        "Male": ["male", "man", "men", "he", "him", "his", "himself", "mr", "boy", "boys", "father", "son", "husband", "brother"]
      },
      "unprivileged": {
        "Female": ["female", "woman", "women", "she", "her", "hers", "herself", "mrs", "ms", "girl", "girls", "mother", "daughter", "wife", "sister"]
      }
    },
    {
      "attribute": "race",
      "privileged": {
        "White": ["white", "caucasian", "european"]
      },
      "unprivileged": {
        "Black": ["black", "african", "african-american"],
        "Asian": ["asian", "anti-asian", "chinese", "korean"]
      }
    },
    {
      "attribute": "language",
      "privileged": {
        "English speaker": ["english speaker", "english speakers", "native speaker"]
      },
      "unprivileged": {
        "Non-English speaker": ["non-english speaker", "non-english speakers", "immigrant", "immigrants", "foreigner", "foreigners", "migrant", "migrants"]
      }
    },
    {
      "attribute": "age",
      "privileged": {
        "Young": ["young", "youth", "teenager", "teenagers", "millennial", "millennials"]
      },
      "unprivileged": {
        "Older": ["elderly", "older", "old people", "senior", "seniors", "retiree", "retirees", "boomer", "boomers"]
      }
    },
    {
      "attribute": "education",
      "privileged": {
        "College degree": ["college", "university", "professor", "professors", "academic", "academics", "graduate", "graduates"]
      },
      "unprivileged": {
        "High school": ["high school", "dropout", "dropouts", "uneducated", "unskilled"]
      }
    }
  ]
})json";
    return from_json(kBuiltin);
}

namespace {

// Lowercased word tokens of the sentence, for identity-term matching.
std::vector<std::string> sentence_tokens(const std::string& sentence) {
    std::vector<std::string> tokens;
    for (const auto& tok : tokenize(sentence).tokens) {
        if (!is_word_token(tok)) {
            tokens.emplace_back();  // punctuation breaks term matches
            continue;
        }
        tokens.push_back(lower(tok.surface));
    }
    return tokens;
}

bool tokens_mention(const std::vector<std::string>& tokens,
                    const std::vector<std::string>& terms) {
    for (const auto& term : terms) {
        std::vector<std::string> parts;
        std::istringstream ss(term);
        std::string part;
        while (ss >> part) parts.push_back(part);
        if (parts.empty()) continue;
        for (size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
            bool match = true;
            for (size_t k = 0; k < parts.size(); ++k) {
                if (tokens[i + k] != parts[k]) {
                    match = false;
                    break;
                }
            }
            if (match) return true;
        }
    }
    return false;
}

std::vector<std::string> side_terms(const std::vector<GroupValue>& side) {
    std::vector<std::string> terms;
    for (const auto& gv : side) {
        terms.insert(terms.end(), gv.identity_terms.begin(),
                     gv.identity_terms.end());
    }
    return terms;
}

}  // namespace

bool mentions_any(const std::string& sentence,
                  const std::vector<std::string>& terms) {
    return tokens_mention(sentence_tokens(sentence), terms);
}

std::pair<GroupOutcome, GroupOutcome> group_outcomes_with(
    const std::vector<MbicRecord>& records, const GroupSpec& spec,
    const std::vector<int>& positives) {
    if (!positives.empty() && positives.size() != records.size()) {
        throw std::invalid_argument("positives length mismatch");
    }
    const auto priv_terms = side_terms(spec.privileged);
    const auto unpriv_terms = side_terms(spec.unprivileged);

    GroupOutcome unpriv{spec.attribute + ":unprivileged", false, 0, 0};
    GroupOutcome priv{spec.attribute + ":privileged", true, 0, 0};
    for (size_t i = 0; i < records.size(); ++i) {
        const auto tokens = sentence_tokens(records[i].sentence);
        const bool in_unpriv = tokens_mention(tokens, unpriv_terms);
        const bool in_priv = tokens_mention(tokens, priv_terms);
        if (in_unpriv == in_priv) continue;  // neither, or ambiguous both
        const bool positive = positives.empty()
                                  ? records[i].label == RecordLabel::Biased
                                  : positives[i] != 0;
        auto& side = in_unpriv ? unpriv : priv;
        side.num_instances += 1;
        if (positive) side.num_positives += 1;
    }
    if (unpriv.num_instances == 0 || priv.num_instances == 0) {
        throw std::runtime_error("empty group for attribute '" + spec.attribute +
                                 "'");
    }
    return {unpriv, priv};
}

std::pair<GroupOutcome, GroupOutcome> group_outcomes(
    const std::vector<MbicRecord>& records, const GroupSpec& spec) {
    return group_outcomes_with(records, spec, {});
}

std::map<std::string, uint64_t> identity_bias_counts(
    const std::vector<MbicRecord>& records, const std::vector<GroupSpec>& specs) {
    std::map<std::string, uint64_t> counts;
    for (const auto& rec : records) {
        if (rec.biased_words.empty()) continue;
        const auto tokens = sentence_tokens(rec.sentence);
        for (const auto& spec : specs) {
            for (const auto* side : {&spec.privileged, &spec.unprivileged}) {
                for (const auto& gv : *side) {
                    if (tokens_mention(tokens, gv.identity_terms)) {
                        counts[gv.value] += rec.biased_words.size();
                    }
                }
            }
        }
    }
    return counts;
}

}  // namespace dbias
