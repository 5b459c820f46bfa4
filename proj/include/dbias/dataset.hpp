#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbias/metrics.hpp"

namespace dbias {

enum class RecordLabel { NonBiased = 0, Biased = 1 };

struct MbicRecord {
    std::string sentence;
    std::string news_link;
    std::string outlet;
    std::string topic;
    std::string annotator_age;        // numeric string or bucket name
    std::string annotator_gender;
    std::string annotator_education;
    std::vector<std::string> biased_words;
    RecordLabel label = RecordLabel::NonBiased;
};

// Column names and cell conventions; MBIC releases vary, so the mapping
// is declared rather than hard-coded.
struct CsvMapping {
    std::string sentence = "sentence";
    std::string news_link = "news_link";
    std::string outlet = "outlet";
    std::string topic = "topic";
    std::string age = "age";
    std::string gender = "gender";
    std::string education = "education";
    std::string biased_words = "biased_words";
    std::string label = "label";
    char biased_words_delimiter = ';';
    std::string biased_value = "Biased";
    std::string non_biased_value = "Non-biased";
};

struct RowError {
    size_t row = 0;  // 1-based data row
    std::string message;
};

struct LoadResult {
    std::vector<MbicRecord> records;
    std::vector<RowError> errors;  // malformed rows, never silently dropped
};

// Throws std::runtime_error naming the column when a required header is
// missing. Optional columns (link, outlet, topic, annotator fields) load
// as empty when absent.
LoadResult load_mbic(const std::string& path, const CsvMapping& mapping = {});
LoadResult load_mbic_stream(std::istream& in, const CsvMapping& mapping = {});

void save_mbic(const std::vector<MbicRecord>& records, const std::string& path,
               const CsvMapping& mapping = {});
void save_mbic_stream(const std::vector<MbicRecord>& records, std::ostream& out,
                      const CsvMapping& mapping = {});

// Canonical JSONL form, one record per line.
void save_jsonl(const std::vector<MbicRecord>& records, std::ostream& out);
std::vector<MbicRecord> load_jsonl(std::istream& in);

struct BucketBoundaries {
    int young_below = 30;   // age < young_below  => young
    int elder_above = 60;   // age > elder_above  => elder, else adult
};

// Age to {young, adult, elder}; education to {high school, undergraduate,
// graduate} by keyword; unmapped values become "unknown".
std::string bucketize_age(const std::string& age, const BucketBoundaries& b = {});
std::string bucketize_education(const std::string& education);
MbicRecord bucketize(MbicRecord record, const BucketBoundaries& b = {});

struct GroupValue {
    std::string value;                        // e.g. "Female"
    std::vector<std::string> identity_terms;  // normalized 1-3 token terms
};

struct GroupSpec {
    std::string attribute;  // e.g. "gender"
    std::vector<GroupValue> privileged;
    std::vector<GroupValue> unprivileged;
};

struct GroupConfig {
    std::vector<GroupSpec> groups;
    BucketBoundaries buckets;

    static GroupConfig load_file(const std::string& path);
    static GroupConfig from_json(const std::string& json_text);
    std::string to_json() const;

    // Identities named in the groups the pipeline ships with.
    static GroupConfig builtin();
};

// True when the sentence mentions any of the terms (token-sequence match,
// case-insensitive).
bool mentions_any(const std::string& sentence,
                  const std::vector<std::string>& terms);

// Membership decided by identity-term mention in the sentence. Sentences
// mentioning both sides (or neither) are excluded, never double-counted.
// Throws when either group ends up empty.
std::pair<GroupOutcome, GroupOutcome> group_outcomes(
    const std::vector<MbicRecord>& records, const GroupSpec& spec);

// Same split, with the positive outcome taken from a caller-supplied
// predicate instead of the stored label.
std::pair<GroupOutcome, GroupOutcome> group_outcomes_with(
    const std::vector<MbicRecord>& records, const GroupSpec& spec,
    const std::vector<int>& positives);

// Per identity value, the number of biased words listed on sentences that
// mention the identity.
std::map<std::string, uint64_t> identity_bias_counts(
    const std::vector<MbicRecord>& records, const std::vector<GroupSpec>& specs);

}  // namespace dbias
