#include <doctest.h>

#include <random>
#include <sstream>

#include "dbias/pipeline.hpp"
#include "dbias/serialize.hpp"
#include "support/synthetic_mbic.hpp"

using namespace dbias;
namespace ts = dbias::testsupport;

namespace {

struct TrainedBundle {
    DetectorModel detector;
    LexiconRecognizer recognizer;
    BigramInfiller infiller;
};

TrainedBundle train_on(const std::vector<MbicRecord>& records) {
    std::vector<LabeledText> texts;
    std::vector<LexiconRecord> lex_records;
    BigramInfiller infiller;
    for (const auto& rec : records) {
        const bool biased = rec.label == RecordLabel::Biased;
        texts.push_back({rec.sentence, biased ? 1 : 0});
        lex_records.push_back({rec.biased_words, biased});
        if (!biased) infiller.add_sentence(rec.sentence);
    }
    FeatureConfig features;
    features.hash_dimension = 1u << 16;
    return {train_detector(texts, TrainConfig{}, features),
            LexiconRecognizer(build_lexicon(lex_records)), std::move(infiller)};
}

// Mention corpus where a fixed share of biased sentences use a bias word
// withheld from the annotations: the recognizer cannot locate those, so
// they survive de-biasing at the same rate in both groups. Composition is
// scheduled per side (16 % withheld each; 56 % vs 32 % locatable), so the
// groups' planted rates differ but the residual after removal does not.
std::vector<MbicRecord> di_shift_corpus(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<std::string> nouns = {"plan",   "report", "budget",
                                            "speech", "policy", "proposal"};
    const std::vector<std::string> tails = {"on Monday",   "this week",
                                            "after the vote", "in the capital"};
    std::vector<MbicRecord> records;
    size_t side_counter[2] = {0, 0};
    for (size_t i = 0; i < n; ++i) {
        const bool priv = (i % 2) == 0;
        const std::string subject = priv ? "man" : "woman";
        const size_t slot = side_counter[priv ? 0 : 1]++ % 25;
        const size_t locatable_slots = priv ? 14 : 8;
        MbicRecord rec;
        const std::string noun = nouns[rng() % nouns.size()];
        const std::string tail = tails[rng() % tails.size()];
        if (slot < 4) {
            // biased wording the annotations never flagged
            rec.sentence = "The " + subject + " shared the vile " + noun +
                           " about taxes " + tail + ".";
            rec.label = RecordLabel::Biased;
        } else if (slot < 4 + locatable_slots) {
            rec.sentence = "The " + subject + " shared the alarmist " + noun +
                           " about taxes " + tail + ".";
            rec.biased_words = {"alarmist"};
            rec.label = RecordLabel::Biased;
        } else {
            rec.sentence = "The " + subject + " shared the routine " + noun +
                           " about taxes " + tail + ".";
            rec.label = RecordLabel::NonBiased;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("run_pipeline on empty input") {
    const auto bundle = train_on(ts::make_planted_corpus(200, 1));
    CHECK(run_pipeline(bundle.detector, bundle.recognizer, bundle.infiller, {})
              .empty());
}

TEST_CASE("non-biased batches pass through byte-identical") {
    const auto bundle = train_on(ts::make_planted_corpus(400, 2));
    std::vector<std::string> texts;
    for (const auto& rec : ts::make_planted_corpus(60, 77)) {
        if (rec.label == RecordLabel::NonBiased) texts.push_back(rec.sentence);
    }
    const auto results = run_pipeline(bundle.detector, bundle.recognizer,
                                      bundle.infiller, texts);
    REQUIRE(results.size() == texts.size());
    for (size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].debiased_text == texts[i]);
        for (const auto& sentence : results[i].sentences) {
            CHECK(sentence.status == DebiasStatus::NotBiased);
        }
    }
}

TEST_CASE("planted batches produce spans and candidates") {
    const auto bundle = train_on(ts::make_planted_corpus(600, 3));
    std::vector<std::string> texts;
    for (const auto& rec : ts::make_planted_corpus(80, 91)) {
        if (rec.label == RecordLabel::Biased) texts.push_back(rec.sentence);
        if (texts.size() == 20) break;
    }
    const auto results = run_pipeline(bundle.detector, bundle.recognizer,
                                      bundle.infiller, texts);
    for (const auto& doc : results) {
        REQUIRE(doc.sentences.size() == 1);
        const auto& r = doc.sentences[0];
        CHECK(r.spans.size() >= 1);
        CHECK(r.candidates.size() >= 1);
        CHECK(doc.mean_probability_after <= doc.mean_probability_before);
    }
}

TEST_CASE("multi-sentence documents aggregate in order") {
    const auto bundle = train_on(ts::make_planted_corpus(400, 4));
    const auto corpus = ts::make_planted_corpus(6, 5);
    std::string article;
    for (const auto& rec : corpus) article += rec.sentence + " ";
    const auto results = run_pipeline(bundle.detector, bundle.recognizer,
                                      bundle.infiller, {article});
    REQUIRE(results.size() == 1);
    CHECK(results[0].sentences.size() == corpus.size());
    // output re-joins with the original separators
    std::string rebuilt;
    for (const auto& s : results[0].sentences) {
        rebuilt += s.chosen ? s.chosen->text : s.original;
    }
    CHECK(results[0].debiased_text == rebuilt);
}

TEST_CASE("stratified split is deterministic and stratified") {
    const auto records = ts::make_synthetic_mbic({.n_records = 2000, .seed = 6});
    const auto a = stratified_split(records, 42);
    const auto b = stratified_split(records, 42);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const auto c = stratified_split(records, 43);
    CHECK(a.test != c.test);

    CHECK(a.train.size() + a.test.size() == records.size());
    size_t test_pos = 0;
    size_t total_pos = 0;
    for (size_t idx : a.test) {
        test_pos += records[idx].label == RecordLabel::Biased ? 1 : 0;
    }
    for (const auto& rec : records) {
        total_pos += rec.label == RecordLabel::Biased ? 1 : 0;
    }
    const double test_rate =
        static_cast<double>(test_pos) / static_cast<double>(a.test.size());
    const double total_rate =
        static_cast<double>(total_pos) / static_cast<double>(records.size());
    CHECK(std::abs(test_rate - total_rate) < 0.01);
}

TEST_CASE("disabled debiasing makes before and after identical") {
    const auto records = ts::make_synthetic_mbic({.n_records = 1500, .seed = 7});
    EvaluateOptions options;
    options.debias_enabled = false;
    options.train.epochs = 60;
    options.features.hash_dimension = 1u << 16;
    const auto report =
        evaluate_before_after(records, GroupConfig::builtin(), options);
    CHECK(to_json(report.before).dump() == to_json(report.after).dump());
    CHECK(report.per_document.empty());
}

TEST_CASE("debiasing lowers detector accuracy on transformed text") {
    const auto records = ts::make_planted_corpus(1200, 8);
    EvaluateOptions options;
    options.train.epochs = 120;
    options.features.hash_dimension = 1u << 16;
    const auto report =
        evaluate_before_after(records, GroupConfig::builtin(), options);
    REQUIRE(report.before.classification.accuracy.has_value());
    REQUIRE(report.after.classification.accuracy.has_value());
    CHECK(*report.after.classification.accuracy <
          *report.before.classification.accuracy);
}

TEST_CASE("debiasing moves prediction DI toward one") {
    const auto records = di_shift_corpus(4000, 9);
    EvaluateOptions options;
    options.train.epochs = 150;
    options.features.hash_dimension = 1u << 16;
    const auto report =
        evaluate_before_after(records, GroupConfig::builtin(), options);
    REQUIRE(report.before.di_pred_pooled.has_value());
    REQUIRE(report.after.di_pred_pooled.has_value());
    const double before = report.before.di_pred_pooled->di;
    const double after = report.after.di_pred_pooled->di;
    CHECK(std::abs(after - 1.0) < std::abs(before - 1.0));
}

TEST_CASE("evaluation is deterministic end to end") {
    const auto records = ts::make_synthetic_mbic({.n_records = 800, .seed = 10});
    EvaluateOptions options;
    options.train.epochs = 40;
    options.features.hash_dimension = 1u << 15;
    const auto a = evaluate_before_after(records, GroupConfig::builtin(), options);
    const auto b = evaluate_before_after(records, GroupConfig::builtin(), options);
    CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("ablation at p = 0 accepts nothing and reruns identically") {
    const auto corpus = ts::make_planted_corpus(500, 11);
    const auto bundle = train_on(corpus);
    std::vector<std::string> texts;
    for (const auto& rec : ts::make_planted_corpus(60, 12)) {
        texts.push_back(rec.sentence);
    }
    const auto rows = ablation_masking(bundle.detector, bundle.recognizer,
                                       bundle.infiller, texts, {0.0, 0.5}, 0.05,
                                       99);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].p == 0.0);
    CHECK(rows[0].accepted == 0);
    CHECK(rows[0].success_rate == 0.0);
    CHECK(rows.back().exact);
    CHECK(rows.back().label == "exact");

    const auto rerun = ablation_masking(bundle.detector, bundle.recognizer,
                                        bundle.infiller, texts, {0.0, 0.5}, 0.05,
                                        99);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].accepted == rerun[i].accepted);
        CHECK(rows[i].success_rate == rerun[i].success_rate);
    }
}

}  // TEST_SUITE
