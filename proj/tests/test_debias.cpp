#include <doctest.h>

#include <stdexcept>

#include <functional>
#include <random>
#include <set>

#include "dbias/debias.hpp"
#include "dbias/detector.hpp"

using namespace dbias;

namespace {

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

class FnDetector final : public Detector {
  public:
    explicit FnDetector(std::function<double(std::string_view)> fn)
        : fn_(std::move(fn)) {}
    double predict_proba(std::string_view text) const override { return fn_(text); }

  private:
    std::function<double(std::string_view)> fn_;
};

// Scores by how many words from a planted set appear in the text.
FnDetector planted_word_detector(std::set<std::string> planted) {
    return FnDetector([planted = std::move(planted)](std::string_view text) {
        const Document doc = tokenize(text);
        double z = -2.0;
        for (const auto& tok : doc.tokens) {
            std::string lower;
            for (char c : tok.surface) {
                lower.push_back(
                    static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
            if (planted.count(lower)) z += 4.0;
        }
        return sigmoid(z);
    });
}

class FixedInfiller final : public Infiller {
  public:
    explicit FixedInfiller(std::vector<ScoredWord> words) : words_(std::move(words)) {}
    std::vector<ScoredWord> suggest(const Document&, const MaskedInstance&,
                                    size_t k) const override {
        auto out = words_;
        if (out.size() > k) out.resize(k);
        return out;
    }

  private:
    std::vector<ScoredWord> words_;
};

const char* kHeadline =
    "Billie Eilish issues apology for mouthing an anti-Asian derogatory term in "
    "a resurfaced video.";

std::vector<Span> headline_spans(const Document& doc) {
    // "mouthing" and "derogatory term"
    return {make_span(doc, 5, 5), make_span(doc, 8, 9)};
}

}  // namespace

TEST_SUITE("debias") {

TEST_CASE("mask_spans with no spans leaves the text unchanged") {
    const auto doc = tokenize("a plain sentence");
    const auto masked = mask_spans(doc, {});
    CHECK(masked.rendering == doc.raw_text);
    CHECK(masked.masked_spans.empty());
}

TEST_CASE("mask_spans renders the two-mask headline") {
    const auto doc = tokenize(kHeadline);
    const auto masked = mask_spans(doc, headline_spans(doc));
    CHECK(masked.rendering ==
          "Billie Eilish issues apology for [MASK] an anti-Asian [MASK] in a "
          "resurfaced video.");
    CHECK(count_occurrences(masked.rendering, "[MASK]") == masked.masked_spans.size());
}

TEST_CASE("mask count equals span count on random spans") {
    std::mt19937_64 rng(21);
    const auto doc = tokenize(
        "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16 w17 w18 w19");
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<Span> spans;
        size_t next = 0;
        while (next < doc.tokens.size()) {
            const size_t first = next + rng() % 4;
            if (first >= doc.tokens.size()) break;
            const size_t last = std::min(first + rng() % 3, doc.tokens.size() - 1);
            spans.push_back(make_span(doc, first, last));
            next = last + 2;
        }
        const auto masked = mask_spans(doc, spans);
        CHECK(count_occurrences(masked.rendering, "[MASK]") == spans.size());
    }
}

TEST_CASE("mask_spans rejects overlap") {
    const auto doc = tokenize("a b c d");
    CHECK_THROWS_AS(mask_spans(doc, {make_span(doc, 0, 2), make_span(doc, 2, 3)}),
                    std::invalid_argument);
}

TEST_CASE("shift_decompose of one span equals the rendering") {
    const auto doc = tokenize("the radical plan failed");
    const auto masked = mask_spans(doc, {make_span(doc, 1, 1)});
    const auto instances = shift_decompose(masked);
    REQUIRE(instances.size() == 1);
    CHECK(instances[0].text == masked.rendering);
    CHECK(instances[0].text == "the [MASK] plan failed");
}

TEST_CASE("shift_decompose splits the two-mask headline") {
    const auto doc = tokenize(kHeadline);
    const auto instances = shift_decompose(mask_spans(doc, headline_spans(doc)));
    REQUIRE(instances.size() == 2);
    CHECK(instances[0].text ==
          "Billie Eilish issues apology for [MASK] an anti-Asian derogatory term "
          "in a resurfaced video.");
    CHECK(instances[1].text ==
          "Billie Eilish issues apology for mouthing an anti-Asian [MASK] in a "
          "resurfaced video.");
}

TEST_CASE("each instance masks exactly one span") {
    std::mt19937_64 rng(22);
    const auto doc = tokenize(
        "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9 t10 t11 t12 t13 t14 t15");
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<Span> spans;
        size_t next = rng() % 3;
        while (next < doc.tokens.size()) {
            const size_t last = std::min(next + rng() % 2, doc.tokens.size() - 1);
            spans.push_back(make_span(doc, next, last));
            next = last + 2 + rng() % 3;
        }
        if (spans.empty()) continue;
        const auto instances = shift_decompose(mask_spans(doc, spans));
        REQUIRE(instances.size() == spans.size());
        for (size_t i = 0; i < instances.size(); ++i) {
            CHECK(count_occurrences(instances[i].text, "[MASK]") == 1);
            // differs from the original only within span i
            std::map<Span, std::string, SpanOrder> only;
            only.emplace(spans[i], std::string(kMaskToken));
            CHECK(instances[i].text == detokenize(doc, only));
        }
    }
}

TEST_CASE("bigram infiller ranks the attested word first") {
    BigramInfiller infiller({"You should buy the information about storms",
                             "They buy the information about budgets",
                             "Somebody questioned the information about it"});
    const auto doc = tokenize("Don't buy the hype about tornadoes");
    const auto masked = mask_spans(doc, {make_span(doc, 3, 3)});
    const auto instances = shift_decompose(masked);
    const auto suggestions = suggest_topk(infiller, doc, instances[0], 3);
    REQUIRE(!suggestions.empty());
    CHECK(suggestions[0] == "information");  // count(the->x) + count(x->about)
}

TEST_CASE("k larger than vocabulary returns all scored words") {
    BigramInfiller infiller({"alpha beta", "alpha gamma"});
    const auto doc = tokenize("alpha hype");
    const auto masked = mask_spans(doc, {make_span(doc, 1, 1)});
    const auto instances = shift_decompose(masked);
    const auto raw = infiller.suggest(doc, instances[0], 100);
    CHECK(raw.size() == 2);  // beta and gamma both follow alpha
}

TEST_CASE("the original surface is never suggested") {
    BigramInfiller infiller({"buy the hype about storms",
                             "buy the hype about budgets",
                             "buy the stats about rates"});
    const auto doc = tokenize("buy the hype about tornadoes");
    const auto masked = mask_spans(doc, {make_span(doc, 2, 2)});
    const auto instances = shift_decompose(masked);
    for (size_t k = 1; k <= 5; ++k) {
        for (const auto& word : suggest_topk(infiller, doc, instances[0], k)) {
            CHECK(word != "hype");
        }
    }
}

TEST_CASE("an empty infiller falls back to the neutral list") {
    BigramInfiller infiller;
    const auto doc = tokenize("buy the hype about tornadoes");
    const auto masked = mask_spans(doc, {make_span(doc, 2, 2)});
    const auto instances = shift_decompose(masked);
    const auto suggestions = suggest_topk(infiller, doc, instances[0], 5);
    REQUIRE(!suggestions.empty());
    CHECK(suggestions[0] == neutral_fallback_words()[0]);
}

TEST_CASE("assemble_candidates pairs ranks and clamps") {
    const auto doc = tokenize("the first slot and the second slot here");

    SUBCASE("one span, three suggestions") {
        const auto masked = mask_spans(doc, {make_span(doc, 1, 1)});
        const auto candidates =
            assemble_candidates(masked, {{"a", "b", "c"}}, DebiasConfig{3, 0.5, 0});
        REQUIRE(candidates.size() == 3);
        CHECK(candidates[0].text == "the a slot and the second slot here");
        CHECK(candidates[1].text == "the b slot and the second slot here");
        CHECK(candidates[2].text == "the c slot and the second slot here");
    }
    SUBCASE("two spans rank-paired") {
        const auto masked =
            mask_spans(doc, {make_span(doc, 1, 1), make_span(doc, 5, 5)});
        const auto candidates = assemble_candidates(
            masked, {{"x1", "x2"}, {"y1", "y2"}}, DebiasConfig{2, 0.5, 0});
        REQUIRE(candidates.size() == 2);
        CHECK(candidates[0].text == "the x1 slot and the y1 slot here");
        CHECK(candidates[1].text == "the x2 slot and the y2 slot here");
    }
    SUBCASE("unequal lists clamp the short one") {
        const auto masked =
            mask_spans(doc, {make_span(doc, 1, 1), make_span(doc, 5, 5)});
        const auto candidates = assemble_candidates(
            masked, {{"x1", "x2", "x3"}, {"y1"}}, DebiasConfig{3, 0.5, 0});
        REQUIRE(candidates.size() == 3);
        CHECK(candidates[0].text == "the x1 slot and the y1 slot here");
        CHECK(candidates[1].text == "the x2 slot and the y1 slot here");
        CHECK(candidates[2].text == "the x3 slot and the y1 slot here");
    }
}

TEST_CASE("assembling the original surfaces reproduces the original text") {
    std::mt19937_64 rng(23);
    const auto doc = tokenize(
        "The council, reviewing last week's budget, approved a plan on Monday.");
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Span> spans;
        size_t next = rng() % 2;
        while (next < doc.tokens.size()) {
            const size_t last = std::min(next + rng() % 2, doc.tokens.size() - 1);
            spans.push_back(make_span(doc, next, last));
            next = last + 2 + rng() % 4;
        }
        if (spans.empty()) continue;
        const auto masked = mask_spans(doc, spans);
        std::vector<std::vector<std::string>> original_surfaces;
        for (const auto& span : masked.masked_spans) {
            original_surfaces.push_back({span.surface});
        }
        const auto candidates =
            assemble_candidates(masked, original_surfaces, DebiasConfig{});
        REQUIRE(candidates.size() == 1);
        CHECK(candidates[0].text == doc.raw_text);
    }
}

TEST_CASE("debias passes non-biased input through") {
    const auto detector = planted_word_detector({"radical"});
    const LexiconRecognizer recognizer(build_lexicon({{{"radical"}, true}}));
    const FixedInfiller infiller({{"calm", 1.0}});
    const auto result =
        debias(detector, recognizer, infiller, "a perfectly neutral sentence");
    CHECK(result.status == DebiasStatus::NotBiased);
    CHECK(result.candidates.empty());
    CHECK(result.spans.empty());
    REQUIRE(result.chosen.has_value());
    CHECK(result.chosen->text == "a perfectly neutral sentence");
}

TEST_CASE("debias rewrites the planted word below the original probability") {
    const auto detector = planted_word_detector({"radical", "reckless"});
    const LexiconRecognizer recognizer(build_lexicon({{{"radical"}, true}}));
    const FixedInfiller infiller(
        {{"updated", 3.0}, {"reckless", 2.0}, {"formal", 1.0}});
    const auto result = debias(detector, recognizer, infiller,
                               "the radical plan moves ahead");
    CHECK(result.status == DebiasStatus::Debiased);
    REQUIRE(result.spans.size() == 1);
    REQUIRE(result.chosen.has_value());
    CHECK(result.chosen->text == "the updated plan moves ahead");
    CHECK(result.chosen->probability < result.original_probability);
    CHECK(result.chosen->probability < 0.5);
    // ascending candidate order
    for (size_t i = 1; i < result.candidates.size(); ++i) {
        CHECK(result.candidates[i - 1].probability <=
              result.candidates[i].probability);
    }
}

TEST_CASE("debias flags unlocatable bias") {
    const auto detector = planted_word_detector({"radical"});
    const LexiconRecognizer recognizer(build_lexicon({}));  // empty lexicon
    const FixedInfiller infiller({{"calm", 1.0}});
    const auto result =
        debias(detector, recognizer, infiller, "the radical plan moves ahead");
    CHECK(result.status == DebiasStatus::UnlocatableBias);
    REQUIRE(result.chosen.has_value());
    CHECK(result.chosen->text == "the radical plan moves ahead");
    CHECK(result.candidates.empty());
}

TEST_CASE("debias keeps the original when no candidate qualifies") {
    // every suggestion is itself a planted word, so nothing improves
    const auto detector = planted_word_detector({"radical", "reckless", "corrupt"});
    const LexiconRecognizer recognizer(build_lexicon({{{"radical"}, true}}));
    const FixedInfiller infiller({{"reckless corrupt", 1.0}});
    const auto result = debias(detector, recognizer, infiller,
                               "the radical radical plan", DebiasConfig{1, 0.5, 0});
    CHECK(result.status == DebiasStatus::NoCandidateAccepted);
    CHECK(!result.chosen.has_value());
    CHECK(!result.candidates.empty());
}

TEST_CASE("acceptance soundness whenever a candidate is chosen") {
    std::mt19937_64 rng(31);
    const auto detector = planted_word_detector({"radical", "corrupt", "reckless"});
    const LexiconRecognizer recognizer(
        build_lexicon({{{"radical"}, true}, {{"corrupt"}, true}}));
    const std::vector<std::string> fills = {"updated", "corrupt", "routine",
                                            "reckless", "formal"};
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<ScoredWord> words;
        for (size_t i = 0; i < 3; ++i) {
            words.push_back({fills[rng() % fills.size()], 5.0 - static_cast<double>(i)});
        }
        const FixedInfiller infiller(words);
        DebiasConfig config;
        config.top_k = 1 + rng() % 4;
        const auto result = debias(detector, recognizer, infiller,
                                   "the radical and corrupt plan", config);
        if (result.status == DebiasStatus::Debiased) {
            REQUIRE(result.chosen.has_value());
            CHECK(result.chosen->probability <
                  std::max(config.accept_threshold, result.original_probability));
        }
    }
}

TEST_CASE("mask_random honors p and the pre-selected fraction") {
    std::string text;
    for (int i = 0; i < 40; ++i) text += "tok" + std::to_string(i) + " ";
    const auto doc = tokenize(text);
    REQUIRE(doc.tokens.size() == 40);

    SUBCASE("p = 0 masks nothing") {
        const auto masked = mask_random(doc, 0.5, 0.0, 1);
        CHECK(masked.masked_spans.empty());
        CHECK(masked.rendering == doc.raw_text);
    }
    SUBCASE("p = 1 masks the whole pre-selected subset") {
        const auto masked = mask_random(doc, 0.05, 1.0, 1);  // 2 of 40 tokens
        CHECK(masked.masked_spans.size() == 2);
        CHECK(count_occurrences(masked.rendering, "[MASK]") == 2);
    }
    SUBCASE("fixed seed reproduces mask positions") {
        const auto a = mask_random(doc, 0.2, 0.5, 1234);
        const auto b = mask_random(doc, 0.2, 0.5, 1234);
        REQUIRE(a.masked_spans.size() == b.masked_spans.size());
        for (size_t i = 0; i < a.masked_spans.size(); ++i) {
            CHECK(a.masked_spans[i].first_token == b.masked_spans[i].first_token);
        }
        CHECK(a.rendering == b.rendering);
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(mask_random(doc, 0.0, 0.5, 1), std::invalid_argument);
        CHECK_THROWS_AS(mask_random(doc, 0.5, 1.5, 1), std::invalid_argument);
    }
}

}  // TEST_SUITE
