#include "synthetic_mbic.hpp"

#include <random>

namespace dbias::testsupport {

namespace {

const std::vector<std::string> kBiasedTerms = {
    "radical",          "extremist",        "thugs",
    "hysteria",         "alarmist",         "corrupt",
    "pathetic",         "disgraceful",      "pseudo-scientific hype",
    "reckless",         "crooked",          "lazy",
    "fanatics",         "delusional",       "toxic rhetoric",
    "shameless",        "incompetent",      "dogmatic",
    "paranoid",         "derogatory term",
};

const std::vector<std::string> kNeutralTerms = {
    "detailed", "recent",   "formal",   "updated",  "scheduled",
    "routine",  "public",   "measured", "regional", "annual",
    "revised",  "official", "written",  "planned",  "standard",
};

const std::vector<std::string> kSubjects = {
    "senator", "mayor",        "committee", "reporter", "agency",
    "council", "spokesperson", "analyst",   "resident", "editor",
};

const std::vector<std::string> kVerbs = {
    "announced", "criticized", "defended", "described", "questioned",
    "reviewed",  "dismissed",  "endorsed", "examined",  "reported",
};

const std::vector<std::string> kNouns = {
    "report", "plan",   "statement", "proposal",   "policy",
    "budget", "speech", "decision",  "initiative", "response",
};

const std::vector<std::string> kTopics = {
    "the election",     "the economy",     "climate change",
    "public health",    "housing costs",   "border policy",
    "school funding",   "crime rates",     "the pandemic",
    "tax reform",
};

const std::vector<std::string> kTails = {
    "on Monday",          "this week",           "in the capital",
    "during the hearing", "at the press event",  "according to sources",
    "without comment",    "after the vote",      "in a new filing",
    "by a wide margin",
};

struct IdentityValue {
    const char* value;
    bool privileged;
    // Subject phrase carrying exactly one identity term from the shipped
    // group spec; slots into "The <phrase> <verb> ...".
    std::vector<std::string> phrases;
    double weight;
};

const std::vector<IdentityValue> kIdentities = {
    {"Female", false, {"woman", "mother", "sister"}, 0.22},
    {"Male", true, {"man", "father", "brother"}, 0.10},
    {"Black", false, {"black organizer", "black shopkeeper"}, 0.16},
    {"White", true, {"white organizer", "white shopkeeper"}, 0.07},
    {"English speaker", true, {"english speaker"}, 0.035},
    {"Non-English speaker", false, {"immigrant", "foreigner", "migrant"}, 0.14},
    {"Young", true, {"young intern", "young volunteer"}, 0.055},
    {"Older", false, {"elderly resident", "senior volunteer"}, 0.135},
    {"College degree", true, {"college professor", "university dean"}, 0.045},
    {"High school", false, {"high school coach", "dropout"}, 0.14},
};

const std::vector<std::string> kAges = {"22", "27", "34", "41", "48",
                                        "55", "63", "68", "19", "72"};
const std::vector<std::string> kGenders = {"male", "female"};
const std::vector<std::string> kEducations = {"High School", "College degree",
                                              "Bachelor's degree", "PhD",
                                              "Master's degree"};
const std::vector<std::string> kOutlets = {"Daily Ledger", "Metro Wire",
                                           "The Courier", "National Desk"};

class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    size_t index(size_t n) { return static_cast<size_t>(engine_() % n); }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    const std::string& pick(const std::vector<std::string>& pool) {
        return pool[index(pool.size())];
    }

  private:
    std::mt19937_64 engine_;
};

std::string make_sentence(Rng& rng, const std::string& subject_phrase,
                          bool biased_wording,
                          std::vector<std::string>* planted) {
    const std::string& slot1 =
        biased_wording ? kBiasedTerms[rng.index(kBiasedTerms.size())]
                       : kNeutralTerms[rng.index(kNeutralTerms.size())];
    if (biased_wording && planted != nullptr) planted->push_back(slot1);

    std::string sentence = "The " + subject_phrase + " " + rng.pick(kVerbs) +
                           " the " + slot1 + " " + rng.pick(kNouns);
    if (rng.uniform() < 0.25) {
        const std::string& slot2 =
            biased_wording ? kBiasedTerms[rng.index(kBiasedTerms.size())]
                           : kNeutralTerms[rng.index(kNeutralTerms.size())];
        if (biased_wording && planted != nullptr && slot2 != slot1) {
            planted->push_back(slot2);
        }
        sentence += " and the " + slot2 + " " + rng.pick(kNouns);
    }
    sentence += " about " + rng.pick(kTopics) + " " + rng.pick(kTails) + ".";
    return sentence;
}

MbicRecord annotate(Rng& rng, MbicRecord rec) {
    rec.news_link = "http://example.com/story/" + std::to_string(rng.index(100000));
    rec.outlet = rng.pick(kOutlets);
    rec.topic = rng.pick(kTopics);
    rec.annotator_age = rng.pick(kAges);
    rec.annotator_gender = rng.pick(kGenders);
    rec.annotator_education = rng.pick(kEducations);
    return rec;
}

}  // namespace

const std::vector<std::string>& planted_bias_terms() { return kBiasedTerms; }
const std::vector<std::string>& neutral_slot_terms() { return kNeutralTerms; }

std::vector<MbicRecord> make_synthetic_mbic(const SyntheticConfig& config) {
    Rng rng(config.seed);

    double weight_total = 0.0;
    for (const auto& id : kIdentities) weight_total += id.weight;

    std::vector<MbicRecord> records;
    records.reserve(config.n_records);
    for (size_t i = 0; i < config.n_records; ++i) {
        MbicRecord rec;

        const IdentityValue* identity = nullptr;
        if (rng.uniform() < config.mention_rate) {
            double roll = rng.uniform() * weight_total;
            for (const auto& id : kIdentities) {
                roll -= id.weight;
                if (roll <= 0.0) {
                    identity = &id;
                    break;
                }
            }
            if (identity == nullptr) identity = &kIdentities.back();
        }

        double biased_rate = config.biased_rate_no_mention;
        if (identity != nullptr) {
            biased_rate = identity->privileged
                              ? config.biased_rate_priv
                              : config.biased_rate_priv * config.di_target;
        }
        const bool biased = rng.uniform() < biased_rate;
        rec.label = biased ? RecordLabel::Biased : RecordLabel::NonBiased;

        // Content usually matches the label; a noise share does not,
        // standing in for annotator disagreement.
        bool biased_wording = biased;
        if (rng.uniform() < config.content_noise) biased_wording = !biased_wording;

        const std::string subject =
            identity != nullptr ? identity->phrases[rng.index(identity->phrases.size())]
                                : rng.pick(kSubjects);
        rec.sentence = make_sentence(rng, subject, biased_wording, &rec.biased_words);
        records.push_back(annotate(rng, std::move(rec)));
    }
    return records;
}

std::vector<MbicRecord> make_planted_corpus(size_t n_records, uint64_t seed) {
    Rng rng(seed);
    std::vector<MbicRecord> records;
    records.reserve(n_records);
    for (size_t i = 0; i < n_records; ++i) {
        MbicRecord rec;
        const bool biased = (i % 2) == 0;
        rec.label = biased ? RecordLabel::Biased : RecordLabel::NonBiased;
        const std::string subject = rng.pick(kSubjects);
        rec.sentence = make_sentence(rng, subject, biased, &rec.biased_words);
        records.push_back(annotate(rng, std::move(rec)));
    }
    return records;
}

}  // namespace dbias::testsupport
