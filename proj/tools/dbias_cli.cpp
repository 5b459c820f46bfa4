// Command-line surface of the de-biasing pipeline: train models, locate
// and rewrite biased spans, evaluate fairness metrics before/after, and
// run the masking ablation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbias/dataset.hpp"
#include "dbias/debias.hpp"
#include "dbias/detector.hpp"
#include "dbias/fetch.hpp"
#include "dbias/pipeline.hpp"
#include "dbias/recognition.hpp"
#include "dbias/serialize.hpp"

namespace {

using nlohmann::json;

struct InputUnit {
    std::string id;
    std::string text;
};

std::vector<InputUnit> read_inputs(const std::string& path) {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (path != "-") {
        file.open(path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open input: " + path);
        in = &file;
    }
    std::vector<InputUnit> units;
    std::string line;
    size_t n = 0;
    while (std::getline(*in, line)) {
        if (line.empty()) continue;
        InputUnit unit;
        if (line.front() == '{') {
            const json j = json::parse(line);
            unit.id = j.contains("id") ? j["id"].get<std::string>()
                                       : std::to_string(n);
            unit.text = j.at("text").get<std::string>();
        } else {
            unit.id = std::to_string(n);
            unit.text = line;
        }
        units.push_back(std::move(unit));
        ++n;
    }
    return units;
}

class OutputWriter {
  public:
    explicit OutputWriter(const std::string& path) {
        if (path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot open output: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

std::vector<dbias::LabeledText> to_labeled(const std::vector<dbias::MbicRecord>& records) {
    std::vector<dbias::LabeledText> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        out.push_back({rec.sentence, rec.label == dbias::RecordLabel::Biased ? 1 : 0});
    }
    return out;
}

dbias::BigramInfiller infiller_from_csv(const std::string& path) {
    dbias::BigramInfiller infiller;
    if (path.empty()) return infiller;
    const auto loaded = dbias::load_mbic(path);
    for (const auto& rec : loaded.records) {
        if (rec.label == dbias::RecordLabel::NonBiased) {
            infiller.add_sentence(rec.sentence);
        }
    }
    return infiller;
}

void report_row_errors(const dbias::LoadResult& loaded) {
    if (loaded.errors.empty()) return;
    std::cerr << dbias::error_record(
                     "malformed_rows",
                     std::to_string(loaded.errors.size()) +
                         " malformed rows skipped (first at data row " +
                         std::to_string(loaded.errors.front().row) + ": " +
                         loaded.errors.front().message + ")")
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bias detection, recognition and de-biasing pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file (INI/TOML)");

    std::string dataset_path;
    std::string model_path;
    std::string lexicon_path;
    std::string groups_path;
    std::string corpus_path;
    std::string input_path = "-";
    std::string output_path = "-";
    uint64_t seed = 0;
    dbias::TrainConfig train_config;
    dbias::FeatureConfig feature_config;
    dbias::DebiasConfig debias_config;
    bool no_debias = false;
    std::vector<double> p_values = {0.1, 0.3, 0.5, 0.8, 1.0};
    double fraction = 0.05;
    std::string url;
    int timeout_seconds = 10;

    auto* train = app.add_subcommand("train", "Train the bias detector");
    train->add_option("--dataset", dataset_path, "MBIC-style CSV")->required();
    train->add_option("--out", model_path, "Model file to write")->required();
    train->add_option("--epochs", train_config.epochs, "Gradient descent epochs");
    train->add_option("--lr", train_config.learning_rate, "Learning rate");
    train->add_option("--l2", train_config.l2, "L2 penalty");
    train->add_option("--seed", train_config.seed, "Training seed");
    train->add_option("--hash-dim", feature_config.hash_dimension,
                      "Feature hash dimension");

    auto* build_lex = app.add_subcommand("build-lexicon", "Build the bias lexicon");
    build_lex->add_option("--dataset", dataset_path, "MBIC-style CSV")->required();
    build_lex->add_option("--out", lexicon_path, "Lexicon file to write")->required();

    auto* detect = app.add_subcommand("detect", "Classify texts as biased/non-biased");
    detect->add_option("--model", model_path, "Detector model file")->required();
    detect->add_option("--input", input_path, "txt or jsonl input ('-' = stdin)");
    detect->add_option("--out", output_path, "JSONL output ('-' = stdout)");

    auto* recognize = app.add_subcommand("recognize", "Locate bias-bearing spans");
    recognize->add_option("--lexicon", lexicon_path, "Lexicon file")->required();
    recognize->add_option("--input", input_path, "txt or jsonl input ('-' = stdin)");
    recognize->add_option("--out", output_path, "JSONL output ('-' = stdout)");

    auto* debias_cmd = app.add_subcommand("debias", "Mask, infill and re-score");
    debias_cmd->add_option("--model", model_path, "Detector model file")->required();
    debias_cmd->add_option("--lexicon", lexicon_path, "Lexicon file")->required();
    debias_cmd->add_option("--corpus", corpus_path,
                           "CSV whose non-biased sentences feed the infiller");
    debias_cmd->add_option("--top-k", debias_config.top_k, "Suggestions per mask");
    debias_cmd->add_option("--threshold", debias_config.accept_threshold,
                           "Acceptance threshold");
    debias_cmd->add_option("--input", input_path, "txt or jsonl input ('-' = stdin)");
    debias_cmd->add_option("--out", output_path, "JSONL output ('-' = stdout)");

    auto* evaluate = app.add_subcommand("evaluate",
                                        "Before/after de-biasing metric report");
    evaluate->add_option("--dataset", dataset_path, "MBIC-style CSV")->required();
    evaluate->add_option("--groups", groups_path,
                         "Group spec JSON (defaults to the built-in spec)");
    evaluate->add_option("--seed", seed, "Split seed");
    evaluate->add_option("--out", output_path, "Report JSON path");
    evaluate->add_option("--top-k", debias_config.top_k, "Suggestions per mask");
    evaluate->add_option("--threshold", debias_config.accept_threshold,
                         "Acceptance threshold");
    evaluate->add_option("--epochs", train_config.epochs, "Detector epochs");
    evaluate->add_flag("--no-debias", no_debias,
                       "Disable the transform (before == after)");

    auto* ablate = app.add_subcommand("ablate-masking",
                                      "Random-p vs exact masking ablation");
    ablate->add_option("--dataset", dataset_path, "MBIC-style CSV")->required();
    ablate->add_option("--p", p_values, "Masking probabilities")->delimiter(',');
    ablate->add_option("--fraction", fraction, "Token fraction to pre-select");
    ablate->add_option("--seed", seed, "Masking/split seed");
    ablate->add_option("--out", output_path, "JSONL output ('-' = stdout)");

    auto* fetch = app.add_subcommand("fetch", "Fetch a news article over HTTP");
    fetch->add_option("--url", url, "Article URL")->required();
    fetch->add_option("--timeout", timeout_seconds, "Read timeout in seconds");
    fetch->add_option("--out", output_path, "JSON output ('-' = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << dbias::error_record("usage", e.what()) << "\n";
        return e.get_exit_code();
    }

    try {
        if (*train) {
            const auto loaded = dbias::load_mbic(dataset_path);
            report_row_errors(loaded);
            std::vector<double> epoch_losses;
            const auto model = dbias::train_detector(to_labeled(loaded.records),
                                                     train_config, feature_config,
                                                     &epoch_losses);
            model.save_file(model_path);
            std::cout << json{{"trained_on", loaded.records.size()},
                              {"epochs", epoch_losses.size()},
                              {"final_loss",
                               epoch_losses.empty() ? 0.0 : epoch_losses.back()},
                              {"model", model_path}}
                             .dump()
                      << "\n";
        } else if (*build_lex) {
            const auto loaded = dbias::load_mbic(dataset_path);
            report_row_errors(loaded);
            std::vector<dbias::LexiconRecord> lex_records;
            for (const auto& rec : loaded.records) {
                lex_records.push_back(
                    {rec.biased_words, rec.label == dbias::RecordLabel::Biased});
            }
            const auto lexicon = dbias::build_lexicon(lex_records);
            lexicon.save_file(lexicon_path);
            std::cout << json{{"entries", lexicon.entries.size()},
                              {"lexicon", lexicon_path}}
                             .dump()
                      << "\n";
        } else if (*detect) {
            const auto model = dbias::DetectorModel::load_file(model_path);
            OutputWriter out(output_path);
            for (const auto& unit : read_inputs(input_path)) {
                json j = dbias::to_json(model.classify(unit.text));
                j["id"] = unit.id;
                j["text"] = unit.text;
                out.stream() << j.dump() << "\n";
            }
        } else if (*recognize) {
            const dbias::LexiconRecognizer recognizer(
                dbias::Lexicon::load_file(lexicon_path));
            OutputWriter out(output_path);
            for (const auto& unit : read_inputs(input_path)) {
                const auto doc = dbias::tokenize(unit.text, unit.id);
                json spans = json::array();
                for (const auto& span : recognizer.recognize(doc)) {
                    spans.push_back(dbias::to_json(span));
                }
                out.stream() << json{{"id", unit.id},
                                     {"text", unit.text},
                                     {"spans", spans}}
                                    .dump()
                             << "\n";
            }
        } else if (*debias_cmd) {
            const auto model = dbias::DetectorModel::load_file(model_path);
            const dbias::LexiconRecognizer recognizer(
                dbias::Lexicon::load_file(lexicon_path));
            const auto infiller = infiller_from_csv(corpus_path);
            std::vector<std::string> texts;
            std::vector<std::string> ids;
            for (const auto& unit : read_inputs(input_path)) {
                ids.push_back(unit.id);
                texts.push_back(unit.text);
            }
            const auto results = dbias::run_pipeline(model, recognizer, infiller,
                                                     texts, debias_config, ids);
            OutputWriter out(output_path);
            for (const auto& result : results) {
                out.stream() << dbias::to_json(result).dump() << "\n";
            }
        } else if (*evaluate) {
            const auto loaded = dbias::load_mbic(dataset_path);
            report_row_errors(loaded);
            const auto groups = groups_path.empty()
                                    ? dbias::GroupConfig::builtin()
                                    : dbias::GroupConfig::load_file(groups_path);
            dbias::EvaluateOptions options;
            options.split_seed = seed;
            options.train = train_config;
            options.debias = debias_config;
            options.debias_enabled = !no_debias;
            const auto report =
                dbias::evaluate_before_after(loaded.records, groups, options);
            const json j = dbias::to_json(report);
            OutputWriter out(output_path);
            out.stream() << j.dump(2) << "\n";
            if (output_path != "-") {
                std::cout << json{{"report", output_path},
                                  {"before_f1", j["before"]["f1"]},
                                  {"after_f1", j["after"]["f1"]},
                                  {"before_di", j["before"]["di"]},
                                  {"after_di", j["after"]["di"]}}
                                 .dump()
                          << "\n";
            }
        } else if (*ablate) {
            const auto loaded = dbias::load_mbic(dataset_path);
            report_row_errors(loaded);
            const auto split = dbias::stratified_split(loaded.records, seed);
            std::vector<dbias::LabeledText> train_set;
            std::vector<dbias::LexiconRecord> lex_records;
            dbias::BigramInfiller infiller;
            for (size_t idx : split.train) {
                const auto& rec = loaded.records[idx];
                const bool biased = rec.label == dbias::RecordLabel::Biased;
                train_set.push_back({rec.sentence, biased ? 1 : 0});
                lex_records.push_back({rec.biased_words, biased});
                if (!biased) infiller.add_sentence(rec.sentence);
            }
            const auto model =
                dbias::train_detector(train_set, train_config, feature_config);
            const dbias::LexiconRecognizer recognizer(dbias::build_lexicon(lex_records));
            std::vector<std::string> test_texts;
            for (size_t idx : split.test) {
                test_texts.push_back(loaded.records[idx].sentence);
            }
            const auto rows = dbias::ablation_masking(
                model, recognizer, infiller, test_texts, p_values, fraction, seed,
                debias_config);
            OutputWriter out(output_path);
            for (const auto& row : rows) {
                out.stream() << dbias::to_json(row).dump() << "\n";
            }
        } else if (*fetch) {
            dbias::FetchConfig config;
            config.timeout_seconds = timeout_seconds;
            const auto article = dbias::fetch_article(url, config);
            OutputWriter out(output_path);
            out.stream() << dbias::to_json(article).dump() << "\n";
        }
    } catch (const dbias::FetchError& e) {
        std::cerr << dbias::error_record(std::string(dbias::to_string(e.kind())),
                                         e.what())
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << dbias::error_record("error", e.what()) << "\n";
        return 1;
    }
    return 0;
}
