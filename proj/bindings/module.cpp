#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbias/dataset.hpp"
#include "dbias/debias.hpp"
#include "dbias/detector.hpp"
#include "dbias/metrics.hpp"
#include "dbias/pipeline.hpp"
#include "dbias/recognition.hpp"
#include "dbias/serialize.hpp"
#include "dbias/text.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = json_to_py(value);
            }
            return out;
        }
        default: return py::none();
    }
}

std::vector<dbias::LabeledText> to_labeled(
    const std::vector<std::pair<std::string, int>>& records) {
    std::vector<dbias::LabeledText> out;
    out.reserve(records.size());
    for (const auto& [text, label] : records) out.push_back({text, label});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Text de-biasing pipeline: detection, span recognition, "
              "mask-and-infill rewriting, and fairness metrics";

    py::class_<dbias::Token>(m, "Token")
        .def_readonly("surface", &dbias::Token::surface)
        .def_readonly("start", &dbias::Token::start)
        .def_readonly("end", &dbias::Token::end)
        .def("__repr__", [](const dbias::Token& t) {
            return "Token('" + t.surface + "', " + std::to_string(t.start) + ", " +
                   std::to_string(t.end) + ")";
        });

    py::class_<dbias::Document>(m, "Document")
        .def_readonly("id", &dbias::Document::id)
        .def_readonly("raw_text", &dbias::Document::raw_text)
        .def_readonly("tokens", &dbias::Document::tokens)
        .def("sentence_bounds", [](const dbias::Document& doc) {
            std::vector<std::pair<size_t, size_t>> bounds;
            for (const auto& b : doc.sentence_bounds) {
                bounds.emplace_back(b.first_token, b.last_token);
            }
            return bounds;
        });

    m.def("tokenize", &dbias::tokenize, py::arg("text"), py::arg("id") = "");
    m.def(
        "split_sentences",
        [](const std::string& text) { return dbias::split_sentences(text); },
        py::arg("text"));

    py::class_<dbias::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &dbias::TrainConfig::epochs)
        .def_readwrite("learning_rate", &dbias::TrainConfig::learning_rate)
        .def_readwrite("l2", &dbias::TrainConfig::l2)
        .def_readwrite("seed", &dbias::TrainConfig::seed);

    py::class_<dbias::DetectorModel>(m, "DetectorModel")
        .def("predict_proba",
             [](const dbias::DetectorModel& model, const std::string& text) {
                 return model.predict_proba(text);
             },
             py::arg("text"))
        .def("classify",
             [](const dbias::DetectorModel& model, const std::string& text) {
                 const auto r = model.classify(text);
                 return py::make_tuple(
                     r.label == dbias::BiasLabel::Biased ? "Biased" : "Non-biased",
                     r.probability);
             },
             py::arg("text"))
        .def("save", &dbias::DetectorModel::save_file, py::arg("path"))
        .def_static("load", &dbias::DetectorModel::load_file, py::arg("path"))
        .def_property_readonly("threshold", &dbias::DetectorModel::decision_threshold);

    m.def(
        "train_detector",
        [](const std::vector<std::pair<std::string, int>>& records,
           uint32_t epochs, double learning_rate, double l2, uint64_t seed,
           uint32_t hash_dimension) {
            dbias::TrainConfig config{epochs, learning_rate, l2, seed};
            dbias::FeatureConfig features;
            features.hash_dimension = hash_dimension;
            return dbias::train_detector(to_labeled(records), config, features);
        },
        py::arg("records"), py::arg("epochs") = 200, py::arg("learning_rate") = 0.5,
        py::arg("l2") = 1e-6, py::arg("seed") = 0,
        py::arg("hash_dimension") = 1u << 18);

    py::class_<dbias::Lexicon>(m, "Lexicon")
        .def("__len__", [](const dbias::Lexicon& lex) { return lex.entries.size(); })
        .def("save", &dbias::Lexicon::save_file, py::arg("path"))
        .def_static("load", &dbias::Lexicon::load_file, py::arg("path"))
        .def("entries", [](const dbias::Lexicon& lex) {
            py::dict out;
            for (const auto& [term, entry] : lex.entries) {
                out[py::str(term)] =
                    py::make_tuple(entry.count_in_biased, entry.count_total);
            }
            return out;
        });

    m.def(
        "build_lexicon",
        [](const std::vector<std::pair<std::vector<std::string>, bool>>& records) {
            std::vector<dbias::LexiconRecord> recs;
            recs.reserve(records.size());
            for (const auto& [words, biased] : records) recs.push_back({words, biased});
            return dbias::build_lexicon(recs);
        },
        py::arg("records"));

    m.def(
        "recognize",
        [](const dbias::Lexicon& lexicon, const std::string& text) {
            const dbias::LexiconRecognizer recognizer(lexicon);
            const auto doc = dbias::tokenize(text);
            py::list out;
            for (const auto& span : recognizer.recognize(doc)) {
                out.append(json_to_py(dbias::to_json(span)));
            }
            return out;
        },
        py::arg("lexicon"), py::arg("text"));

    m.def(
        "debias",
        [](const dbias::DetectorModel& detector, const dbias::Lexicon& lexicon,
           const std::vector<std::string>& infill_corpus, const std::string& text,
           uint32_t top_k, double accept_threshold) {
            const dbias::LexiconRecognizer recognizer(lexicon);
            const dbias::BigramInfiller infiller(infill_corpus);
            dbias::DebiasConfig config;
            config.top_k = top_k;
            config.accept_threshold = accept_threshold;
            return json_to_py(dbias::to_json(
                dbias::debias(detector, recognizer, infiller, text, config)));
        },
        py::arg("detector"), py::arg("lexicon"), py::arg("infill_corpus"),
        py::arg("text"), py::arg("top_k") = 5, py::arg("accept_threshold") = 0.5);

    m.def(
        "run_pipeline",
        [](const dbias::DetectorModel& detector, const dbias::Lexicon& lexicon,
           const std::vector<std::string>& infill_corpus,
           const std::vector<std::string>& texts, uint32_t top_k,
           double accept_threshold) {
            const dbias::LexiconRecognizer recognizer(lexicon);
            const dbias::BigramInfiller infiller(infill_corpus);
            dbias::DebiasConfig config;
            config.top_k = top_k;
            config.accept_threshold = accept_threshold;
            py::list out;
            for (const auto& result :
                 dbias::run_pipeline(detector, recognizer, infiller, texts, config)) {
                out.append(json_to_py(dbias::to_json(result)));
            }
            return out;
        },
        py::arg("detector"), py::arg("lexicon"), py::arg("infill_corpus"),
        py::arg("texts"), py::arg("top_k") = 5, py::arg("accept_threshold") = 0.5);

    m.def(
        "confusion",
        [](const std::vector<int>& predictions, const std::vector<int>& labels) {
            const auto cm = dbias::confusion(predictions, labels);
            return py::make_tuple(cm.tp, cm.fp, cm.fn, cm.tn);
        },
        py::arg("predictions"), py::arg("labels"));

    m.def(
        "prf_acc",
        [](uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn) {
            const auto r = dbias::prf_acc({tp, fp, fn, tn});
            py::dict out;
            out["precision"] = r.precision ? py::object(py::float_(*r.precision))
                                           : py::object(py::none());
            out["recall"] = r.recall ? py::object(py::float_(*r.recall))
                                     : py::object(py::none());
            out["f1"] = r.f1 ? py::object(py::float_(*r.f1)) : py::object(py::none());
            out["accuracy"] = r.accuracy ? py::object(py::float_(*r.accuracy))
                                         : py::object(py::none());
            return out;
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

    m.def(
        "disparate_impact",
        [](uint64_t unpriv_positives, uint64_t unpriv_instances,
           uint64_t priv_positives, uint64_t priv_instances) {
            const auto r = dbias::disparate_impact(
                {"unprivileged", false, unpriv_positives, unpriv_instances},
                {"privileged", true, priv_positives, priv_instances});
            return py::make_tuple(r.di, std::string(dbias::to_string(r.verdict)));
        },
        py::arg("unpriv_positives"), py::arg("unpriv_instances"),
        py::arg("priv_positives"), py::arg("priv_instances"));

    m.def("roc_auc", &dbias::roc_auc, py::arg("scores"), py::arg("labels"));
    m.def("power_mean", &dbias::power_mean, py::arg("values"), py::arg("power"));

    m.def(
        "generalized_bias_auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels,
           const std::vector<std::pair<std::string, std::vector<bool>>>& subgroups,
           double power) {
            std::vector<dbias::SubgroupMembership> sgs;
            for (const auto& [name, mask] : subgroups) {
                dbias::SubgroupMembership sg;
                sg.name = name;
                sg.member.assign(mask.begin(), mask.end());
                sgs.push_back(std::move(sg));
            }
            dbias::GaucConfig config;
            config.power = power;
            return dbias::generalized_bias_auc(scores, labels, sgs, config);
        },
        py::arg("scores"), py::arg("labels"), py::arg("subgroups"),
        py::arg("power") = -5.0);

    m.def(
        "load_mbic",
        [](const std::string& path) {
            const auto loaded = dbias::load_mbic(path);
            py::list records;
            for (const auto& rec : loaded.records) {
                py::dict r;
                r["sentence"] = rec.sentence;
                r["label"] =
                    rec.label == dbias::RecordLabel::Biased ? "Biased" : "Non-biased";
                r["biased_words"] = rec.biased_words;
                r["age"] = rec.annotator_age;
                r["gender"] = rec.annotator_gender;
                r["education"] = rec.annotator_education;
                records.append(std::move(r));
            }
            py::list errors;
            for (const auto& err : loaded.errors) {
                errors.append(py::make_tuple(err.row, err.message));
            }
            return py::make_tuple(records, errors);
        },
        py::arg("path"));

    m.def("bucketize_age",
          [](const std::string& age) { return dbias::bucketize_age(age); },
          py::arg("age"));
    m.def("bucketize_education", &dbias::bucketize_education, py::arg("education"));

    m.def(
        "evaluate_before_after",
        [](const std::string& dataset_path, const std::string& groups_path,
           uint64_t seed, bool debias_enabled, uint32_t epochs) {
            const auto loaded = dbias::load_mbic(dataset_path);
            const auto groups = groups_path.empty()
                                    ? dbias::GroupConfig::builtin()
                                    : dbias::GroupConfig::load_file(groups_path);
            dbias::EvaluateOptions options;
            options.split_seed = seed;
            options.debias_enabled = debias_enabled;
            options.train.epochs = epochs;
            return json_to_py(dbias::to_json(
                dbias::evaluate_before_after(loaded.records, groups, options)));
        },
        py::arg("dataset_path"), py::arg("groups_path") = "", py::arg("seed") = 0,
        py::arg("debias_enabled") = true, py::arg("epochs") = 200);

    m.attr("__version__") = "0.1.0";
}
