#pragma once

#include <string>

#include <json.hpp>

#include "dbias/debias.hpp"
#include "dbias/fetch.hpp"
#include "dbias/pipeline.hpp"

namespace dbias {

nlohmann::json to_json(const BiasSpan& span);
nlohmann::json to_json(const Candidate& candidate);
nlohmann::json to_json(const DebiasResult& result);
nlohmann::json to_json(const DocumentDebiasResult& result);
nlohmann::json to_json(const DetectionResult& result);
nlohmann::json to_json(const EvalMetrics& metrics);
nlohmann::json to_json(const PipelineReport& report);
nlohmann::json to_json(const NewsArticle& article);
nlohmann::json to_json(const AblationRow& row);

// {"error": {"type": ..., "message": ...}} for the CLI's stderr contract.
std::string error_record(const std::string& type, const std::string& message);

}  // namespace dbias
