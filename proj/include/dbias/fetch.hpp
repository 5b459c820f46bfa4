#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace dbias {

struct NewsArticle {
    std::string url;
    std::string title;
    std::string body;
    int64_t fetched_at = 0;  // unix seconds
};

struct FetchConfig {
    int timeout_seconds = 10;
    int connect_timeout_seconds = 5;
    // Pulls (title, body) out of a response payload; defaults to the
    // built-in HTML extractor.
    std::function<std::pair<std::string, std::string>(const std::string&)> extractor;
};

enum class FetchErrorKind { BadUrl, Network, Timeout, NotFound, HttpStatus, Extraction };

class FetchError : public std::runtime_error {
  public:
    FetchError(FetchErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    FetchErrorKind kind() const { return kind_; }

  private:
    FetchErrorKind kind_;
};

std::string_view to_string(FetchErrorKind kind);

// <title> plus the text of <p> blocks, tags stripped and entities decoded.
std::pair<std::string, std::string> extract_html_article(const std::string& html);

// GET the url and run the extractor. Timeouts, non-2xx statuses and
// extraction failures surface as FetchError; nothing is swallowed.
NewsArticle fetch_article(const std::string& url, const FetchConfig& config = {});

}  // namespace dbias
