#include "dbias/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include <httplib.h>

namespace dbias {

std::string_view to_string(FetchErrorKind kind) {
    switch (kind) {
        case FetchErrorKind::BadUrl: return "bad_url";
        case FetchErrorKind::Network: return "network";
        case FetchErrorKind::Timeout: return "timeout";
        case FetchErrorKind::NotFound: return "not_found";
        case FetchErrorKind::HttpStatus: return "http_status";
        case FetchErrorKind::Extraction: return "extraction";
    }
    return "unknown";
}

namespace {

std::string decode_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        const size_t semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 8) {
            out.push_back(text[i++]);
            continue;
        }
        const std::string entity = text.substr(i + 1, semi - i - 1);
        if (entity == "amp") out.push_back('&');
        else if (entity == "lt") out.push_back('<');
        else if (entity == "gt") out.push_back('>');
        else if (entity == "quot") out.push_back('"');
        else if (entity == "apos" || entity == "#39") out.push_back('\'');
        else if (entity == "nbsp") out.push_back(' ');
        else {
            out.push_back(text[i++]);
            continue;
        }
        i = semi + 1;
    }
    return out;
}

std::string strip_tags(const std::string& html) {
    std::string out;
    bool in_tag = false;
    for (char c : html) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) out.push_back(c);
    }
    return decode_entities(out);
}

std::string collapse_ws(const std::string& text) {
    std::string out;
    bool prev_space = true;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!prev_space) out.push_back(' ');
            prev_space = true;
        } else {
            out.push_back(c);
            prev_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

// Next occurrence of <tag ...> in html (case-insensitive), or npos.
size_t find_tag(const std::string& html_lower, const std::string& tag, size_t from) {
    while (true) {
        const size_t pos = html_lower.find("<" + tag, from);
        if (pos == std::string::npos) return pos;
        const size_t after = pos + tag.size() + 1;
        if (after >= html_lower.size() || html_lower[after] == '>' ||
            std::isspace(static_cast<unsigned char>(html_lower[after]))) {
            return pos;
        }
        from = pos + 1;
    }
}

}  // namespace

std::pair<std::string, std::string> extract_html_article(const std::string& html) {
    const std::string html_lower = lower_copy(html);

    std::string title;
    const size_t title_open = find_tag(html_lower, "title", 0);
    if (title_open != std::string::npos) {
        const size_t content = html_lower.find('>', title_open);
        const size_t close = html_lower.find("</title", title_open);
        if (content != std::string::npos && close != std::string::npos &&
            close > content) {
            title = collapse_ws(strip_tags(html.substr(content + 1, close - content - 1)));
        }
    }

    std::string body;
    size_t pos = 0;
    while (true) {
        const size_t open = find_tag(html_lower, "p", pos);
        if (open == std::string::npos) break;
        const size_t content = html_lower.find('>', open);
        if (content == std::string::npos) break;
        const size_t close = find_tag(html_lower, "/p", content);
        if (close == std::string::npos) break;
        const std::string paragraph =
            collapse_ws(strip_tags(html.substr(content + 1, close - content - 1)));
        if (!paragraph.empty()) {
            if (!body.empty()) body += "\n";
            body += paragraph;
        }
        pos = close + 1;
    }
    if (body.empty()) {
        // Fall back to the whole page text.
        body = collapse_ws(strip_tags(html));
    }
    return {title, body};
}

namespace {

struct ParsedUrl {
    std::string scheme;
    std::string host;
    int port = 80;
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    const size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw FetchError(FetchErrorKind::BadUrl, "url missing scheme: " + url);
    }
    out.scheme = url.substr(0, scheme_end);
    if (out.scheme != "http" && out.scheme != "https") {
        throw FetchError(FetchErrorKind::BadUrl, "unsupported scheme: " + out.scheme);
    }
    const size_t host_start = scheme_end + 3;
    const size_t path_start = url.find('/', host_start);
    std::string authority = path_start == std::string::npos
                                ? url.substr(host_start)
                                : url.substr(host_start, path_start - host_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (authority.empty()) {
        throw FetchError(FetchErrorKind::BadUrl, "url missing host: " + url);
    }
    const size_t colon = authority.rfind(':');
    out.port = out.scheme == "https" ? 443 : 80;
    if (colon != std::string::npos) {
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw FetchError(FetchErrorKind::BadUrl, "bad port in url: " + url);
        }
        authority = authority.substr(0, colon);
    }
    out.host = authority;
    return out;
}

}  // namespace

NewsArticle fetch_article(const std::string& url, const FetchConfig& config) {
    const ParsedUrl parsed = parse_url(url);
    if (parsed.scheme == "https") {
        // Vendored client is built without TLS in this project.
        throw FetchError(FetchErrorKind::BadUrl,
                         "https not supported by the built-in client; use http");
    }
    httplib::Client client(parsed.host, parsed.port);
    client.set_connection_timeout(config.connect_timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_follow_location(true);

    const httplib::Result result = client.Get(parsed.path);
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw FetchError(FetchErrorKind::Timeout,
                             "timeout fetching " + url + ": " + httplib::to_string(err));
        }
        throw FetchError(FetchErrorKind::Network,
                         "network error fetching " + url + ": " +
                             httplib::to_string(err));
    }
    if (result->status == 404) {
        throw FetchError(FetchErrorKind::NotFound, "404 not found: " + url);
    }
    if (result->status < 200 || result->status >= 300) {
        throw FetchError(FetchErrorKind::HttpStatus,
                         "http status " + std::to_string(result->status) + " for " + url);
    }

    NewsArticle article;
    article.url = url;
    article.fetched_at = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
    try {
        auto extractor = config.extractor
                             ? config.extractor
                             : std::function<std::pair<std::string, std::string>(
                                   const std::string&)>(extract_html_article);
        std::tie(article.title, article.body) = extractor(result->body);
    } catch (const FetchError&) {
        throw;
    } catch (const std::exception& e) {
        throw FetchError(FetchErrorKind::Extraction,
                         std::string("extraction failed: ") + e.what());
    }
    if (article.title.empty() && article.body.empty()) {
        throw FetchError(FetchErrorKind::Extraction, "nothing extracted from " + url);
    }
    return article;
}

}  // namespace dbias
