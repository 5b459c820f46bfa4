#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "dbias/fetch.hpp"

using namespace dbias;

namespace {

const char* kFixtureHtml = R"html(<!DOCTYPE html>
<html>
<head><title>Council Approves Budget &amp; Plan</title></head>
<body>
  <nav><a href="/">home</a></nav>
  <p>The city council approved the annual budget on Monday.</p>
  <p>Critics called the vote <b>rushed</b> and asked for review.</p>
</body>
</html>)html";

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    TestServer() {
        server.Get("/article", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kFixtureHtml, "text/html");
        });
        server.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::seconds(3));
            res.set_content("late", "text/plain");
        });
        server.Get("/teapot", [](const httplib::Request&, httplib::Response& res) {
            res.status = 418;
            res.set_content("short and stout", "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

}  // namespace

TEST_SUITE("fetch") {

TEST_CASE("html extraction pulls title and paragraphs") {
    const auto [title, body] = extract_html_article(kFixtureHtml);
    CHECK(title == "Council Approves Budget & Plan");
    CHECK(body ==
          "The city council approved the annual budget on Monday.\n"
          "Critics called the vote rushed and asked for review.");
}

TEST_CASE("fetch_article parses the fixture article") {
    TestServer server;
    const auto article = fetch_article(server.url("/article"));
    CHECK(article.url == server.url("/article"));
    CHECK(article.title == "Council Approves Budget & Plan");
    CHECK(article.body.find("city council approved") != std::string::npos);
    CHECK(article.fetched_at > 0);
}

TEST_CASE("404 maps to NotFound") {
    TestServer server;
    try {
        fetch_article(server.url("/missing"));
        FAIL("expected FetchError");
    } catch (const FetchError& e) {
        CHECK(e.kind() == FetchErrorKind::NotFound);
    }
}

TEST_CASE("non-2xx statuses surface as HttpStatus") {
    TestServer server;
    try {
        fetch_article(server.url("/teapot"));
        FAIL("expected FetchError");
    } catch (const FetchError& e) {
        CHECK(e.kind() == FetchErrorKind::HttpStatus);
    }
}

TEST_CASE("read timeout below the server delay maps to Timeout") {
    TestServer server;
    FetchConfig config;
    config.timeout_seconds = 1;
    try {
        fetch_article(server.url("/slow"), config);
        FAIL("expected FetchError");
    } catch (const FetchError& e) {
        CHECK(e.kind() == FetchErrorKind::Timeout);
    }
}

TEST_CASE("malformed urls are rejected up front") {
    for (const char* url : {"not a url", "ftp://example.com/x", "http://"}) {
        try {
            fetch_article(url);
            FAIL("expected FetchError for ", url);
        } catch (const FetchError& e) {
            CHECK(e.kind() == FetchErrorKind::BadUrl);
        }
    }
}

TEST_CASE("connection refused maps to Network") {
    FetchConfig config;
    config.timeout_seconds = 1;
    config.connect_timeout_seconds = 1;
    try {
        // bound-then-closed port; nothing listens here
        fetch_article("http://127.0.0.1:1/none", config);
        FAIL("expected FetchError");
    } catch (const FetchError& e) {
        const bool network_like = e.kind() == FetchErrorKind::Network ||
                                  e.kind() == FetchErrorKind::Timeout;
        CHECK(network_like);
    }
}

}  // TEST_SUITE
