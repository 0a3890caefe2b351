#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "corank/digest.hpp"
#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/llm_backend.hpp"
#include "corank/prompts.hpp"
#include "support/temp_dir.hpp"

using namespace corank;
using nlohmann::json;

namespace {

ChatRequest request(std::string prompt = "hello")
{
    ChatRequest r;
    r.model_name = "m";
    r.prompt = std::move(prompt);
    return r;
}

/// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
  public:
    LocalServer()
    {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer()
    {
        server.stop();
        thread_.join();
    }
    [[nodiscard]] std::string url(const std::string& path) const
    {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }
    httplib::Server server;

  private:
    int port_ = 0;
    std::thread thread_;
};

class FlakyBackend final : public ChatBackend {
  public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    ChatResponse complete(const ChatRequest&) override
    {
        if (calls++ < failures_) {
            throw TransportError("connection reset");
        }
        return {"ok", 1, 1};
    }
    int calls = 0;

  private:
    int failures_;
};

}  // namespace

TEST_CASE("sha256 known answer")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("request digest covers model, prompt, temperature and seed only")
{
    const auto base = request_digest(request());
    CHECK(request_digest(request()) == base);
    auto r = request();
    r.model_name = "other";
    CHECK(request_digest(r) != base);
    r = request();
    r.prompt = "hello!";
    CHECK(request_digest(r) != base);
    r = request();
    r.temperature = 0.5;
    CHECK(request_digest(r) != base);
    r = request();
    r.seed = 43;
    CHECK(request_digest(r) != base);
    r = request();
    r.max_output_tokens = 7;
    CHECK(request_digest(r) == base);
}

TEST_CASE("request validation")
{
    CHECK_THROWS(request("").validate());
    auto r = request();
    r.temperature = -1;
    CHECK_THROWS(r.validate());
}

TEST_CASE("mock backend answers scripted, handler, listwise and extraction prompts")
{
    MockBackend mock;
    mock.push_response("ok");
    const auto scripted = mock.complete(request("anything"));
    CHECK(scripted.text == "ok");
    CHECK(scripted.prompt_tokens > 0);

    const std::vector<std::string> passages{"graph neural network survey", "cooking recipes", "neural decoding"};
    CHECK(mock.complete(request(build_listwise_prompt("graph neural network", passages))).text ==
          "[1] > [3] > [2]");

    for (auto kind : kAllFeatureKinds) {
        const auto text = mock.complete(request(render_extraction_prompt(
                                            kind, "Graph neural networks learn representations of molecules. "
                                                  "We evaluate message passing on chemistry benchmarks.")))
                              .text;
        CHECK_FALSE(text.empty());
    }

    mock.set_handler([](const ChatRequest& r) -> std::optional<std::string> {
        if (r.prompt == "special") {
            return "handled";
        }
        return std::nullopt;
    });
    CHECK(mock.complete(request("special")).text == "handled");
    CHECK_THROWS(mock.complete(request("not a known prompt")));
    CHECK(mock.calls() == 8);
}

TEST_CASE("record mode serves repeats from the cache")
{
    testing::TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache.jsonl");
    auto upstream = std::make_shared<MockBackend>();
    upstream->push_response("first");
    upstream->push_response("second");
    CachingBackend backend(cache, CacheMode::Record, upstream);
    CHECK(backend.complete(request()).text == "first");
    CHECK(backend.complete(request()).text == "first");
    CHECK(upstream->calls() == 1);
    CHECK(backend.hits() == 1);
    CHECK(backend.misses() == 1);

    ResponseCache reloaded(dir / "cache.jsonl");
    CHECK(reloaded.size() == 1);
    CHECK(reloaded.find(request_digest(request()))->text == "first");
}

TEST_CASE("replay mode misses are errors")
{
    auto cache = std::make_shared<ResponseCache>();
    cache->insert(request_digest(request("known")), {"cached", 3, 1});
    CachingBackend replay(cache, CacheMode::Replay);
    CHECK(replay.complete(request("known")).text == "cached");
    try {
        (void)replay.complete(request("unknown"));
        FAIL("expected ReplayMissError");
    } catch (const ReplayMissError& e) {
        CHECK(e.digest() == request_digest(request("unknown")));
    }
}

TEST_CASE("cache file with a torn line")
{
    testing::TempDir dir;
    {
        ResponseCache cache(dir / "c.jsonl");
        cache.insert("k1", {"v1", 1, 1});
    }
    write_file_atomic(dir / "c.jsonl", read_file(dir / "c.jsonl") + "{\"key\": \"k2\", \"resp");
    CHECK_THROWS_AS(ResponseCache(dir / "c.jsonl"), FormatError);
}

TEST_CASE("retry policy")
{
    std::vector<std::chrono::milliseconds> sleeps;
    auto sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

    auto flaky = std::make_shared<FlakyBackend>(2);
    RetryingBackend retry(flaky, RetryPolicy{}, sleeper);
    CHECK(retry.complete(request()).text == "ok");
    CHECK(flaky->calls == 3);
    CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                           std::chrono::milliseconds(2000)});

    auto dead = std::make_shared<FlakyBackend>(100);
    RetryingBackend give_up(dead, RetryPolicy{}, sleeper);
    try {
        (void)give_up.complete(request());
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.attempts() == 3);
    }
    CHECK(dead->calls == 3);

    auto parse_fail = std::make_shared<MockBackend>();
    parse_fail->set_handler([](const ChatRequest&) -> std::optional<std::string> { throw BackendError("400"); });
    RetryingBackend no_retry(parse_fail, RetryPolicy{}, sleeper);
    CHECK_THROWS_AS(no_retry.complete(request()), BackendError);
    CHECK(parse_fail->calls() == 1);
}

TEST_CASE("concurrency limit caps in-flight requests")
{
    auto slow = std::make_shared<MockBackend>();
    slow->set_handler([](const ChatRequest&) -> std::optional<std::string> {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        return "ok";
    });
    ConcurrencyLimitedBackend limited(slow, 2);
    {
        std::vector<std::jthread> threads;
        for (int i = 0; i < 8; ++i) {
            threads.emplace_back([&] {
                for (int j = 0; j < 3; ++j) {
                    (void)limited.complete(request());
                }
            });
        }
    }
    CHECK(slow->calls() == 24);
    CHECK(limited.peak_in_flight() <= 2);
    CHECK(limited.peak_in_flight() >= 1);
}

TEST_CASE("http chat backend request format and status handling")
{
    LocalServer srv;
    std::atomic<int> hits{0};
    json seen;
    std::string auth;
    srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (hits++ == 0) {
            res.status = 500;
            return;
        }
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"content":"[2] > [1]"}}],
                            "usage":{"prompt_tokens":11,"completion_tokens":4}})",
                        "application/json");
    });
    srv.server.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
        res.set_content("nope", "text/plain");
    });
    srv.server.Post("/garbled", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"choices\": []}", "application/json");
    });

    auto http = std::make_shared<HttpChatBackend>(HttpBackendConfig{srv.url("/v1/chat/completions"), "secret", 5});
    RetryingBackend retry(http, RetryPolicy{3, std::chrono::milliseconds(1)});
    auto req = request("rank these");
    req.max_output_tokens = 2048;
    const auto resp = retry.complete(req);
    CHECK(resp == ChatResponse{"[2] > [1]", 11, 4});
    CHECK(hits == 2);
    CHECK(auth == "Bearer secret");
    CHECK(seen["model"] == "m");
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["messages"][0]["content"] == "rank these");
    CHECK(seen["temperature"] == 1.0);
    CHECK(seen["seed"] == 42);
    CHECK(seen["max_tokens"] == 2048);

    HttpChatBackend bad(HttpBackendConfig{srv.url("/bad"), "", 5});
    CHECK_THROWS_AS(bad.complete(req), BackendError);
    HttpChatBackend garbled(HttpBackendConfig{srv.url("/garbled"), "", 5});
    CHECK_THROWS_AS(garbled.complete(req), BackendError);
    HttpChatBackend closed(HttpBackendConfig{"http://127.0.0.1:1/x", "", 1});
    CHECK_THROWS_AS(closed.complete(req), TransportError);
    CHECK_THROWS_AS(HttpChatBackend(HttpBackendConfig{"no-scheme", "", 1}), ConfigError);
}
