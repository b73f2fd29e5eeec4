#include "rrsum/backend.hpp"

#include "rrsum/optimizer.hpp"
#include "rrsum/similarity.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace rrsum;
using testsupport::fixture;

namespace {

Prompt tiny_prompt() {
    Prompt prompt;
    prompt.messages = {{Role::System, "task"}, {Role::User, "question"}};
    return prompt;
}

// Local chat-completions stand-in with a scriptable status sequence.
class FakeServer {
public:
    explicit FakeServer(std::vector<int> statuses, int delay_ms = 0)
        : statuses_(std::move(statuses)), delay_ms_(delay_ms) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            const int n = static_cast<int>(requests_.fetch_add(1));
            const int active = active_.fetch_add(1) + 1;
            int expected = peak_active_.load();
            while (active > expected && !peak_active_.compare_exchange_weak(expected, active)) {
            }
            if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
            last_auth_ = req.get_header_value("Authorization");
            last_body_ = req.body;

            const int status =
                statuses_.empty() ? 200
                                  : statuses_[std::min<std::size_t>(n, statuses_.size() - 1)];
            if (status == 200) {
                nlohmann::json reply = {
                    {"choices", {{{"message", {{"role", "assistant"}, {"content", "generated"}}}}}},
                    {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}},
                };
                res.set_content(reply.dump(), "application/json");
            } else if (status == -1) {  // malformed 200
                res.set_content("{\"weird\": true}", "application/json");
            } else {
                res.status = status;
                res.set_content("{}", "application/json");
            }
            active_.fetch_sub(1);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int requests() const { return static_cast<int>(requests_.load()); }
    int peak_active() const { return peak_active_.load(); }
    std::string last_auth() const { return last_auth_; }
    std::string last_body() const { return last_body_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::vector<int> statuses_;
    int delay_ms_ = 0;
    std::atomic<int> requests_{0};
    std::atomic<int> active_{0};
    std::atomic<int> peak_active_{0};
    std::string last_auth_;
    std::string last_body_;
};

BackendConfig fast_config(const std::string& endpoint, int max_retries = 2) {
    BackendConfig config;
    config.endpoint = endpoint;
    config.max_retries = max_retries;
    config.retry_backoff = std::chrono::milliseconds(5);
    config.timeout = std::chrono::milliseconds(2000);
    return config;
}

}  // namespace

TEST_CASE("scripted mock returns responses in order and repeats the last one") {
    MockBackend two(MockScript::scripted({"A", "B"}));
    CHECK(two.complete(tiny_prompt()).text == "A");
    CHECK(two.complete(tiny_prompt()).text == "B");

    MockBackend one(MockScript::scripted({"only"}));
    CHECK(one.complete(tiny_prompt()).text == "only");
    CHECK(one.complete(tiny_prompt()).text == "only");
    CHECK(one.call_count() == 2);
}

TEST_CASE("scripted mock is deterministic across instances") {
    MockBackend a(MockScript::scripted({"x", "y", "z"}));
    MockBackend b(MockScript::scripted({"x", "y", "z"}));
    for (int i = 0; i < 5; ++i) {
        CHECK(a.complete(tiny_prompt()).text == b.complete(tiny_prompt()).text);
    }
}

TEST_CASE("nearest-echo mock returns the top-1 exemplar impression") {
    const auto corpus = load_corpus(fixture("corpus20.jsonl"));
    const auto index = build_index(corpus, default_rules());
    const auto tests = load_corpus(fixture("test5.jsonl"));

    SearchConfig search;
    search.n_similar = 5;
    CorpusHandles handles{corpus, index, nullptr};
    const auto query = label_report(tests[0].findings, default_rules());
    const auto hits = top_k_similar(query, index, search);
    const auto exemplars = retrieve_exemplars(query, handles, search);

    const auto prompt = build_dynamic_prompt(tests[0].findings, exemplars, {});
    MockBackend echo(MockScript::nearest_echo());
    const auto result = echo.complete(prompt);

    // Same impression the similarity index ranks first.
    const auto top = std::find_if(corpus.begin(), corpus.end(), [&](const RadiologyReport& r) {
        return r.id == hits[0].report_id;
    });
    REQUIRE(top != corpus.end());
    CHECK(result.text == top->impression);
    CHECK(result.text == "Moderate right apical pneumothorax.");
}

TEST_CASE("template mock always returns its text") {
    MockBackend fixed(MockScript::fixed("always this"));
    CHECK(fixed.complete(tiny_prompt()).text == "always this");
    CHECK(fixed.complete(tiny_prompt()).text == "always this");
}

TEST_CASE("mock scripts load from JSON") {
    const auto script = MockScript::load(fixture("scripted_alg1.json"));
    CHECK(script.mode == MockScript::Mode::Scripted);
    REQUIRE(script.responses.size() == 3);
    CHECK(script.responses[1] == "no disease");
}

TEST_CASE("estimate_cost sums token prices") {
    CHECK(estimate_cost({}, 0.001, 0.002) == 0.0);

    std::vector<CompletionResult> one(1);
    one[0].prompt_tokens = 1000;
    one[0].completion_tokens = 1000;
    CHECK(estimate_cost(one, 0.001, 0.002) == doctest::Approx(0.003).epsilon(1e-12));

    // Hand sum over three calls: (500,100), (1500,0), (0,250).
    std::vector<CompletionResult> three(3);
    three[0].prompt_tokens = 500;
    three[0].completion_tokens = 100;
    three[1].prompt_tokens = 1500;
    three[2].completion_tokens = 250;
    const double expected = (500 + 1500) / 1000.0 * 0.001 + (100 + 250) / 1000.0 * 0.002;
    CHECK(estimate_cost(three, 0.001, 0.002) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("http backend sends the wire format and parses the reply") {
    FakeServer server({200});
    HttpBackend backend(fast_config(server.endpoint()), "test-key");

    const auto result = backend.complete(tiny_prompt());
    CHECK(result.text == "generated");
    CHECK(result.prompt_tokens == 12);
    CHECK(result.completion_tokens == 3);
    CHECK(server.last_auth() == "Bearer test-key");

    const auto body = nlohmann::json::parse(server.last_body());
    CHECK(body["model"] == "gpt-3.5-turbo");
    CHECK(body["temperature"] == 0.0);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "question");
}

TEST_CASE("transient statuses are retried until success") {
    FakeServer server({429, 500, 200});
    HttpBackend backend(fast_config(server.endpoint(), 3), "k");
    const auto result = backend.complete(tiny_prompt());
    CHECK(result.text == "generated");
    CHECK(server.requests() == 3);
}

TEST_CASE("auth failures are never retried") {
    FakeServer server({401});
    HttpBackend backend(fast_config(server.endpoint(), 5), "k");
    CHECK_THROWS_AS(static_cast<void>(backend.complete(tiny_prompt())), AuthError);
    CHECK(server.requests() == 1);
}

TEST_CASE("a missing key is an auth error before any request") {
    FakeServer server({200});
    HttpBackend backend(fast_config(server.endpoint()), "");
    CHECK_THROWS_AS(static_cast<void>(backend.complete(tiny_prompt())), AuthError);
    CHECK(server.requests() == 0);
}

TEST_CASE("rate limiting exhausts retries then raises RateLimitedError") {
    FakeServer server({429, 429, 429, 429});
    HttpBackend backend(fast_config(server.endpoint(), 2), "k");
    CHECK_THROWS_AS(static_cast<void>(backend.complete(tiny_prompt())), RateLimitedError);
    CHECK(server.requests() == 3);  // initial try + 2 retries
}

TEST_CASE("malformed responses are surfaced without retry") {
    FakeServer server({-1});
    HttpBackend backend(fast_config(server.endpoint(), 3), "k");
    CHECK_THROWS_AS(static_cast<void>(backend.complete(tiny_prompt())), MalformedResponseError);
    CHECK(server.requests() == 1);
}

TEST_CASE("unreachable hosts exhaust retries into TimeoutError") {
    BackendConfig config = fast_config("http://127.0.0.1:1/v1", 1);
    config.timeout = std::chrono::milliseconds(200);
    HttpBackend backend(config, "k");
    CHECK_THROWS_AS(static_cast<void>(backend.complete(tiny_prompt())), TimeoutError);
}

TEST_CASE("concurrent completions never exceed the in-flight cap") {
    FakeServer server({}, 40);
    BackendConfig config = fast_config(server.endpoint());
    config.max_in_flight = 2;
    HttpBackend backend(config, "k");

    std::vector<std::thread> callers;
    std::atomic<int> ok{0};
    for (int i = 0; i < 6; ++i) {
        callers.emplace_back([&] {
            if (backend.complete(tiny_prompt()).text == "generated") ok.fetch_add(1);
        });
    }
    for (auto& caller : callers) caller.join();
    CHECK(ok.load() == 6);
    CHECK(server.requests() == 6);
    CHECK(server.peak_active() <= 2);
}

TEST_CASE("make_backend understands the spec strings") {
    BackendConfig config;
    CHECK(make_backend("mock:nearest_echo", config)->name() == "mock:nearest_echo");
    CHECK(make_backend("mock:template:hello", config)->name() == "mock:template");
    CHECK(make_backend(std::string("mock:") + fixture("scripted_alg1.json").string(), config)
              ->name() == "mock:scripted");
    CHECK_THROWS_AS(static_cast<void>(make_backend("carrier-pigeon", config)), ConfigError);
}
