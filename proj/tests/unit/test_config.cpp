#include "rrsum/config.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

using namespace rrsum;

TEST_CASE("ini parsing: sections, comments, trimming") {
    const auto config = KeyValueConfig::parse_string(
        "# comment\n"
        "top = level\n"
        "[backend]\n"
        "model = gpt-x ; trailing comment\n"
        "temperature = 0.5\n"
        "\n"
        "[optimizer]\n"
        "n_similar = 7\n");
    CHECK(config.get_string("top", "") == "level");
    CHECK(config.get_string("backend.model", "") == "gpt-x");
    CHECK(config.get_double("backend.temperature", 0.0) == doctest::Approx(0.5));
    CHECK(config.get_int("optimizer.n_similar", 0) == 7);
    CHECK(config.get_int("optimizer.missing", 42) == 42);
}

TEST_CASE("ini parsing rejects malformed lines") {
    CHECK_THROWS_AS(static_cast<void>(KeyValueConfig::parse_string("[unclosed\n")), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(KeyValueConfig::parse_string("keywithoutvalue\n")),
                    ConfigError);
    CHECK_THROWS_AS(static_cast<void>(KeyValueConfig::parse_string("= value\n")), ConfigError);
}

TEST_CASE("typed getters validate their values") {
    const auto config = KeyValueConfig::parse_string("[a]\nx = notanumber\nb = maybe\n");
    CHECK_THROWS_AS(static_cast<void>(config.get_int("a.x", 0)), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(config.get_double("a.x", 0.0)), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(config.get_bool("a.b", false)), ConfigError);

    const auto booleans = KeyValueConfig::parse_string("t = on\nf = false\n");
    CHECK(booleans.get_bool("t", false));
    CHECK(!booleans.get_bool("f", true));
}

TEST_CASE("apply_config maps sections onto run and backend configs") {
    RunConfig run;
    BackendConfig backend;
    const auto config = KeyValueConfig::parse_string(
        "[backend]\n"
        "endpoint = http://localhost:9999/v1\n"
        "model = test-model\n"
        "max_retries = 1\n"
        "price_per_1k_prompt = 0.01\n"
        "[optimizer]\n"
        "n_similar = 3\n"
        "threshold = 0.6\n"
        "max_iterations = 4\n"
        "good_capacity = n\n"
        "bad_capacity = 2\n"
        "[search]\n"
        "subset_size = 10\n"
        "[eval]\n"
        "mode = fixed\n"
        "iterative = off\n"
        "limit = 25\n");
    apply_config(config, run, backend);

    CHECK(backend.endpoint == "http://localhost:9999/v1");
    CHECK(backend.model == "test-model");
    CHECK(backend.max_retries == 1);
    CHECK(run.optimizer.n_similar == 3);
    CHECK(run.optimizer.threshold == doctest::Approx(0.6));
    CHECK(run.optimizer.max_iterations == 4);
    CHECK(!run.optimizer.good_capacity.has_value());
    CHECK(run.optimizer.bad_capacity == Capacity{2});
    CHECK(run.search.subset_size == std::size_t{10});
    CHECK(run.mode == PromptMode::Fixed);
    CHECK(!run.iterative);
    CHECK(run.limit == std::size_t{25});
    CHECK(run.price_per_1k_prompt == doctest::Approx(0.01));
}

TEST_CASE("unknown config keys are an error") {
    RunConfig run;
    BackendConfig backend;
    const auto config = KeyValueConfig::parse_string("[backend]\nmodle = typo\n");
    CHECK_THROWS_WITH_AS(apply_config(config, run, backend), doctest::Contains("modle"),
                         ConfigError);
}
