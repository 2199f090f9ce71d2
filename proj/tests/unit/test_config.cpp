#include <doctest.h>

#include "panda/config.hpp"
#include "panda/error.hpp"

using namespace panda;
using namespace panda::config;

namespace {

Settings::EnvLookup fake_env(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        if (auto it = vars.find(name); it != vars.end()) return it->second;
        return std::nullopt;
    };
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("config text parsing") {
    const auto m = parse_config_text("# comment\n\n top-n = 3 \nprovider=mock\r\nempty =\n");
    CHECK(m.at("top_n") == "3");
    CHECK(m.at("provider") == "mock");
    CHECK(m.at("empty").empty());
    CHECK_THROWS_AS(parse_config_text("a = 1\nno equals here\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(" = 1\n"), ConfigError);
}

TEST_CASE("cli beats env beats file beats default") {
    Settings s(fake_env({{"PANDA_K", "5"}, {"PANDA_SEED", "11"}}));
    s.set_file_values({{"k", "4"}, {"seed", "10"}, {"top_n", "7"}});
    s.set_cli("k", "6");
    CHECK(s.get_size("k", 1) == 6);
    CHECK(s.source_of("k") == "cli");
    CHECK(s.get_u64("seed", 0) == 11);
    CHECK(s.source_of("seed") == "env");
    CHECK(s.get_size("top_n", 2) == 7);
    CHECK(s.source_of("top_n") == "file");
    CHECK(s.get_size("workers", 4) == 4);
    CHECK(s.source_of("workers") == "default");
}

TEST_CASE("environment variable names") {
    CHECK(Settings::env_name("embed_dim") == "PANDA_EMBED_DIM");
    CHECK(Settings::env_name("top-n") == "PANDA_TOP_N");
}

TEST_CASE("typed accessors reject malformed values") {
    Settings s(fake_env({}));
    s.set_file_values({{"n", "-3"}, {"x", "1.5e"}, {"b", "maybe"}, {"ok", "Yes"}, {"d", "0.25"}});
    CHECK_THROWS_AS((void)s.get_u64("n", 0), ConfigError);
    CHECK_THROWS_AS((void)s.get_double("x"), ConfigError);
    CHECK_THROWS_AS((void)s.get_bool("b", false), ConfigError);
    CHECK(s.get_bool("ok", false));
    CHECK(s.get_double("d") == 0.25);
    CHECK_FALSE(s.get_double("absent").has_value());
    CHECK_THROWS_AS((void)s.require("absent"), ConfigError);
}

TEST_CASE("config hash is stable and ignores secrets") {
    PipelineConfig a;
    a.command = "eval";
    a.labels = {"neg", "pos"};
    PipelineConfig b = a;
    b.llm_key = "sk-secret";
    b.embed_key = "other";
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 64);
    CHECK(a.to_json().dump().find("secret") == std::string::npos);
    b.seed = 1;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("list splitting") {
    CHECK(split_list(" a, b ,,c ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_list("").empty());
}

}
