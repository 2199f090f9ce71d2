#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "panda/prompts.hpp"

namespace panda::config {

/// Parses "key = value" lines; '#' starts a comment line, blank lines are
/// ignored, keys are trimmed and normalised ('-' -> '_'). Throws ConfigError
/// with the line number on anything else.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Layered lookup: CLI flag > environment variable (PANDA_<KEY>) > config
/// file > default.
class Settings {
public:
    using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

    Settings();
    explicit Settings(EnvLookup env);

    void set_cli(const std::string& key, std::string value);
    void set_file_values(std::map<std::string, std::string> values);
    void load_file(const std::string& path);

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::string require(const std::string& key) const;
    [[nodiscard]] std::size_t get_size(const std::string& key, std::size_t fallback) const;
    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] std::optional<double> get_double(const std::string& key) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

    /// "cli", "env", "file" or "default".
    [[nodiscard]] std::string source_of(const std::string& key) const;

    static std::string env_name(const std::string& key);

private:
    EnvLookup env_;
    std::map<std::string, std::string> cli_;
    std::map<std::string, std::string> file_;
};

/// Resolved settings for one pipeline command. Secrets are held but never
/// serialised into the config hash.
struct PipelineConfig {
    std::string command;
    std::string task;
    std::vector<std::string> labels;
    prompt::InferenceMode mode;
    std::string learning_mode = "classification";
    std::size_t top_n = 2;
    std::size_t k = 6;
    std::optional<double> min_similarity;
    std::uint64_t seed = 0;
    std::size_t workers = 4;

    std::map<std::string, std::string> paths;  ///< expert, pool, dataset, train, report, cache, ...

    std::string provider = "mock";
    std::string model;
    std::string llm_endpoint;
    std::string llm_key;
    std::string mock_rules;
    int retries = 3;
    long long timeout_ms = 60000;

    std::string embedder = "hash";
    std::size_t embed_dim = 256;
    std::string embed_endpoint;
    std::string embed_key;
    std::string embed_model;

    [[nodiscard]] nlohmann::json to_json() const;
    /// SHA-256 over the canonical JSON form.
    [[nodiscard]] std::string hash() const;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace panda::config
