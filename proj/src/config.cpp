#include "panda/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "panda/error.hpp"
#include "panda/util.hpp"

namespace panda::config {

namespace {

std::string normalise_key(std::string key) {
    key = trim(key);
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        auto key = normalise_key(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return out;
}

Settings::Settings()
    : env_([](const std::string& name) -> std::optional<std::string> {
          if (const char* v = std::getenv(name.c_str())) return std::string(v);
          return std::nullopt;
      }) {}

Settings::Settings(EnvLookup env) : env_(std::move(env)) {}

std::string Settings::env_name(const std::string& key) {
    std::string out = "PANDA_";
    for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return out;
}

void Settings::set_cli(const std::string& key, std::string value) { cli_[normalise_key(key)] = std::move(value); }

void Settings::set_file_values(std::map<std::string, std::string> values) { file_ = std::move(values); }

void Settings::load_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw ConfigError("cannot read config file " + path);
    }
    file_ = parse_config_text(text);
}

std::optional<std::string> Settings::get(const std::string& key) const {
    if (auto it = cli_.find(key); it != cli_.end()) return it->second;
    if (auto v = env_(env_name(key))) return v;
    if (auto it = file_.find(key); it != file_.end()) return it->second;
    return std::nullopt;
}

std::string Settings::source_of(const std::string& key) const {
    if (cli_.contains(key)) return "cli";
    if (env_(env_name(key))) return "env";
    if (file_.contains(key)) return "file";
    return "default";
}

std::string Settings::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::string Settings::require(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) throw ConfigError("missing required setting \"" + key + "\"");
    return *v;
}

std::size_t Settings::get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t Settings::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        if (!v->empty() && v->front() == '-') throw std::invalid_argument("negative");
        const auto parsed = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("setting \"" + key + "\" must be a non-negative integer, got \"" + *v + "\"");
    }
}

std::optional<double> Settings::get_double(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("setting \"" + key + "\" must be a number, got \"" + *v + "\"");
    }
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError("setting \"" + key + "\" must be a boolean, got \"" + *v + "\"");
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j{{"command", command},
                     {"task", task},
                     {"labels", labels},
                     {"kind", prompt::to_string(mode.kind)},
                     {"shots", mode.shots},
                     {"with_panda", mode.with_panda},
                     {"ablation", prompt::to_string(mode.ablation)},
                     {"learning_mode", learning_mode},
                     {"top_n", top_n},
                     {"k", k},
                     {"seed", seed},
                     {"provider", provider},
                     {"model", model},
                     {"llm_endpoint", llm_endpoint},
                     {"embedder", embedder},
                     {"embed_dim", embed_dim},
                     {"embed_model", embed_model},
                     {"paths", paths}};
    j["min_similarity"] = min_similarity ? nlohmann::json(*min_similarity) : nlohmann::json(nullptr);
    return j;
}

std::string PipelineConfig::hash() const { return sha256_hex(to_json().dump()); }

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(sep, start);
        if (end == std::string::npos) end = s.size();
        auto item = trim(std::string_view(s).substr(start, end - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = end + 1;
    }
    return out;
}

}  // namespace panda::config
