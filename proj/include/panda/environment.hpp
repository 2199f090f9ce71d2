#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace panda::env {

struct StepResult {
    std::string observation;
    double score = 0.0;
    bool done = false;
    std::string room;
    std::string inventory;

    bool operator==(const StepResult&) const = default;
};

/// Observation extended with inventory and room text, e.g.
/// "You move to the outside.; In your inventory, you see: an orange ; This outside location is ...".
std::string extended_observation(const StepResult& step);

nlohmann::json to_json(const StepResult& step);
/// Throws EnvProtocolError on missing or mistyped fields.
StepResult step_result_from_json(const nlohmann::json& j);

/// A text environment. Instances are single-episode state machines and are
/// not shared between threads.
class Environment {
public:
    virtual ~Environment() = default;
    virtual StepResult reset(const std::string& task, const std::string& variation) = 0;
    virtual StepResult step(const std::string& action) = 0;
};

/// Deterministic in-process environment for tests and demos. Task
/// "find-longest-lived": the agent must "focus on egg <animal>" for the
/// longest-lived animal in the room. Focusing on the wrong egg ends the
/// episode with score 0; "look around" repeats the room; anything else is
/// a no-op.
class ToyEnvironment final : public Environment {
public:
    StepResult reset(const std::string& task, const std::string& variation) override;
    StepResult step(const std::string& action) override;

    static constexpr const char* kTask = "find-longest-lived";
    /// Variation ids accepted by reset.
    static std::vector<std::string> variations();
    /// The action that wins a variation.
    static std::string winning_action(const std::string& variation);

private:
    std::string room_text() const;
    StepResult make(std::string observation, double score, bool done) const;

    std::vector<std::string> animals_;
    std::string winner_;
    bool active_ = false;
    bool finished_ = false;
};

/// Client half of the line-delimited JSON protocol over a byte stream pair.
class StreamEnvironment final : public Environment {
public:
    StreamEnvironment(std::istream& from_env, std::ostream& to_env);

    StepResult reset(const std::string& task, const std::string& variation) override;
    StepResult step(const std::string& action) override;

private:
    StepResult roundtrip(const nlohmann::json& request);

    std::istream& in_;
    std::ostream& out_;
};

/// Spawns `argv` and speaks the protocol over its stdin/stdout.
class SubprocessEnvironment final : public Environment {
public:
    explicit SubprocessEnvironment(std::vector<std::string> argv);
    ~SubprocessEnvironment() override;
    SubprocessEnvironment(const SubprocessEnvironment&) = delete;
    SubprocessEnvironment& operator=(const SubprocessEnvironment&) = delete;

    StepResult reset(const std::string& task, const std::string& variation) override;
    StepResult step(const std::string& action) override;

private:
    StepResult roundtrip(const nlohmann::json& request);
    std::string read_line();

    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// Server half: answers requests from `in` on `out` until EOF. Malformed
/// requests get {"error": "..."} and the loop continues.
void serve(Environment& env, std::istream& in, std::ostream& out);

}  // namespace panda::env
