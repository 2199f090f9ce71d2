#include "panda/environment.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "panda/error.hpp"
#include "panda/util.hpp"

namespace panda::env {

using nlohmann::json;

std::string extended_observation(const StepResult& step) {
    std::string out = step.observation;
    if (!step.inventory.empty()) out += "; In your inventory, you see: " + step.inventory;
    if (!step.room.empty()) out += " ; " + step.room;
    return out;
}

json to_json(const StepResult& s) {
    return {{"observation", s.observation},
            {"score", s.score},
            {"done", s.done},
            {"extra", {{"room", s.room}, {"inventory", s.inventory}}}};
}

StepResult step_result_from_json(const json& j) {
    if (!j.is_object()) throw EnvProtocolError("response is not an object");
    if (auto err = j.find("error"); err != j.end()) {
        throw EnvProtocolError("environment error: " + err->dump());
    }
    try {
        StepResult s;
        s.observation = j.at("observation").get<std::string>();
        s.score = j.at("score").get<double>();
        s.done = j.at("done").get<bool>();
        if (auto extra = j.find("extra"); extra != j.end() && extra->is_object()) {
            s.room = extra->value("room", "");
            s.inventory = extra->value("inventory", "");
        }
        return s;
    } catch (const json::exception& e) {
        throw EnvProtocolError(std::string("bad response: ") + e.what());
    }
}

// ---------------------------------------------------------------- toy

namespace {

struct ToyVariation {
    const char* id;
    std::vector<std::string> animals;
    const char* winner;
};

const std::vector<ToyVariation>& toy_variations() {
    static const std::vector<ToyVariation> v{
        {"0", {"chameleon", "giant tortoise", "baby rabbit"}, "giant tortoise"},
        {"1", {"mayfly", "elephant", "dog"}, "elephant"},
        {"2", {"parrot", "hamster", "frog"}, "parrot"},
    };
    return v;
}

}  // namespace

std::vector<std::string> ToyEnvironment::variations() {
    std::vector<std::string> ids;
    for (const auto& v : toy_variations()) ids.emplace_back(v.id);
    return ids;
}

std::string ToyEnvironment::winning_action(const std::string& variation) {
    for (const auto& v : toy_variations()) {
        if (variation == v.id) return std::string("focus on egg ") + v.winner;
    }
    throw EnvProtocolError("unknown variation \"" + variation + "\"");
}

std::string ToyEnvironment::room_text() const {
    std::string out = "This outside location is called the outside. Here you see: the agent, a substance called air";
    for (const auto& a : animals_) out += ", a " + a + " egg";
    return out + ". You also see: A door to the kitchen (that is open)";
}

StepResult ToyEnvironment::make(std::string observation, double score, bool done) const {
    return {std::move(observation), score, done, room_text(), "an orange"};
}

StepResult ToyEnvironment::reset(const std::string& task, const std::string& variation) {
    if (task != kTask) throw EnvProtocolError("unknown task \"" + task + "\"");
    const auto& all = toy_variations();
    auto it = std::find_if(all.begin(), all.end(), [&](const ToyVariation& v) { return variation == v.id; });
    if (it == all.end()) throw EnvProtocolError("unknown variation \"" + variation + "\"");
    animals_ = it->animals;
    winner_ = it->winner;
    active_ = true;
    finished_ = false;
    return make(
        "Your task is to find the animal with the longest life span. Focus on the egg of that animal. "
        "The animals are in the 'outside' location.",
        0.0, false);
}

StepResult ToyEnvironment::step(const std::string& action) {
    if (!active_) throw EnvProtocolError("step before reset");
    if (finished_) return make("The task is already finished.", 0.0, true);

    const auto a = trim(action);
    if (a == "look around") return make(room_text(), 0.0, false);

    constexpr std::string_view focus = "focus on egg ";
    if (starts_with(a, focus)) {
        const auto target = a.substr(focus.size());
        if (std::find(animals_.begin(), animals_.end(), target) == animals_.end()) {
            return make("No known action matches that input.", 0.0, false);
        }
        finished_ = true;
        if (target == winner_) return make("You focus on the " + target + " egg. Task completed.", 100.0, true);
        return make("You focus on the " + target + " egg. That is not the longest-lived animal.", 0.0, true);
    }
    return make("No known action matches that input.", 0.0, false);
}

// ---------------------------------------------------------------- stream client

StreamEnvironment::StreamEnvironment(std::istream& from_env, std::ostream& to_env) : in_(from_env), out_(to_env) {}

StepResult StreamEnvironment::roundtrip(const json& request) {
    out_ << request.dump() << '\n';
    out_.flush();
    std::string line;
    if (!std::getline(in_, line)) throw EnvProtocolError("environment closed the stream");
    try {
        return step_result_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
        throw EnvProtocolError(std::string("unparseable response: ") + e.what());
    }
}

StepResult StreamEnvironment::reset(const std::string& task, const std::string& variation) {
    return roundtrip({{"op", "reset"}, {"task", task}, {"variation", variation}});
}

StepResult StreamEnvironment::step(const std::string& action) { return roundtrip({{"op", "step"}, {"action", action}}); }

// ---------------------------------------------------------------- subprocess client

SubprocessEnvironment::SubprocessEnvironment(std::vector<std::string> argv) {
    if (argv.empty()) throw ConfigError("environment command is empty");
    // A dead child must surface as EnvProtocolError, not kill us via SIGPIPE.
    ::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw EnvProtocolError(std::string("pipe: ") + std::strerror(errno));
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw EnvProtocolError(std::string("pipe: ") + std::strerror(errno));
    }

    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw EnvProtocolError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

SubprocessEnvironment::~SubprocessEnvironment() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
    }
}

std::string SubprocessEnvironment::read_line() {
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            auto line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw EnvProtocolError("environment process closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

StepResult SubprocessEnvironment::roundtrip(const json& request) {
    auto line = request.dump() + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
        const auto n = ::write(to_child_, line.data() + off, line.size() - off);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw EnvProtocolError("cannot write to environment process");
        off += static_cast<std::size_t>(n);
    }
    try {
        return step_result_from_json(json::parse(read_line()));
    } catch (const json::parse_error& e) {
        throw EnvProtocolError(std::string("unparseable response: ") + e.what());
    }
}

StepResult SubprocessEnvironment::reset(const std::string& task, const std::string& variation) {
    return roundtrip({{"op", "reset"}, {"task", task}, {"variation", variation}});
}

StepResult SubprocessEnvironment::step(const std::string& action) {
    return roundtrip({{"op", "step"}, {"action", action}});
}

// ---------------------------------------------------------------- server

void serve(Environment& env, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json reply;
        try {
            const auto req = json::parse(line);
            const auto op = req.at("op").get<std::string>();
            if (op == "reset") {
                reply = to_json(env.reset(req.at("task").get<std::string>(), req.at("variation").get<std::string>()));
            } else if (op == "step") {
                reply = to_json(env.step(req.at("action").get<std::string>()));
            } else {
                reply = {{"error", "unknown op " + op}};
            }
        } catch (const std::exception& e) {
            reply = {{"error", e.what()}};
        }
        out << reply.dump() << '\n';
        out.flush();
    }
}

}  // namespace panda::env
