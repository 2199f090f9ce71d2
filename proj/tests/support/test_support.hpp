#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace panda::testing {

std::filesystem::path fixture(const std::string& name);
std::filesystem::path golden_dir();
std::string panda_binary();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;

    /// Last non-empty stdout line.
    [[nodiscard]] std::string last_line() const;
};

CliResult run_cli(const std::vector<std::string>& args, const std::string& stdin_text = "");

std::vector<std::string> read_lines(const std::string& path);

/// A synthetic three-class sentiment task: an expert file whose top logit is
/// the gold class, and an evaluation set with the same texts.
struct SentimentCorpus {
    std::string expert;
    std::string dataset;
    std::size_t n = 0;
};

SentimentCorpus write_sentiment_corpus(const TempDir& dir, std::size_t n);

/// `n` labeled examples with gold = i % num_classes.
std::string write_labeled_dataset(const TempDir& dir, const std::string& name, std::size_t n, int num_classes);

/// The pool-building and evaluation flags shared by the mock end-to-end runs.
std::vector<std::string> mock_flags();

}  // namespace panda::testing
