#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "instances.hpp"
#include "rng.hpp"

namespace testutil {

// Fresh directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& label) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("tmoe_" + label + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline tmoe::Resources plain_resources(const std::vector<std::string>& vocab_tokens) {
    tmoe::Resources res;
    res.vocab = tmoe::Vocab::from_tokens(vocab_tokens);
    res.frozen = true;
    return res;
}

inline tmoe::RawInstance raw(const std::string& id, const std::string& passage,
                             const std::string& question, const std::string& choice, int y) {
    return tmoe::RawInstance{id, passage, question, choice, y};
}

}  // namespace testutil
