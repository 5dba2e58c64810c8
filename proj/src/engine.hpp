#pragma once

#include <map>
#include <string>
#include <vector>

#include "checkpoint.hpp"

namespace tmoe {

enum class Status { Ok = 0, Usage = 1, Data = 2, Check = 3 };

// Flat key/value option store. Values stay strings until a verb reads them;
// typed accessors validate and record the resolved value so the effective
// configuration can be logged.
class Options {
public:
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string str(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    long i64(const std::string& key, long fallback) const;
    uint64_t u64(const std::string& key, uint64_t fallback) const;
    uint64_t require_u64(const std::string& key) const;
    double f64(const std::string& key, double fallback) const;
    std::vector<std::string> all(const std::string& key) const;

    // One "key=value" line per resolved option, sorted by key.
    std::string effective() const;
    // Keys this verb never read -> usage error ("unknown flags rejected").
    void reject_unread() const;

private:
    std::string lookup(const std::string& key, const std::string& fallback, bool required) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    mutable std::map<std::string, std::string> resolved_;
    mutable std::map<std::string, bool> read_;
};

struct RunOutcome {
    Status status = Status::Ok;
    std::string report;
    std::string error;
};

// Executes one verb (train, pretrain, eval, predict, gradcheck, ablate,
// synth). Catches everything; the outcome carries the exit status.
RunOutcome run_verb(const std::string& verb, Options& options, const Logger& log);

}  // namespace tmoe
