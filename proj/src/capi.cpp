#include "tmoe/tmoe.h"

#include <iostream>
#include <string>

#include "engine.hpp"

struct tmoe_engine {
    tmoe::Options options;
    std::string report;
    std::string error;
};

extern "C" {

const char *tmoe_version(void) { return "1.0.0"; }

tmoe_engine *tmoe_engine_new(void) { return new (std::nothrow) tmoe_engine(); }

void tmoe_engine_free(tmoe_engine *eng) { delete eng; }

tmoe_status tmoe_engine_set(tmoe_engine *eng, const char *key, const char *value) {
    if (!eng || !key || !value) return TMOE_ERR_USAGE;
    eng->options.set(key, value);
    return TMOE_OK;
}

void tmoe_engine_reset(tmoe_engine *eng) {
    if (!eng) return;
    eng->options = tmoe::Options();
    eng->report.clear();
    eng->error.clear();
}

tmoe_status tmoe_engine_run(tmoe_engine *eng, const char *verb) {
    if (!eng) return TMOE_ERR_USAGE;
    eng->report.clear();
    eng->error.clear();
    if (!verb) {
        eng->error = "missing verb";
        return TMOE_ERR_USAGE;
    }
    tmoe::RunOutcome outcome = tmoe::run_verb(
        verb, eng->options, [](const std::string &msg) { std::cerr << msg << "\n"; });
    eng->report = std::move(outcome.report);
    eng->error = std::move(outcome.error);
    return static_cast<tmoe_status>(outcome.status);
}

const char *tmoe_engine_report(const tmoe_engine *eng) { return eng ? eng->report.c_str() : ""; }

const char *tmoe_engine_last_error(const tmoe_engine *eng) {
    return eng ? eng->error.c_str() : "";
}

}  // extern "C"
