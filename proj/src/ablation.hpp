#pragma once

#include <string>
#include <vector>

#include "train.hpp"

namespace tmoe {

// Channel switches the ablation sweep can turn off one at a time.
enum class AblationFlag { Pos, Ne, Handcrafted, Relations, WordVectors };

std::string to_string(AblationFlag flag);
AblationFlag parse_ablation_flag(const std::string& name);  // UsageError on unknown

struct AblationRow {
    std::string name;  // "all_on" or "no_<flag>"
    double dev_accuracy = 0.0;
};

struct AblationSetup {
    StreamKind kind = StreamKind::PQCN;
    std::vector<Example> train;
    std::vector<Example> dev;
    Resources resources;
    WordVectorTable pretrained_vectors;  // used unless WordVectors is disabled
    StreamConfig stream_config;
    TrainConfig train_config;
    std::vector<AblationFlag> flags;  // one "no_X" row per entry
};

// Trains and evaluates once with everything on, then once per disabled flag
// (embedding channels zeroed, handcrafted columns omitted, or the word table
// randomly reinitialized). Every row runs from the same seed.
std::vector<AblationRow> ablation_run(const AblationSetup& setup, const Logger& log = nullptr);

std::string ablation_table(const std::vector<AblationRow>& rows);          // aligned text
std::string ablation_machine_rows(const std::vector<AblationRow>& rows);   // name<TAB>accuracy

}  // namespace tmoe
