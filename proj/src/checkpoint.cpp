#include "checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "error.hpp"

namespace tmoe {

namespace {

using nlohmann::ordered_json;

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
    const uint64_t u = std::bit_cast<uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("checkpoint: truncated file '" + path + "'");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

double read_f64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw DataError("checkpoint: truncated file '" + path + "'");
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

ordered_json config_to_json(const StreamConfig& c) {
    ordered_json j;
    j["d_word"] = c.d_word;
    j["d_pos"] = c.d_pos;
    j["d_ne"] = c.d_ne;
    j["d_rel"] = c.d_rel;
    j["d_h"] = c.d_h;
    j["d_att"] = c.d_att;
    j["dropout"] = c.dropout;
    j["seed"] = c.seed;
    j["use_pos"] = c.use_pos;
    j["use_ne"] = c.use_ne;
    j["use_rel"] = c.use_rel;
    j["use_handcrafted"] = c.use_handcrafted;
    return j;
}

StreamConfig config_from_json(const ordered_json& j) {
    StreamConfig c;
    c.d_word = j.at("d_word").get<int>();
    c.d_pos = j.at("d_pos").get<int>();
    c.d_ne = j.at("d_ne").get<int>();
    c.d_rel = j.at("d_rel").get<int>();
    c.d_h = j.at("d_h").get<int>();
    c.d_att = j.at("d_att").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.use_pos = j.at("use_pos").get<bool>();
    c.use_ne = j.at("use_ne").get<bool>();
    c.use_rel = j.at("use_rel").get<bool>();
    c.use_handcrafted = j.at("use_handcrafted").get<bool>();
    return c;
}

bool is_embedding_table(const std::string& name) {
    return name.find("_emb.table") != std::string::npos;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");

    ordered_json meta;
    meta["kind"] = to_string(ckpt.kind);
    meta["config"] = config_to_json(ckpt.config);
    meta["epoch"] = ckpt.epoch;
    meta["best_dev_accuracy"] = ckpt.best_dev_accuracy;
    meta["source_task"] = ckpt.source_task;
    meta["vocab"] = ckpt.vocab_tokens;
    meta["pos_tags"] = ckpt.pos_tag_names;
    meta["ne_tags"] = ckpt.ne_tag_names;
    meta["relations"] = ckpt.rel_names;
    meta["freq_tokens"] = ckpt.freq_tokens;
    meta["freq_counts"] = ckpt.freq_counts;
    const std::string meta_str = meta.dump();

    out.write("TMOE", 4);
    write_u32(out, Checkpoint::kFormatVersion);
    write_u32(out, static_cast<uint32_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

    for (const auto& name : ckpt.params.names()) {
        const Tensor& t = ckpt.params.at(name);
        write_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<uint32_t>(t.rank()));
        for (int d : t.shape) write_u32(out, static_cast<uint32_t>(d));
        for (double v : t.values) write_f64(out, v);
    }
    if (!out) throw DataError("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open '" + path + "'");

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "TMOE", 4) != 0)
        throw DataError("checkpoint: bad magic in '" + path + "'");
    const uint32_t version = read_u32(in, path);
    if (version != Checkpoint::kFormatVersion)
        throw DataError("checkpoint: unsupported format version " + std::to_string(version) +
                        " in '" + path + "'");
    const uint32_t meta_len = read_u32(in, path);
    std::string meta_str(meta_len, '\0');
    if (!in.read(meta_str.data(), meta_len))
        throw DataError("checkpoint: truncated metadata in '" + path + "'");

    Checkpoint ckpt;
    try {
        ordered_json meta = ordered_json::parse(meta_str);
        ckpt.kind = parse_stream_kind(meta.at("kind").get<std::string>());
        ckpt.config = config_from_json(meta.at("config"));
        ckpt.epoch = meta.at("epoch").get<int>();
        ckpt.best_dev_accuracy = meta.at("best_dev_accuracy").get<double>();
        ckpt.source_task = meta.at("source_task").get<std::string>();
        ckpt.vocab_tokens = meta.at("vocab").get<std::vector<std::string>>();
        ckpt.pos_tag_names = meta.at("pos_tags").get<std::vector<std::string>>();
        ckpt.ne_tag_names = meta.at("ne_tags").get<std::vector<std::string>>();
        ckpt.rel_names = meta.at("relations").get<std::vector<std::string>>();
        ckpt.freq_tokens = meta.at("freq_tokens").get<std::vector<std::string>>();
        ckpt.freq_counts = meta.at("freq_counts").get<std::vector<long>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint: bad metadata in '" + path + "': " + e.what());
    }
    if (ckpt.freq_tokens.size() != ckpt.freq_counts.size())
        throw DataError("checkpoint: freq table length mismatch in '" + path + "'");

    while (true) {
        unsigned char probe;
        if (!in.read(reinterpret_cast<char*>(&probe), 1)) break;
        in.putback(static_cast<char>(probe));

        const uint32_t name_len = read_u32(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len))
            throw DataError("checkpoint: truncated tensor name in '" + path + "'");
        const uint32_t rank = read_u32(in, path);
        if (rank < 1 || rank > 3)
            throw DataError("checkpoint: bad tensor rank in '" + path + "'");
        std::vector<int> shape;
        for (uint32_t i = 0; i < rank; ++i)
            shape.push_back(static_cast<int>(read_u32(in, path)));
        Tensor t = Tensor::zeros(shape, true);
        for (auto& v : t.values) v = read_f64(in, path);
        ckpt.params.add(name, std::move(t));
    }
    return ckpt;
}

Checkpoint make_checkpoint(const StreamParams& stream, const Resources& resources, int epoch,
                           double best_dev_accuracy, const std::string& source_task) {
    Checkpoint ckpt;
    ckpt.kind = stream.kind;
    ckpt.config = stream.config;
    ckpt.epoch = epoch;
    ckpt.best_dev_accuracy = best_dev_accuracy;
    ckpt.source_task = source_task;
    ckpt.vocab_tokens = resources.vocab.tokens();
    ckpt.pos_tag_names = resources.pos_tags.tags();
    ckpt.ne_tag_names = resources.ne_tags.tags();
    ckpt.rel_names = resources.rel_vocab.names;
    std::vector<std::pair<std::string, long>> freq(resources.freq.begin(), resources.freq.end());
    std::sort(freq.begin(), freq.end());
    for (auto& [tok, count] : freq) {
        ckpt.freq_tokens.push_back(tok);
        ckpt.freq_counts.push_back(count);
    }
    ckpt.params = stream.params;
    return ckpt;
}

Resources resources_from_checkpoint(const Checkpoint& ckpt, const RelationLexicon& lexicon) {
    Resources res;
    res.vocab = Vocab::from_tokens(ckpt.vocab_tokens);
    res.pos_tags = TagVocab::from_tags(ckpt.pos_tag_names);
    res.ne_tags = TagVocab::from_tags(ckpt.ne_tag_names);
    res.rel_vocab = RelationVocab::from_names(ckpt.rel_names);
    res.lexicon = lexicon.remapped(res.rel_vocab);
    for (size_t i = 0; i < ckpt.freq_tokens.size(); ++i)
        res.freq[ckpt.freq_tokens[i]] = ckpt.freq_counts[i];
    res.frozen = true;
    return res;
}

StreamParams transfer_load(const Checkpoint& ckpt, const Resources& target,
                           const WordVectorTable& target_vectors, const StreamConfig& target_config,
                           const Logger& log) {
    StreamConfig want = target_config;
    want.d_att = target_config.att_dim();
    StreamConfig have = ckpt.config;
    if (want.d_word != have.d_word || want.d_pos != have.d_pos || want.d_ne != have.d_ne ||
        want.d_rel != have.d_rel || want.d_h != have.d_h || want.att_dim() != have.att_dim() ||
        want.use_handcrafted != have.use_handcrafted)
        throw DataError("transfer_load: layer shapes of checkpoint (" +
                        config_to_json(have).dump() + ") do not match target (" +
                        config_to_json(want).dump() + ")");

    StreamParams out = init_params(ckpt.kind, want, target_vectors, target);
    const std::string p = to_string(ckpt.kind);

    // Layer tensors first: verbatim copies, shapes must agree.
    std::string bad;
    for (const auto& name : out.params.names()) {
        if (is_embedding_table(name)) continue;
        if (!ckpt.params.contains(name)) {
            bad += (bad.empty() ? "" : ", ") + name;
            continue;
        }
        const Tensor& src = ckpt.params.at(name);
        Tensor& dst = out.params.at(name);
        if (src.shape != dst.shape) {
            bad += (bad.empty() ? "" : ", ") + name;
            continue;
        }
        dst.values = src.values;
    }
    if (!bad.empty()) throw DataError("transfer_load: mismatched tensors: " + bad);

    // Word rows matched by token string; unmatched rows keep fresh values.
    {
        const Tensor& src = ckpt.params.at(p + ".word_emb.table");
        Tensor& dst = out.params.at(p + ".word_emb.table");
        Vocab src_vocab = Vocab::from_tokens(ckpt.vocab_tokens);
        for (int row = 0; row < target.vocab.size(); ++row) {
            int src_row;
            if (row == Vocab::kPad || row == Vocab::kUnk) {
                src_row = row;
            } else {
                src_row = src_vocab.index(target.vocab.token(row));
                if (src_row == Vocab::kUnk) continue;  // token unseen at source
            }
            for (int j = 0; j < ckpt.config.d_word; ++j) dst.at(row, j) = src.at(src_row, j);
        }
    }

    auto copy_table = [&](const char* table, bool match, const char* what) {
        const std::string name = p + table;
        if (match) {
            out.params.at(name).values = ckpt.params.at(name).values;
        } else {
            log("transfer_load: " + std::string(what) +
                " vocabulary differs from checkpoint; table '" + name + "' reinitialized");
        }
    };
    copy_table(".pos_emb.table", ckpt.pos_tag_names == target.pos_tags.tags(), "POS tag");
    copy_table(".ne_emb.table", ckpt.ne_tag_names == target.ne_tags.tags(), "NE tag");
    copy_table(".rel_emb.table", ckpt.rel_names == target.rel_vocab.names, "relation");
    return out;
}

}  // namespace tmoe
