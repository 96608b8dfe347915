#include "dcht/train/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dcht {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw DataError("unknown config key '" + key + "' in " + where);
    }
}

std::string score_mode_name(ScoreMode m) {
    return m == ScoreMode::Real ? "real" : "magnitude";
}

ScoreMode score_mode_from(const std::string& s) {
    if (s == "real") return ScoreMode::Real;
    if (s == "magnitude") return ScoreMode::Magnitude;
    throw DataError("unknown score_mode '" + s + "' (expected real|magnitude)");
}

json spectral_to_json(const SwinUnetConfig& c) {
    return json{{"patch_size", c.patch_size}, {"embed_dim", c.embed_dim},
                {"depths", c.depths},         {"heads", c.heads},
                {"window", c.window},         {"mlp_ratio", c.mlp_ratio},
                {"dropout", c.dropout},       {"score_mode", score_mode_name(c.score_mode)},
                {"mask_connection", c.mask_connection}};
}

SwinUnetConfig spectral_from_json(const json& j) {
    reject_unknown(j, {"patch_size", "embed_dim", "depths", "heads", "window", "mlp_ratio",
                       "dropout", "score_mode", "mask_connection"},
                   "spectral");
    SwinUnetConfig c;
    c.patch_size = j.value("patch_size", c.patch_size);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.depths = j.value("depths", c.depths);
    c.heads = j.value("heads", c.heads);
    c.window = j.value("window", c.window);
    c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
    c.dropout = j.value("dropout", c.dropout);
    c.score_mode = score_mode_from(j.value("score_mode", score_mode_name(c.score_mode)));
    c.mask_connection = j.value("mask_connection", c.mask_connection);
    return c;
}

json temporal_to_json(const DptConfig& c) {
    return json{{"enc_channels", c.enc_channels},
                {"enc_kernel", c.enc_kernel},
                {"enc_stride", c.enc_stride},
                {"chunk", c.chunk},
                {"num_blocks", c.num_blocks},
                {"heads", c.heads},
                {"gru_hidden", c.gru_hidden},
                {"compress_factor", c.compress_factor},
                {"dropout", c.dropout}};
}

DptConfig temporal_from_json(const json& j) {
    reject_unknown(j, {"enc_channels", "enc_kernel", "enc_stride", "chunk", "num_blocks", "heads",
                       "gru_hidden", "compress_factor", "dropout"},
                   "temporal");
    DptConfig c;
    c.enc_channels = j.value("enc_channels", c.enc_channels);
    c.enc_kernel = j.value("enc_kernel", c.enc_kernel);
    c.enc_stride = j.value("enc_stride", c.enc_stride);
    c.chunk = j.value("chunk", c.chunk);
    c.num_blocks = j.value("num_blocks", c.num_blocks);
    c.heads = j.value("heads", c.heads);
    c.gru_hidden = j.value("gru_hidden", c.gru_hidden);
    c.compress_factor = j.value("compress_factor", c.compress_factor);
    c.dropout = j.value("dropout", c.dropout);
    return c;
}

json model_to_json(const DchtConfig& c) {
    return json{{"frame", c.frame},
                {"hop", c.hop},
                {"sample_rate", c.sample_rate},
                {"fusion", to_string(c.fusion)},
                {"spectral", spectral_to_json(c.spectral)},
                {"temporal", temporal_to_json(c.temporal)}};
}

DchtConfig model_from_json(const json& j) {
    reject_unknown(j, {"frame", "hop", "sample_rate", "fusion", "spectral", "temporal"}, "model");
    DchtConfig c;
    c.frame = j.value("frame", c.frame);
    c.hop = j.value("hop", c.hop);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    if (j.contains("fusion")) c.fusion = branch_mode_from_string(j.at("fusion").get<std::string>());
    if (j.contains("spectral")) c.spectral = spectral_from_json(j.at("spectral"));
    if (j.contains("temporal")) c.temporal = temporal_from_json(j.at("temporal"));
    return c;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("config parse error: ") + e.what());
    }
}

}  // namespace

void TrainConfig::validate() const {
    model.validate();
    loss.validate();
    if (!(lr_scale > 0.0)) throw std::invalid_argument("lr_scale must be positive");
    if (warmup < 1) throw std::invalid_argument("warmup must be >= 1");
    if (lr_dmodel < 0) throw std::invalid_argument("lr_dmodel must be >= 0");
    if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
    if (model.fusion == BranchMode::Passthrough)
        throw std::invalid_argument("passthrough mode has no trainable parameters");
}

std::string to_json_text(const DchtConfig& cfg) { return model_to_json(cfg).dump(); }

DchtConfig dcht_config_from_json_text(const std::string& text) {
    return model_from_json(parse(text));
}

std::string to_json_text(const TrainConfig& cfg) {
    json j{{"model", model_to_json(cfg.model)},
           {"alpha", cfg.loss.alpha},
           {"alpha_energy", cfg.loss.energy_mode},
           {"lr_scale", cfg.lr_scale},
           {"warmup", cfg.warmup},
           {"lr_dmodel", cfg.lr_dmodel},
           {"clip_norm", cfg.clip_norm},
           {"batch", cfg.batch},
           {"epochs", cfg.epochs},
           {"max_steps", cfg.max_steps},
           {"seed", cfg.seed}};
    return j.dump();
}

TrainConfig train_config_from_json_text(const std::string& text) {
    json j = parse(text);
    reject_unknown(j, {"model", "alpha", "alpha_energy", "lr_scale", "warmup", "lr_dmodel",
                       "clip_norm", "batch", "epochs", "max_steps", "seed"},
                   "train config");
    TrainConfig c;
    if (j.contains("model")) c.model = model_from_json(j.at("model"));
    c.loss.alpha = j.value("alpha", c.loss.alpha);
    c.loss.energy_mode = j.value("alpha_energy", c.loss.energy_mode);
    c.lr_scale = j.value("lr_scale", c.lr_scale);
    c.warmup = j.value("warmup", c.warmup);
    c.lr_dmodel = j.value("lr_dmodel", c.lr_dmodel);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.batch = j.value("batch", c.batch);
    c.epochs = j.value("epochs", c.epochs);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.seed = j.value("seed", c.seed);
    return c;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    // A bad value in a config file is bad data even when the same check
    // guards programmatic use as an argument error.
    try {
        TrainConfig cfg = train_config_from_json_text(text.str());
        cfg.validate();
        return cfg;
    } catch (const std::invalid_argument& e) {
        throw DataError("config " + path + ": " + e.what());
    }
}

}  // namespace dcht
