#include "dcht/model/dcht.hpp"

namespace dcht {

BranchMode branch_mode_from_string(const std::string& s) {
    if (s == "both") return BranchMode::Both;
    if (s == "spectral") return BranchMode::Spectral;
    if (s == "temporal") return BranchMode::Temporal;
    if (s == "passthrough") return BranchMode::Passthrough;
    throw std::invalid_argument("unknown branch mode '" + s +
                                "' (expected both|spectral|temporal|passthrough)");
}

std::string to_string(BranchMode m) {
    switch (m) {
        case BranchMode::Both: return "both";
        case BranchMode::Spectral: return "spectral";
        case BranchMode::Temporal: return "temporal";
        case BranchMode::Passthrough: return "passthrough";
    }
    throw std::invalid_argument("invalid branch mode value");
}

void DchtConfig::validate() const {
    if (frame < 2 || (frame & (frame - 1)) != 0)
        throw std::invalid_argument("frame must be a power of two >= 2, got " +
                                    std::to_string(frame));
    if (hop < 1 || hop > frame)
        throw std::invalid_argument("hop must be in [1, frame], got " + std::to_string(hop));
    if (sample_rate <= 0)
        throw std::invalid_argument("sample_rate must be positive, got " +
                                    std::to_string(sample_rate));
    spectral.validate();
    temporal.validate();
}

DchtModel::DchtModel(const DchtConfig& cfg_, Rng& rng) : cfg(cfg_) {
    cfg.validate();
    spectral = SwinUnet(cfg.spectral, rng);
    temporal = Dptnet(cfg.temporal, rng);
}

namespace {

template <class F>
Tensor run_branch(const char* name, F&& f) {
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(std::string(name) + " branch: " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + " branch: " + e.what());
    }
}

}  // namespace

Tensor DchtModel::forward(const Tensor& wave, BranchMode mode, bool training, Rng& rng) const {
    if (!wave.defined() || wave.dim() != 1)
        throw std::invalid_argument("forward expects a rank-1 waveform");
    if (mode == BranchMode::Passthrough) return wave;

    const int64_t length = wave.size();
    Tensor ys, yt;
    if (mode == BranchMode::Both || mode == BranchMode::Spectral) {
        ys = run_branch("spectral", [&] {
            ComplexTensor noisy_spec = stft(wave, cfg.frame, cfg.hop);
            SwinUnetOutput out = spectral.forward(noisy_spec, training, rng);
            return istft(out.enhanced, length, cfg.frame, cfg.hop);
        });
    }
    if (mode == BranchMode::Both || mode == BranchMode::Temporal) {
        yt = run_branch("temporal", [&] { return temporal.forward(wave, training, rng); });
    }
    if (mode == BranchMode::Spectral) return ys;
    if (mode == BranchMode::Temporal) return yt;
    return add(ys, yt);
}

ParamMap DchtModel::parameters(BranchMode mode) const {
    ParamMap pm;
    if (mode == BranchMode::Both || mode == BranchMode::Spectral)
        spectral.collect("spec", pm);
    if (mode == BranchMode::Both || mode == BranchMode::Temporal)
        temporal.collect("wave", pm);
    return pm;
}

}  // namespace dcht
