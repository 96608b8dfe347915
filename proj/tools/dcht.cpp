#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dcht/eval/gradsuite.hpp"
#include "dcht/eval/metrics.hpp"
#include "dcht/train/checkpoint.hpp"
#include "dcht/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace dcht;

namespace {

struct MixArgs {
    std::string out, clean_dir, noise_file;
    std::string noise = "white";
    double seconds = 1.0, snr = 5.0;
    int count = 8, rate = 16000;
    uint64_t seed = 1;
};

void run_mix(const MixArgs& a) {
    if (a.count < 1) throw std::invalid_argument("--count must be positive");
    if (a.rate < 1) throw std::invalid_argument("--rate must be positive");
    const NoiseKind kind = noise_kind_from_string(a.noise);
    Rng rng(a.seed);

    std::vector<std::pair<std::string, std::vector<double>>> cleans;
    if (!a.clean_dir.empty()) {
        for (const std::string& name : list_wavs(a.clean_dir))
            cleans.emplace_back(name, resample(read_wav(a.clean_dir + "/" + name), a.rate).samples);
        if (cleans.empty()) throw DataError("no .wav files under " + a.clean_dir);
    } else {
        const int64_t len = std::llround(a.seconds * a.rate);
        if (len < 1) throw std::invalid_argument("--seconds too small at this rate");
        for (int i = 0; i < a.count; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "clip_%03d.wav", i);
            cleans.emplace_back(name, make_voice(len, a.rate, rng));
        }
    }

    std::vector<double> noise_src;
    if (!a.noise_file.empty()) noise_src = resample(read_wav(a.noise_file), a.rate).samples;

    for (const char* sub : {"clean", "noisy", "noise"}) fs::create_directories(fs::path(a.out) / sub);
    std::ofstream manifest(fs::path(a.out) / "manifest.txt");
    if (!manifest) throw DataError("cannot write " + a.out + "/manifest.txt");

    for (const auto& [name, clean] : cleans) {
        const std::vector<double> src =
            noise_src.empty() ? make_noise(kind, static_cast<int64_t>(clean.size()), a.rate, rng)
                              : noise_src;
        std::vector<double> added;
        const std::vector<double> noisy = mix_at_snr(clean, src, a.snr, &added);
        write_wav((fs::path(a.out) / "clean" / name).string(), {clean, a.rate});
        write_wav((fs::path(a.out) / "noisy" / name).string(), {noisy, a.rate});
        write_wav((fs::path(a.out) / "noise" / name).string(), {added, a.rate});
        manifest << name << "\n";
    }
    std::cout << "wrote " << cleans.size() << " pairs under " << a.out << " (snr " << a.snr
              << " dB, " << (a.noise_file.empty() ? a.noise + " noise" : a.noise_file) << ")\n";
}

struct TrainArgs {
    std::string config, data, manifest, val_manifest, out;
    bool quiet = false;
};

void run_train(const TrainArgs& a) {
    const TrainConfig cfg = load_train_config(a.config);
    const auto train_set = load_dataset(a.data, a.manifest, cfg.model.sample_rate);
    std::vector<ClipPair> val_set;
    if (!a.val_manifest.empty())
        val_set = load_dataset(a.data, a.val_manifest, cfg.model.sample_rate);

    TrainResult res = train(cfg, train_set, val_set, a.quiet ? nullptr : &std::cout);
    save_checkpoint(a.out, cfg.model, res.best_params);
    std::cout << "saved " << a.out << " (digest "
              << checkpoint_digest(cfg.model, res.best_params) << ")\n";
}

struct DenoiseArgs {
    std::string ckpt, in, out;
    std::string branch = "both";
};

void run_denoise(const DenoiseArgs& a) {
    const BranchMode mode = branch_mode_from_string(a.branch);
    const DchtModel model = model_from_checkpoint(load_checkpoint(a.ckpt));
    const AudioClip clip = resample(read_wav(a.in), model.cfg.sample_rate);

    NoTapeScope no_tape;
    Rng rng(0);
    Tensor x = Tensor::from_vector({clip.length()}, clip.samples);
    Tensor y = model.forward(x, mode, false, rng);
    write_wav(a.out, {y.values(), model.cfg.sample_rate});
    std::cout << "wrote " << a.out << " (" << y.size() << " samples at "
              << model.cfg.sample_rate << " Hz, " << a.branch << " branch)\n";
}

struct EvalArgs {
    std::string ckpt, data, manifest, out;
    std::string branch = "both";
};

void run_eval(const EvalArgs& a) {
    const BranchMode mode = branch_mode_from_string(a.branch);
    const Checkpoint ck = load_checkpoint(a.ckpt);
    const DchtModel model = model_from_checkpoint(ck);
    const auto pairs = load_dataset(a.data, a.manifest, model.cfg.sample_rate);

    EvalReport report = evaluate(model, mode, pairs);
    report.checkpoint_digest = checkpoint_digest(ck.config, ck.params);
    if (!a.out.empty()) {
        std::ofstream f(a.out, std::ios::binary);
        if (!f) throw DataError("cannot write " + a.out);
        f << report.to_csv();
    }
    report.print_table(std::cout);
}

void run_gradcheck(uint64_t seed) {
    std::string failed;
    for (const GradSuiteItem& item : run_gradient_suite(seed)) {
        std::printf("%-4s %-42s max_rel %.3e  (tol %.0e)\n", item.pass ? "ok" : "FAIL",
                    item.name.c_str(), item.max_rel_err, item.tol);
        if (!item.pass) failed += (failed.empty() ? "" : ", ") + item.name;
    }
    if (!failed.empty()) throw NumericError("gradient check failed: " + failed);
    std::cout << "all gradient checks passed\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid speech enhancement: train, denoise, and evaluate"};
    app.require_subcommand(1);

    MixArgs mix;
    CLI::App* cmd_mix = app.add_subcommand("mix", "build a paired clean/noisy dataset");
    cmd_mix->add_option("--out", mix.out, "output dataset directory")->required();
    cmd_mix->add_option("--clean-dir", mix.clean_dir,
                        "take clean clips from this directory instead of synthesizing");
    cmd_mix->add_option("--count", mix.count, "number of synthetic clips");
    cmd_mix->add_option("--seconds", mix.seconds, "synthetic clip duration");
    cmd_mix->add_option("--snr", mix.snr, "mixture signal-to-noise ratio in dB");
    cmd_mix->add_option("--noise", mix.noise, "noise kind")
        ->check(CLI::IsMember({"white", "pink", "babble"}));
    cmd_mix->add_option("--noise-file", mix.noise_file, "use this clip as the noise source")
        ->excludes("--noise");
    cmd_mix->add_option("--rate", mix.rate, "sample rate in Hz");
    cmd_mix->add_option("--seed", mix.seed, "generator seed");

    TrainArgs tr;
    CLI::App* cmd_train = app.add_subcommand("train", "train a model and save a checkpoint");
    cmd_train->add_option("--config", tr.config, "training config JSON")->required();
    cmd_train->add_option("--data", tr.data, "dataset root with clean/ and noisy/")->required();
    cmd_train->add_option("--manifest", tr.manifest, "training split manifest");
    cmd_train->add_option("--val-manifest", tr.val_manifest, "validation split manifest");
    cmd_train->add_option("--out", tr.out, "checkpoint path to write")->required();
    cmd_train->add_flag("--quiet", tr.quiet, "suppress per-step logging");

    DenoiseArgs dn;
    CLI::App* cmd_denoise = app.add_subcommand("denoise", "enhance a single clip");
    cmd_denoise->add_option("--ckpt", dn.ckpt, "checkpoint path")->required();
    cmd_denoise->add_option("--in", dn.in, "noisy input wav")->required();
    cmd_denoise->add_option("--out", dn.out, "enhanced output wav")->required();
    cmd_denoise->add_option("--branch", dn.branch,
                            "both, spectral, temporal, or passthrough");

    EvalArgs ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "score a checkpoint over a dataset");
    cmd_eval->add_option("--ckpt", ev.ckpt, "checkpoint path")->required();
    cmd_eval->add_option("--data", ev.data, "dataset root with clean/ and noisy/")->required();
    cmd_eval->add_option("--manifest", ev.manifest, "evaluation split manifest");
    cmd_eval->add_option("--out", ev.out, "CSV report path");
    cmd_eval->add_option("--branch", ev.branch, "both, spectral, temporal, or passthrough");

    uint64_t gc_seed = 1;
    CLI::App* cmd_gc = app.add_subcommand("gradcheck", "run the finite-difference gradient suite");
    cmd_gc->add_option("--seed", gc_seed, "suite seed");

    cmd_mix->callback([&] { run_mix(mix); });
    cmd_train->callback([&] { run_train(tr); });
    cmd_denoise->callback([&] { run_denoise(dn); });
    cmd_eval->callback([&] { run_eval(ev); });
    cmd_gc->callback([&] { run_gradcheck(gc_seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
