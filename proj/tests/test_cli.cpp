#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dcht/eval/metrics.hpp"
#include "dcht/train/checkpoint.hpp"
#include "dcht/train/trainer.hpp"

using namespace dcht;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DCHT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

double energy(const std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    return e;
}

// Small model, one epoch, two steps: enough to exercise every surface.
const char* kTinyTrainConfig = R"({
  "model": {
    "frame": 64, "hop": 32, "sample_rate": 16000, "fusion": "both",
    "spectral": {"patch_size": 2, "embed_dim": 4, "depths": [2, 2],
                 "heads": [2, 2], "window": 2},
    "temporal": {"enc_channels": 4, "enc_kernel": 16, "enc_stride": 8,
                 "chunk": 8, "num_blocks": 1, "heads": 2, "gru_hidden": 8}
  },
  "alpha": 0.5, "batch": 1, "epochs": 1, "max_steps": 2, "warmup": 10, "seed": 3
})";

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    REQUIRE(f.good());
    f << text;
}

}  // namespace

TEST_CASE("usage errors exit 1 and help exits 0") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("mix --help") == 0);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("denoise --bogus x") == 1);
    CHECK(run_cli("mix") == 1);  // missing required --out
}

TEST_CASE("mix writes a dataset whose measured snr matches the request") {
    TempDir dir("dcht_cli_mix");
    REQUIRE(run_cli("mix --out " + dir.file("data") + " --count 3 --seconds 0.3 --snr 5 --seed 7") == 0);

    for (const char* sub : {"clean", "noisy", "noise"})
        CHECK(fs::is_directory(dir.file("data") + "/" + sub));

    std::ifstream manifest(dir.file("data") + "/manifest.txt");
    REQUIRE(manifest.good());
    std::vector<std::string> names;
    for (std::string line; std::getline(manifest, line);)
        if (!line.empty()) names.push_back(line);
    REQUIRE(names.size() == 3);
    CHECK(names[0] == "clip_000.wav");

    for (const std::string& name : names) {
        const AudioClip clean = read_wav(dir.file("data") + "/clean/" + name);
        const AudioClip noisy = read_wav(dir.file("data") + "/noisy/" + name);
        const AudioClip noise = read_wav(dir.file("data") + "/noise/" + name);
        REQUIRE(clean.length() == 4800);
        REQUIRE(noisy.length() == clean.length());

        // Additivity survives 16-bit quantization of each file.
        double max_add = 0.0;
        for (int64_t i = 0; i < clean.length(); ++i)
            max_add = std::max(max_add, std::fabs(noisy.samples[i] - clean.samples[i] -
                                                  noise.samples[i]));
        CHECK(max_add <= 2.0 / 32768.0);

        const double measured = 10.0 * std::log10(energy(clean.samples) / energy(noise.samples));
        CHECK(std::fabs(measured - 5.0) < 0.01);
    }
}

TEST_CASE("mix at 0 dB yields equal clean and noise power") {
    TempDir dir("dcht_cli_mix0");
    REQUIRE(run_cli("mix --out " + dir.file("d") + " --count 1 --seconds 0.25 --snr 0 --noise pink") == 0);
    const AudioClip clean = read_wav(dir.file("d") + "/clean/clip_000.wav");
    const AudioClip noise = read_wav(dir.file("d") + "/noise/clip_000.wav");
    const double ratio = energy(clean.samples) / energy(noise.samples);
    CHECK(std::fabs(10.0 * std::log10(ratio)) < 0.01);
}

TEST_CASE("train, denoise, and eval round trip through the binary") {
    TempDir dir("dcht_cli_roundtrip");
    const std::string data = dir.file("data");
    REQUIRE(run_cli("mix --out " + data + " --count 2 --seconds 0.2 --snr 5 --seed 11") == 0);
    write_file(dir.file("train.json"), kTinyTrainConfig);

    const std::string ckpt = dir.file("model.ckpt");
    REQUIRE(run_cli("train --config " + dir.file("train.json") + " --data " + data +
                    " --out " + ckpt + " --quiet") == 0);
    REQUIRE(fs::exists(ckpt));

    // Denoising with each branch yields a clip of the input length; the
    // temporal file matches the library forward bit for bit.
    const std::string noisy = data + "/noisy/clip_000.wav";
    REQUIRE(run_cli("denoise --ckpt " + ckpt + " --in " + noisy + " --out " +
                    dir.file("t.wav") + " --branch temporal") == 0);
    REQUIRE(run_cli("denoise --ckpt " + ckpt + " --in " + noisy + " --out " +
                    dir.file("s.wav") + " --branch spectral") == 0);
    REQUIRE(run_cli("denoise --ckpt " + ckpt + " --in " + noisy + " --out " +
                    dir.file("b.wav") + " --branch both") == 0);

    const AudioClip in = read_wav(noisy);
    const AudioClip t = read_wav(dir.file("t.wav"));
    const AudioClip s = read_wav(dir.file("s.wav"));
    const AudioClip b = read_wav(dir.file("b.wav"));
    REQUIRE(t.length() == in.length());
    REQUIRE(s.length() == in.length());
    REQUIRE(b.length() == in.length());

    const DchtModel model = model_from_checkpoint(load_checkpoint(ckpt));
    NoTapeScope no_tape;
    Rng rng(0);
    Tensor x = Tensor::from_vector({in.length()}, in.samples);
    AudioClip ref;
    ref.samples = model.forward(x, BranchMode::Temporal, false, rng).values();
    ref.sample_rate = model.cfg.sample_rate;
    write_wav(dir.file("ref.wav"), ref);
    const AudioClip ref_read = read_wav(dir.file("ref.wav"));
    CHECK(t.samples == ref_read.samples);

    // Fusion linearity up to one quantization step per addend.
    double max_diff = 0.0;
    for (int64_t i = 0; i < in.length(); ++i)
        max_diff = std::max(max_diff, std::fabs(b.samples[i] - s.samples[i] - t.samples[i]));
    CHECK(max_diff <= 2.0 / 32768.0);

    const std::string csv_path = dir.file("report.csv");
    REQUIRE(run_cli("eval --ckpt " + ckpt + " --data " + data + " --out " + csv_path) == 0);
    std::ifstream csv(csv_path);
    REQUIRE(csv.good());
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "name,sdr_in_db,sdr_out_db,delta_db,seconds");
    CHECK(lines[1].rfind("clip_000.wav,", 0) == 0);
    CHECK(lines[2].rfind("clip_001.wav,", 0) == 0);

    // A second eval writes the identical report.
    const std::string csv2_path = dir.file("report2.csv");
    REQUIRE(run_cli("eval --ckpt " + ckpt + " --data " + data + " --out " + csv2_path) == 0);
    std::ifstream a(csv_path), c(csv2_path);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sc((std::istreambuf_iterator<char>(c)), std::istreambuf_iterator<char>());
    CHECK(sa == sc);
}

TEST_CASE("data problems exit 2") {
    TempDir dir("dcht_cli_data_errors");
    CHECK(run_cli("train --config " + dir.file("absent.json") + " --data " + dir.file("d") +
                  " --out " + dir.file("o.ckpt")) == 2);

    write_file(dir.file("bad.json"), "{\"alpha\": 7}");
    CHECK(run_cli("train --config " + dir.file("bad.json") + " --data " + dir.file("d") +
                  " --out " + dir.file("o.ckpt")) == 2);

    write_file(dir.file("junk.ckpt"), "not a checkpoint");
    fs::create_directories(dir.file("w"));
    write_wav(dir.file("w/in.wav"), {std::vector<double>(4000, 0.1), 16000});
    CHECK(run_cli("denoise --ckpt " + dir.file("junk.ckpt") + " --in " + dir.file("w/in.wav") +
                  " --out " + dir.file("w/out.wav")) == 2);
    CHECK(run_cli("denoise --ckpt " + dir.file("absent.ckpt") + " --in " + dir.file("w/in.wav") +
                  " --out " + dir.file("w/out.wav")) == 2);

    CHECK(run_cli("eval --ckpt " + dir.file("absent.ckpt") + " --data " + dir.file("d")) == 2);
    CHECK(run_cli("mix --out " + dir.file("m") + " --clean-dir " + dir.file("nodir")) == 2);
}

TEST_CASE("bad argument values exit 1") {
    TempDir dir("dcht_cli_arg_errors");
    const std::string data = dir.file("data");
    REQUIRE(run_cli("mix --out " + data + " --count 1 --seconds 0.2") == 0);
    write_file(dir.file("train.json"), kTinyTrainConfig);
    const std::string ckpt = dir.file("m.ckpt");
    REQUIRE(run_cli("train --config " + dir.file("train.json") + " --data " + data +
                    " --out " + ckpt + " --quiet") == 0);

    CHECK(run_cli("denoise --ckpt " + ckpt + " --in " + data + "/noisy/clip_000.wav --out " +
                  dir.file("o.wav") + " --branch sideways") == 1);
    CHECK(run_cli("mix --out " + dir.file("m2") + " --count 0") == 1);
    CHECK(run_cli("mix --out " + dir.file("m3") + " --noise mauve") == 1);
}

TEST_CASE("a diverging run exits 3") {
    TempDir dir("dcht_cli_diverge");
    const std::string data = dir.file("data");
    REQUIRE(run_cli("mix --out " + data + " --count 2 --seconds 0.2 --snr 5") == 0);

    // An absurd learning-rate scale overflows the parameters after the first
    // step: the temporal mask path multiplies three of them together, so the
    // second step's forward pass is guaranteed non-finite.  Two clips make
    // sure that second step actually runs inside the single epoch.
    std::string cfg = kTinyTrainConfig;
    const std::string key = "\"alpha\": 0.5,";
    cfg.replace(cfg.find(key), key.size(), "\"alpha\": 0.5, \"lr_scale\": 1e200,");
    write_file(dir.file("diverge.json"), cfg);
    CHECK(run_cli("train --config " + dir.file("diverge.json") + " --data " + data +
                  " --out " + dir.file("o.ckpt") + " --quiet") == 3);
}

TEST_CASE("gradcheck subcommand passes on a fresh init") {
    CHECK(run_cli("gradcheck --seed 1") == 0);
}
