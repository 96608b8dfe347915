#pragma once

#include "dcht/dsp/audio.hpp"

namespace dcht {

// A clean/noisy pair at the model sample rate, identified by its filename.
struct ClipPair {
    std::string name;
    std::vector<double> clean;
    std::vector<double> noisy;
};

// One relative filename per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_manifest(const std::string& path);

// Sorted names of the .wav files directly inside dir.
std::vector<std::string> list_wavs(const std::string& dir);

// Loads root/clean/<name> and root/noisy/<name> for every name, resampling
// to sample_rate. Every missing file is listed by name in a single DataError
// before anything else is reported; an empty name list is also a DataError.
std::vector<ClipPair> load_pairs(const std::string& root, const std::vector<std::string>& names,
                                 int sample_rate);

// Pairs selected by the manifest, or by everything in root/clean when
// manifest is the empty string.
std::vector<ClipPair> load_dataset(const std::string& root, const std::string& manifest,
                                   int sample_rate);

}  // namespace dcht
