#include "dcht/train/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace dcht {

namespace fs = std::filesystem;

std::vector<std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        names.push_back(line);
    }
    return names;
}

std::vector<std::string> list_wavs(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw DataError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<ClipPair> load_pairs(const std::string& root, const std::vector<std::string>& names,
                                 int sample_rate) {
    if (names.empty()) throw DataError("empty dataset under " + root);

    std::string missing;
    for (const auto& name : names) {
        for (const char* sub : {"clean", "noisy"}) {
            const fs::path p = fs::path(root) / sub / name;
            std::error_code ec;
            if (!fs::is_regular_file(p, ec)) missing += (missing.empty() ? "" : ", ") + p.string();
        }
    }
    if (!missing.empty()) throw DataError("missing dataset files: " + missing);

    std::vector<ClipPair> pairs;
    pairs.reserve(names.size());
    for (const auto& name : names) {
        ClipPair p;
        p.name = name;
        p.clean = resample(read_wav((fs::path(root) / "clean" / name).string()), sample_rate).samples;
        p.noisy = resample(read_wav((fs::path(root) / "noisy" / name).string()), sample_rate).samples;
        if (p.clean.size() != p.noisy.size())
            throw DataError("clean/noisy length mismatch for " + name);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<ClipPair> load_dataset(const std::string& root, const std::string& manifest,
                                   int sample_rate) {
    std::vector<std::string> names = manifest.empty()
                                         ? list_wavs((fs::path(root) / "clean").string())
                                         : read_manifest(manifest);
    return load_pairs(root, names, sample_rate);
}

}  // namespace dcht
