#include "dcht/train/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace dcht {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'C', 'H', 'T', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw DataError("truncated checkpoint");
    }
    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string get_bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

std::string serialize(const DchtConfig& cfg, const ParamMap& params) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<uint32_t>(out, kVersion);
    const std::string cfg_json = to_json_text(cfg);
    put<uint32_t>(out, static_cast<uint32_t>(cfg_json.size()));
    out += cfg_json;
    put<uint64_t>(out, params.size());
    for (const auto& [name, t] : params) {
        put<uint32_t>(out, static_cast<uint32_t>(name.size()));
        out += name;
        put<uint32_t>(out, static_cast<uint32_t>(t.dim()));
        for (int64_t e : t.shape()) put<int64_t>(out, e);
        const size_t bytes = static_cast<size_t>(t.size()) * sizeof(double);
        const size_t at = out.size();
        out.resize(at + bytes);
        std::memcpy(out.data() + at, t.data(), bytes);
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const DchtConfig& cfg, const ParamMap& params) {
    const std::string bytes = serialize(cfg, params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{buf};

    if (r.get_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
        throw DataError("not a checkpoint file: " + path);
    const uint32_t version = r.get<uint32_t>();
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version) +
                        " (expected " + std::to_string(kVersion) + ")");

    Checkpoint ck;
    const uint32_t cfg_len = r.get<uint32_t>();
    ck.config = dcht_config_from_json_text(r.get_bytes(cfg_len));

    const uint64_t count = r.get<uint64_t>();
    ck.params.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        const uint32_t name_len = r.get<uint32_t>();
        std::string name = r.get_bytes(name_len);
        const uint32_t rank = r.get<uint32_t>();
        Shape shape(rank);
        for (uint32_t d = 0; d < rank; ++d) {
            shape[d] = r.get<int64_t>();
            if (shape[d] < 1) throw DataError("corrupt extent in checkpoint parameter " + name);
        }
        const int64_t n = numel(shape);
        std::vector<double> v(static_cast<size_t>(n));
        r.need(v.size() * sizeof(double));
        std::memcpy(v.data(), buf.data() + r.pos, v.size() * sizeof(double));
        r.pos += v.size() * sizeof(double);
        add_param(ck.params, name, Tensor::from_vector(shape, std::move(v)));
    }
    if (r.pos != buf.size()) throw DataError("trailing bytes in checkpoint " + path);
    return ck;
}

DchtModel model_from_checkpoint(const Checkpoint& ck) {
    Rng scratch(0);  // every value is overwritten below
    DchtModel model(ck.config, scratch);
    ParamMap live = model.parameters();
    std::unordered_map<std::string, Tensor> by_name;
    for (auto& [name, t] : live) by_name.emplace(name, t);

    for (const auto& [name, stored] : ck.params) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw DataError("checkpoint parameter " + name + " is not in the model");
        Tensor dst = it->second;
        if (dst.shape() != stored.shape())
            throw DataError("checkpoint parameter " + name + " has shape " +
                            shape_str(stored.shape()) + ", model expects " +
                            shape_str(dst.shape()));
        std::memcpy(dst.data(), stored.data(), static_cast<size_t>(dst.size()) * sizeof(double));
        by_name.erase(it);
    }
    if (!by_name.empty()) {
        std::vector<std::string> names;
        for (const auto& [name, t] : by_name) names.push_back(name);
        std::sort(names.begin(), names.end());
        std::string missing;
        for (const auto& name : names) missing += (missing.empty() ? "" : ", ") + name;
        throw DataError("checkpoint is missing parameters: " + missing);
    }
    return model;
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out, 16);
}

std::string checkpoint_digest(const DchtConfig& cfg, const ParamMap& params) {
    return fnv1a_hex(serialize(cfg, params));
}

}  // namespace dcht
