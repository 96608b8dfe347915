#pragma once

#include "dcht/train/config.hpp"

namespace dcht {

// Single-file snapshot: magic, format version, the model config as JSON, and
// the named parameter arrays in their canonical collect order (shapes
// explicit, values as little-endian 64-bit floats). Loading and re-saving a
// checkpoint reproduces the file byte for byte.
struct Checkpoint {
    DchtConfig config;
    ParamMap params;
};

void save_checkpoint(const std::string& path, const DchtConfig& cfg, const ParamMap& params);
Checkpoint load_checkpoint(const std::string& path);  // DataError on anything malformed

// Rebuilds a model and copies every stored array onto the parameter with the
// same name; missing or extra names and shape mismatches are DataError.
DchtModel model_from_checkpoint(const Checkpoint& ck);

// FNV-1a of arbitrary bytes as 16 hex digits; stable content id for reports.
std::string fnv1a_hex(const std::string& bytes);
// fnv1a_hex over the serialized checkpoint bytes.
std::string checkpoint_digest(const DchtConfig& cfg, const ParamMap& params);

}  // namespace dcht
