#pragma once

#include "loadfc/config.hpp"
#include "loadfc/gam.hpp"
#include "loadfc/pipeline.hpp"

#include <string>

namespace loadfc {

/// Persisted fit artifacts: the trend model, the class-pair registry and the
/// fit parameters, with training-window metadata for the no-look-ahead
/// audit.
struct ModelStore {
    std::string preset = "trend2";
    RegressorSpec spec;
    DimSelectConfig dim;
    int K = 10;
    int n_min = 15;
    Date train_begin;
    Date train_end;
    GamModel gam;
    ModelRegistry registry;
};

/// Single text file, versioned, with an embedded FNV-1a checksum of the
/// payload. Doubles are written as C hexfloats so a load/save round trip is
/// bit exact. Corrupted or version-mismatched files raise StoreError before
/// anything is returned.
void save_store(const std::string& path, const ModelStore& store);
ModelStore load_store(const std::string& path);

std::string serialize_store(const ModelStore& store);
ModelStore deserialize_store(const std::string& text, const std::string& origin);

} // namespace loadfc
