#pragma once

#include <string>

#include "vmf/network.hpp"
#include "vmf/objective.hpp"

namespace vmf {

// Binary checkpoint, version 1. Fixed little-endian layout (documented in
// docs/formats.md): magic "VMFCKPT\0", version, network shape and seeds,
// weight/bias tensors, prototypes, kappa. Loading validates magic, version,
// and every declared shape against the bytes actually present.
void save_checkpoint(const std::string& path, const Network& net,
                     const PrototypeSet& protos);

struct LoadedCheckpoint {
  Network net;
  PrototypeSet protos;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace vmf
