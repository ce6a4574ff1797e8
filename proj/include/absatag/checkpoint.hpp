#ifndef ABSATAG_CHECKPOINT_HPP
#define ABSATAG_CHECKPOINT_HPP

#include <string>

#include "absatag/model.hpp"

namespace absatag {

// Flat binary archive: magic + versioned JSON header (config, vocabulary,
// feature table) followed by named tensors as little-endian 64-bit floats.
// A loaded checkpoint is self-contained: predict needs nothing else.
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

// Stable content hash of a checkpoint file (provenance sidecars).
std::string checkpoint_digest(const std::string& path);

}  // namespace absatag

#endif
