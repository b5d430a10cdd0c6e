#pragma once

#include <string>

#include "mixsei/model.hpp"

namespace mixsei::model {

struct Checkpoint {
  Model model;
  std::string meta_json;  // free-form JSON object (training summary etc.)
};

// Binary checkpoint: magic "SMNW", format version, JSON descriptor
// (architecture, parameter layout, library version, metadata), float32
// parameter blob in canonical layout order, CRC-32 over descriptor + blob.
// Parameters are stored in float32; save rounds, load widens back to
// double, so save/load round-trips a trained model bit-exactly (training
// already rounds its result the same way).
void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& meta_json = "{}");

Checkpoint load_checkpoint(const std::string& path);

}  // namespace mixsei::model
