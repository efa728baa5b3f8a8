#pragma once

#include <iosfwd>
#include <string>

#include "nlfa/model.hpp"

namespace nlfa {

/// Versioned text format (`dnlfa-model v1`): hyperparameters, matrices in
/// row-major shortest-round-trip decimals, masks as 0/1 rows, id maps.
/// save/load round-trips bit-exactly. load throws data_error with distinct
/// messages for version mismatch, dimension mismatch and corrupt blocks.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);

void save_model_file(const Model& model, const std::string& path);
Model load_model_file(const std::string& path);

}  // namespace nlfa
