#pragma once

#include <string>
#include <string_view>

#include "craspkit/transformer.hpp"

namespace craspkit {

// JSON model format.  All parameters are integer significands at the model's
// precision.  The returned transformer is already finalized.
Transformer model_from_json(std::string_view text);
std::string model_to_json(const Transformer& t, int indent = 2);

Transformer load_model(const std::string& path);
void save_model(const Transformer& t, const std::string& path);

}  // namespace craspkit
