#pragma once

#include <iosfwd>
#include <string>

#include "sdbm/model.hpp"

namespace sdbm {

// Self-describing model document:
//   {format_version: 1, layer_sizes, mask: [[k,l],...],
//    weights: {"k,l": row-major list}, biases: [...], offsets: [...]}
// Reals are written either as full-precision decimal numbers or as hex
// strings of the IEEE-754 bit pattern ("0x3ff0..."); the reader accepts
// both. The binary form round-trips bit-exactly.
enum class RealEncoding { binary, decimal };

void save_model(const Model& model, const std::string& path,
                RealEncoding encoding = RealEncoding::binary);
void save_model(const Model& model, std::ostream& out,
                RealEncoding encoding = RealEncoding::binary);
Model load_model(const std::string& path);
Model load_model(std::istream& in);

}  // namespace sdbm
