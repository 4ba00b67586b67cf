#pragma once

#include <string>

#include "fegut/scene.hpp"

namespace fegut::scene {

/// JSON-lines dataset file. First line is a metadata header (config hash,
/// seed, true time offset, anchor set, noise, rates, origin); every following
/// line is one epoch record. Floats are written with 17 significant digits so
/// a round trip is lossless.
void write_dataset(const std::string& path, const Dataset& ds);

/// Throws ParseError with a line number on malformed input.
Dataset read_dataset(const std::string& path);

}  // namespace fegut::scene
