#pragma once

// Text and image serialization.
//
// Field CSV:  header "x,y,value,valid", then one row per node in row-major
//             order (y slowest), numbers with 17 significant digits, valid
//             as 0/1.
// PGM:        binary "P5", width nx, height ny, maxval 255. The first image
//             row is y = ymax. Valid values map linearly from [min, max] to
//             [0, 255]; a constant field maps to 128; invalid nodes are 0.
// Mask CSV:   header "kind,x,y,jump"; kind is stable_candidate for dM/dx0
//             crossings and unstable_candidate for dM/dy0 crossings.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lagdesc/analyze.hpp"

namespace lagdesc {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string write_csv(const ScalarField& field);

/// Rebuilds the grid from the node coordinates. Throws FormatError naming the
/// offending line on a bad header, malformed row, inconsistent node counts or
/// spacing that deviates from uniform by more than 1e-9 of the span.
ScalarField read_csv(std::string_view text);

/// Throws FormatError when no node is valid.
std::string write_pgm(const ScalarField& field);

std::string write_mask_csv(const ManifoldMask& mask);

/// Throws IoError when the file cannot be written or read.
void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace lagdesc
