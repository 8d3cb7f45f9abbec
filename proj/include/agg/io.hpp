#pragma once

// File formats: masks as coordinate CSV or binary PGM, fields as CSV, rotor
// renderings as PGM, and SHA-256 digests for run manifests.

#include <filesystem>
#include <string>

#include "agg/lattice.hpp"
#include "agg/rotor.hpp"

namespace agg {

/// "# lattice dim=2 spacing=0.01 lo=-5,-5 extent=11,11" followed by one "i,j" line per set site.
void write_mask_csv(const DomainMask& mask, const std::filesystem::path& path);
/// Reads write_mask_csv output. Without a lattice comment, a unit-spacing box
/// one site larger than the coordinates is used.
DomainMask read_mask_csv(const std::filesystem::path& path);

/// P5 image, 0 empty and 255 occupied; first row is the largest second coordinate.
void write_mask_pgm(const DomainMask& mask, const std::filesystem::path& path);
/// Rotor directions as 2d gray levels.
void write_rotor_pgm(const RotorField& rotors, const std::filesystem::path& path);

/// "i,j,...,value" rows for every site.
void write_field_csv(const ScalarField& field, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace agg
