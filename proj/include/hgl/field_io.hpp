#pragma once

#include <string>

#include "hgl/cell.hpp"

namespace hgl {

// Binary field snapshot: magic "HGPF1\n", a block of key = value header
// lines (direction, base vectors, cell and grid parameters) terminated by a
// blank line, then the node values row-major (transverse indices slowest,
// vertical fastest) as IEEE-754 binary64, little-endian. Round-trips are
// bit-exact.
void dump_field(const Field& field, const std::string& path);

Field load_field(const std::string& path);

// Loads onto an existing grid; rejects any header/grid mismatch.
Field load_field(const std::string& path, std::shared_ptr<const Grid> grid);

}  // namespace hgl
