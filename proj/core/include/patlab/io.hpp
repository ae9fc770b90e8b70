#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "patlab/field.hpp"
#include "patlab/trace.hpp"

namespace patlab::io {

/// Shortest-free fixed formatting: 17 significant digits, '.' decimal point,
/// independent of the global locale.
std::string format_number(double v);

/// Binary field file: "PATF", u32 nx, u32 ny, f64 hx, f64 hy, f64 origin_x,
/// f64 origin_y, then nx*ny f64 values in row-major order. Little-endian.
void write_field(const std::filesystem::path& path, const ScalarField2D& f);
void write_field(std::ostream& out, const ScalarField2D& f);
ScalarField2D read_field(const std::filesystem::path& path);
ScalarField2D read_field(std::istream& in);

/// Binary trace file: "PATT", u32 n_boundary_nodes, u32 n_samples,
/// f64 dt_record, then time-major f64 samples. Little-endian.
/// The file does not carry the grid; readers supply it and the boundary
/// node count is checked against it.
void write_trace(const std::filesystem::path& path, const BoundaryTrace& m);
void write_trace(std::ostream& out, const BoundaryTrace& m);
BoundaryTrace read_trace(const std::filesystem::path& path, const Grid2D& grid);
BoundaryTrace read_trace(std::istream& in, const Grid2D& grid);

/// "x,y,value" rows.
void write_field_csv(std::ostream& out, const ScalarField2D& f);
/// "t,node_index,arc_length,value" rows.
void write_trace_csv(std::ostream& out, const BoundaryTrace& m);

}  // namespace patlab::io
