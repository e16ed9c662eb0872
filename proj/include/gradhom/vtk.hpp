#pragma once

#include <array>
#include <string>
#include <vector>

#include "gradhom/macro.hpp"
#include "gradhom/rve.hpp"

namespace gradhom {

/// Point samples on a lattice of hexahedral cells (points repeated per element).
struct FieldSamples {
  std::vector<Point3> points;                 // reference positions (mm)
  std::vector<std::array<int, 8>> cells;      // VTK hexahedron ordering
  std::vector<Point3> displacement;           // mm
  std::vector<double> von_mises;              // MPa
  std::vector<double> hyperstress_norm;       // N/mm
};

/// Micro fields of a converged RVE, sub cells per element edge.
FieldSamples sample_rve_fields(const RveSolution& sol, int sub);

/// Macro displacement at each lattice point; stresses from the nearest Gauss
/// point of the same element.
FieldSamples sample_macro_fields(const MacroModel& model, const MacroState& state, int sub);

/// Legacy ASCII unstructured grid.  Throws ValidationError when the path is not writable.
void write_vtk(const std::string& path, const FieldSamples& f, const std::string& title);
/// Reads back a file written by write_vtk (points, cells and the three point arrays).
FieldSamples read_vtk(const std::string& path);

}  // namespace gradhom
