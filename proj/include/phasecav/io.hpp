#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phasecav/forward.hpp"
#include "phasecav/optimizer.hpp"

namespace phasecav {

/// Text dump of a nodal or cell field: header lines `kind node|cell`, `nx`,
/// `ny`, `h`, then one grid row per line from y = 0 upwards.
struct FieldDump {
  std::string kind;
  int nx = 0, ny = 0;
  double h = 0.0;
  std::vector<double> values;
};

void write_field(const std::string& path, const Grid& grid, const NodalField& values);
void write_cells(const std::string& path, const Grid& grid, const std::vector<double>& values);
void write_mask(const std::string& path, const Grid& grid, const CellMask& mask);
FieldDump read_field(const std::string& path);
CellMask mask_from_dump(const FieldDump& dump);

/// 8-bit greyscale image of a row-major field (y up), values mapped from
/// [lo,hi] to [0,255].
void write_pgm(const std::string& path, int width, int height, const std::vector<double>& values, double lo,
               double hi);

/// One row per boundary loop position: k, side, arc coordinate, f of edge k,
/// g at node k. Header comments carry eps, rho, seed and the grid size.
void write_data_csv(const std::string& path, const Grid& grid, const CauchyData& data);
void write_trace_csv(const std::string& path, const RunTrace& trace);
void write_key_values(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv);
void write_text(const std::string& path, const std::string& text);

}  // namespace phasecav
