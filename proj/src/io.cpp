#include "phasecav/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phasecav/config.hpp"

namespace phasecav {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("io", "cannot write " + path);
  return out;
}

void write_grid_values(const std::string& path, const char* kind, int nx, int ny, double h, int cols, int rows,
                       const std::vector<double>& values) {
  auto out = open_out(path);
  out << "kind " << kind << "\nnx " << nx << "\nny " << ny << "\nh " << format_double(h) << '\n';
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) out << (i ? " " : "") << format_double(values[j * cols + i]);
    out << '\n';
  }
}

}  // namespace

void write_field(const std::string& path, const Grid& grid, const NodalField& values) {
  write_grid_values(path, "node", grid.nx(), grid.ny(), grid.h(), grid.nx() + 1, grid.ny() + 1, values);
}

void write_cells(const std::string& path, const Grid& grid, const std::vector<double>& values) {
  write_grid_values(path, "cell", grid.nx(), grid.ny(), grid.h(), grid.nx(), grid.ny(), values);
}

void write_mask(const std::string& path, const Grid& grid, const CellMask& mask) {
  write_cells(path, grid, std::vector<double>(mask.begin(), mask.end()));
}

FieldDump read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  FieldDump d;
  std::string key;
  in >> key >> d.kind;
  if (key != "kind" || (d.kind != "node" && d.kind != "cell")) throw Error("io", path + ": bad header");
  in >> key >> d.nx;
  if (key != "nx") throw Error("io", path + ": bad header");
  in >> key >> d.ny;
  if (key != "ny") throw Error("io", path + ": bad header");
  in >> key >> d.h;
  if (key != "h" || !in) throw Error("io", path + ": bad header");
  const std::size_t n = d.kind == "node" ? static_cast<std::size_t>(d.nx + 1) * (d.ny + 1)
                                         : static_cast<std::size_t>(d.nx) * d.ny;
  d.values.resize(n);
  for (auto& x : d.values)
    if (!(in >> x)) throw Error("io", path + ": truncated field");
  return d;
}

CellMask mask_from_dump(const FieldDump& dump) {
  if (dump.kind != "cell") throw Error("io", "mask dump must hold cell values");
  CellMask m(dump.values.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = dump.values[k] > 0.5;
  return m;
}

void write_pgm(const std::string& path, int width, int height, const std::vector<double>& values, double lo,
               double hi) {
  auto out = open_out(path, true);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::vector<unsigned char> row(width);
  for (int j = height - 1; j >= 0; --j) {
    for (int i = 0; i < width; ++i) {
      const double t = hi > lo ? (values[j * width + i] - lo) / (hi - lo) : 0.0;
      row[i] = static_cast<unsigned char>(std::lround(255 * std::clamp(t, 0.0, 1.0)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), width);
  }
}

void write_data_csv(const std::string& path, const Grid& grid, const CauchyData& data) {
  auto out = open_out(path);
  out << "# epsilon=" << format_double(data.epsilon) << " rho=" << format_double(data.rho) << " seed=" << data.seed
      << " nx=" << grid.nx() << " ny=" << grid.ny() << " h=" << format_double(grid.h()) << '\n';
  out << "k,side,s,f,g\n";
  const auto& edges = grid.boundary();
  for (std::size_t k = 0; k < edges.size(); ++k)
    out << k << ',' << to_string(edges[k].side) << ',' << format_double(k * grid.h()) << ','
        << format_double(data.f.f[k]) << ',' << format_double(data.g[k]) << '\n';
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  auto out = open_out(path);
  out << "iteration,phase,misfit,discrepancy,gradient,well,dirichlet,total,step,grad_norm,projected,backtracks,"
         "solver_iterations\n";
  for (const auto& r : trace.rows)
    out << r.iteration << ',' << r.phase << ',' << format_double(r.terms.misfit) << ','
        << format_double(r.terms.discrepancy) << ',' << format_double(r.terms.gradient) << ','
        << format_double(r.terms.well) << ',' << format_double(r.terms.dirichlet) << ','
        << format_double(r.terms.total) << ',' << format_double(r.step) << ',' << format_double(r.grad_norm) << ','
        << r.projected << ',' << r.backtracks << ',' << r.solver_iterations << '\n';
}

void write_key_values(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << ": " << v << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace phasecav
