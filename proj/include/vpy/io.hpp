#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "vpy/ensemble.hpp"
#include "vpy/yudovich.hpp"

namespace vpy {

using Json = nlohmann::json;

// Binary dumps are little-endian regardless of the host.
// Ensemble: int64 dim, int64 N, uint64 seed, then x (N*dim doubles),
// v (N*dim doubles), w (N doubles).
void write_ensemble_binary(const std::string& path, const ParticleEnsemble& ens);
ParticleEnsemble read_ensemble_binary(const std::string& path);

// Grid: int64 dim, int64 cells_per_axis, double box half-width, then
// row-major cell values.
void write_grid_binary(const std::string& path, const GridDensity& grid);
GridDensity read_grid_binary(const std::string& path);

// CSV dumps fixed by the external interfaces: trajectories as
// t,x1..xd,v1..vd and couplings as i,j,mass.
void write_trajectory_csv(std::ostream& os, const struct Trajectory& traj, int dim);
void write_coupling_csv(std::ostream& os, const struct Coupling& plan);

// One JSON object per line.
class JsonlWriter {
  public:
    explicit JsonlWriter(const std::string& path);
    void write(const Json& record);

  private:
    std::ofstream out_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace vpy
