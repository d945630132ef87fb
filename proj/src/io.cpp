#include "vpy/io.hpp"

#include "vpy/dynamics.hpp"
#include "vpy/transport.hpp"

#include <bit>
#include <cstring>
#include <sstream>

namespace vpy {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw InvalidInput("binary read: truncated stream");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return v;
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
void put_i64(std::ostream& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}
std::int64_t get_i64(std::istream& in) { return static_cast<std::int64_t>(get_u64(in)); }

}  // namespace

void write_ensemble_binary(const std::string& path, const ParticleEnsemble& ens) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    put_i64(out, ens.dim);
    put_i64(out, static_cast<std::int64_t>(ens.size()));
    put_u64(out, ens.rng_seed);
    for (const auto& p : ens.x)
        for (int k = 0; k < ens.dim; ++k) put_f64(out, p[k]);
    for (const auto& q : ens.v)
        for (int k = 0; k < ens.dim; ++k) put_f64(out, q[k]);
    for (double w : ens.w) put_f64(out, w);
}

ParticleEnsemble read_ensemble_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    ParticleEnsemble ens;
    ens.dim = static_cast<int>(get_i64(in));
    const std::int64_t n = get_i64(in);
    if (ens.dim < 2 || ens.dim > 3 || n < 0) throw InvalidInput("ensemble binary: bad header");
    ens.rng_seed = get_u64(in);
    ens.x.resize(static_cast<std::size_t>(n));
    ens.v.resize(static_cast<std::size_t>(n));
    ens.w.resize(static_cast<std::size_t>(n));
    for (auto& p : ens.x)
        for (int k = 0; k < ens.dim; ++k) p[k] = get_f64(in);
    for (auto& q : ens.v)
        for (int k = 0; k < ens.dim; ++k) q[k] = get_f64(in);
    for (auto& w : ens.w) w = get_f64(in);
    return ens;
}

void write_grid_binary(const std::string& path, const GridDensity& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    put_i64(out, grid.dim);
    put_i64(out, grid.cells_per_axis);
    put_f64(out, grid.box_half);
    for (double v : grid.values) put_f64(out, v);
}

GridDensity read_grid_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    GridDensity g;
    g.dim = static_cast<int>(get_i64(in));
    g.cells_per_axis = static_cast<int>(get_i64(in));
    g.box_half = get_f64(in);
    g.values.resize(g.cell_count());
    for (auto& v : g.values) v = get_f64(in);
    g.validate();
    return g;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dim) {
    os.precision(17);
    os << "t";
    for (int k = 1; k <= dim; ++k) os << ",x" << k;
    for (int k = 1; k <= dim; ++k) os << ",v" << k;
    os << "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << traj.times[i];
        for (int k = 0; k < dim; ++k) os << ',' << traj.positions[i][k];
        for (int k = 0; k < dim; ++k) os << ',' << traj.velocities[i][k];
        os << "\n";
    }
}

void write_coupling_csv(std::ostream& os, const Coupling& plan) {
    os.precision(17);
    os << "i,j,mass\n";
    for (const auto& e : plan.entries) os << e.i << ',' << e.j << ',' << e.mass << "\n";
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path) {
    if (!out_) throw InvalidInput("cannot open " + path + " for writing");
}

void JsonlWriter::write(const Json& record) { out_ << record.dump() << "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace vpy
