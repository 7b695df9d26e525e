#include "ulf/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace ulf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'U', 'L', 'F', '1'};

struct Header {
    char magic[4];
    std::uint32_t n;
    double L;
    double time;
    std::uint32_t ncomp;
    std::uint32_t reserved;
};
static_assert(sizeof(Header) == 32);

void write_impl(const fs::path& path, const Grid& g, double time,
                const std::vector<const RealVec*>& comps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("io: cannot open " + path.string() + " for writing");
    Header h{};
    std::memcpy(h.magic, kMagic, 4);
    h.n = static_cast<std::uint32_t>(g.n());
    h.L = g.half_length();
    h.time = time;
    h.ncomp = static_cast<std::uint32_t>(comps.size());
    h.reserved = 0;
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    for (const RealVec* c : comps)
        out.write(reinterpret_cast<const char*>(c->data()),
                  static_cast<std::streamsize>(c->size() * sizeof(double)));
    if (!out) throw ValidationError("io: short write to " + path.string());
}

}  // namespace

void write_field(const fs::path& path, const ScalarField& f) {
    write_impl(path, f.grid(), f.time(), {&f.data()});
}

void write_field(const fs::path& path, const VectorField& f) {
    write_impl(path, f.grid(), f.time(), {&f.comp(0), &f.comp(1), &f.comp(2)});
}

FieldFile read_field(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("io: cannot open " + path.string());
    Header h{};
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!in || std::memcmp(h.magic, kMagic, 4) != 0)
        throw ValidationError("io: bad magic in " + path.string());
    FieldFile ff;
    ff.ncomp = static_cast<int>(h.ncomp);
    ff.time = h.time;
    ff.grid = Grid::make_unchecked(static_cast<int>(h.n), h.L);
    const std::size_t nn = static_cast<std::size_t>(ff.grid.num_nodes());
    for (int c = 0; c < ff.ncomp; ++c) {
        RealVec data(nn);
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(nn * sizeof(double)));
        if (!in) throw ValidationError("io: truncated field file " + path.string());
        ff.comps.push_back(std::move(data));
    }
    return ff;
}

ScalarField read_scalar_field(const fs::path& path) {
    FieldFile ff = read_field(path);
    if (ff.ncomp != 1) throw ValidationError("io: expected 1 component in " + path.string());
    ScalarField f(ff.grid, ff.time);
    f.data() = std::move(ff.comps[0]);
    return f;
}

VectorField read_vector_field(const fs::path& path) {
    FieldFile ff = read_field(path);
    if (ff.ncomp != 3) throw ValidationError("io: expected 3 components in " + path.string());
    VectorField f(ff.grid, ff.time);
    for (int c = 0; c < 3; ++c) f.comp(c) = std::move(ff.comps[static_cast<std::size_t>(c)]);
    return f;
}

void write_trajectory(const fs::path& dir, const Trajectory& traj,
                      const std::vector<ScalarField>* pressures) {
    fs::create_directories(dir);
    json index;
    index["times"] = traj.times();
    std::vector<std::string> files, pfiles;
    for (std::size_t m = 0; m < traj.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof(name), "snapshot_%04zu.ulf", m);
        write_field(dir / name, traj.snapshot(m));
        files.emplace_back(name);
        if (pressures) {
            std::snprintf(name, sizeof(name), "pressure_%04zu.ulf", m);
            write_field(dir / name, (*pressures)[m]);
            pfiles.emplace_back(name);
        }
    }
    index["files"] = files;
    if (!pfiles.empty()) index["pressure_files"] = pfiles;
    std::ofstream out(dir / "index.json");
    out << index.dump(2) << "\n";
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
    std::ifstream in(dir / "index.json");
    if (!in) throw ValidationError("io: missing index.json in " + dir.string());
    json index;
    in >> index;
    if (!index.contains("times") || !index.contains("files"))
        throw ValidationError("io: malformed index.json in " + dir.string());
    const auto times = index["times"].get<std::vector<double>>();
    const auto files = index["files"].get<std::vector<std::string>>();
    if (times.size() != files.size())
        throw ValidationError("io: index.json times/files length mismatch");
    LoadedTrajectory lt;
    for (std::size_t m = 0; m < files.size(); ++m) {
        const fs::path p = dir / files[m];
        if (!fs::exists(p)) throw ValidationError("io: missing snapshot file " + p.string());
        lt.traj.push_back(times[m], read_vector_field(p));
    }
    if (index.contains("pressure_files")) {
        const auto pfiles = index["pressure_files"].get<std::vector<std::string>>();
        if (pfiles.size() != times.size())
            throw ValidationError("io: index.json pressure_files length mismatch");
        for (const auto& f : pfiles) {
            const fs::path p = dir / f;
            if (!fs::exists(p)) throw ValidationError("io: missing pressure file " + p.string());
            lt.pressures.push_back(read_scalar_field(p));
        }
    }
    return lt;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : impl_(std::make_unique<Impl>()) {
    impl_->out.open(path);
    if (!impl_->out) throw ValidationError("io: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        impl_->out << header[i] << (i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() = default;

std::string CsvWriter::fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
        impl_->out << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::row_values(const std::vector<double>& values,
                           const std::vector<std::string>& prefix) {
    std::vector<std::string> cells = prefix;
    for (double v : values) cells.push_back(fmt(v));
    row(cells);
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("io: cannot hash " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const auto n = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

}  // namespace ulf
