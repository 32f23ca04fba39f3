#include "higgsflow/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace higgsflow {

namespace {

constexpr const char* kSnapshotMagic = "HIGGSFLOW-SNAPSHOT 1";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_f64_le(std::ofstream& out, std::span<const double> values) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * 8));
    } else {
        for (const double v : values) {
            auto bits = std::bit_cast<std::array<unsigned char, 8>>(v);
            std::reverse(bits.begin(), bits.end());
            out.write(reinterpret_cast<const char*>(bits.data()), 8);
        }
    }
}

void read_f64_le(std::ifstream& in, std::span<double> values, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * 8));
    } else {
        for (double& v : values) {
            std::array<unsigned char, 8> bits;
            in.read(reinterpret_cast<char*>(bits.data()), 8);
            std::reverse(bits.begin(), bits.end());
            v = std::bit_cast<double>(bits);
        }
    }
    if (!in) throw std::runtime_error(std::string("read_snapshot: truncated ") + what);
    for (const double v : values)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("read_snapshot: non-finite ") + what);
}

}  // namespace

void write_snapshot(const std::string& path, const TorusLattice& lat, const FieldState& st) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out << kSnapshotMagic << "\n";
    out << lat.n << ' ' << lat.N[0] << ' ' << lat.N[1] << ' ' << lat.N[2] << ' ' << lat.bg.q
        << ' ' << lat.bg.cut1 << "\n";
    out << format_double(lat.L[0]) << ' ' << format_double(lat.L[1]) << ' '
        << format_double(lat.L[2]) << ' ' << format_double(st.eps) << ' '
        << format_double(st.time) << "\n";
    out << "DATA\n";

    std::vector<double> buf(2 * static_cast<std::size_t>(lat.num_sites));
    for (int x = 0; x < lat.num_sites; ++x) {
        buf[2 * static_cast<std::size_t>(x)] = st.u[static_cast<std::size_t>(x)].real();
        buf[2 * static_cast<std::size_t>(x) + 1] = st.u[static_cast<std::size_t>(x)].imag();
    }
    write_f64_le(out, buf);
    for (int j = 0; j < lat.n; ++j) write_f64_le(out, st.a[static_cast<std::size_t>(j)]);
    if (!out) throw std::runtime_error("write_snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kSnapshotMagic)
        throw std::runtime_error("read_snapshot: bad magic in " + path);

    int n = 0, q = 0, cut1 = 0;
    std::array<int, 3> N{};
    if (!std::getline(in, line)) throw std::runtime_error("read_snapshot: missing shape line");
    {
        std::istringstream ss(line);
        if (!(ss >> n >> N[0] >> N[1] >> N[2] >> q >> cut1))
            throw std::runtime_error("read_snapshot: malformed shape line");
    }
    std::array<double, 3> L{};
    double eps = 0.0, time = 0.0;
    if (!std::getline(in, line)) throw std::runtime_error("read_snapshot: missing extent line");
    {
        std::istringstream ss(line);
        if (!(ss >> L[0] >> L[1] >> L[2] >> eps >> time))
            throw std::runtime_error("read_snapshot: malformed extent line");
    }
    if (!std::getline(in, line) || line != "DATA")
        throw std::runtime_error("read_snapshot: missing DATA marker");

    Snapshot snap{build_lattice(n, N, L, q, cut1), FieldState{}};
    const auto& lat = snap.lattice;
    snap.state.eps = eps;
    snap.state.time = time;
    snap.state.u.assign(static_cast<std::size_t>(lat.num_sites), Complex{0.0, 0.0});
    snap.state.a = lat.make_link_field();

    std::vector<double> buf(2 * static_cast<std::size_t>(lat.num_sites));
    read_f64_le(in, buf, "order parameter");
    for (int x = 0; x < lat.num_sites; ++x)
        snap.state.u[static_cast<std::size_t>(x)] =
            Complex{buf[2 * static_cast<std::size_t>(x)], buf[2 * static_cast<std::size_t>(x) + 1]};
    for (int j = 0; j < lat.n; ++j)
        read_f64_le(in, snap.state.a[static_cast<std::size_t>(j)], "connection");
    return snap;
}

void write_pgm_slice(const std::string& path, const TorusLattice& lat,
                     std::span<const double> field, int level) {
    if (static_cast<int>(field.size()) != lat.num_sites)
        throw std::invalid_argument("write_pgm_slice: field size mismatch");
    if (lat.n == 3 && (level < 0 || level >= lat.N[2]))
        throw std::invalid_argument("write_pgm_slice: level out of range");
    double peak = 0.0;
    for (const double v : field) peak = std::max(peak, std::abs(v));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_pgm_slice: cannot open " + path);
    out << "P5\n" << lat.N[0] << ' ' << lat.N[1] << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(lat.N[0]));
    for (int i1 = 0; i1 < lat.N[1]; ++i1) {
        for (int i0 = 0; i0 < lat.N[0]; ++i0) {
            const int x = lat.index(i0, i1, lat.n == 3 ? level : 0);
            const double v = peak > 0.0 ? std::abs(field[static_cast<std::size_t>(x)]) / peak : 0.0;
            row[static_cast<std::size_t>(i0)] =
                static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write_pgm_slice: write failed for " + path);
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::size_t columns = 0;
    std::string path;
};

CsvWriter::CsvWriter(const std::string& path, std::span<const std::string> columns)
    : impl_(new Impl) {
    impl_->out.open(path, std::ios::trunc);
    impl_->path = path;
    impl_->columns = columns.size();
    if (!impl_->out) {
        delete impl_;
        throw std::runtime_error("CsvWriter: cannot open " + path);
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << columns[i];
    }
    impl_->out << '\n';
}

CsvWriter::~CsvWriter() {
    close();
    delete impl_;
}

void CsvWriter::write_row(std::span<const double> values) {
    if (values.size() != impl_->columns)
        throw std::invalid_argument("CsvWriter: row width mismatch in " + impl_->path);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << format_double(values[i]);
    }
    impl_->out << '\n';
}

void CsvWriter::close() {
    if (impl_->out.is_open()) impl_->out.close();
}

void append_sparse_plaquettes(CsvWriter& csv, const TorusLattice& lat, double t,
                              const PlaqField& J, double threshold_frac) {
    double peak = 0.0;
    for (int p = 0; p < lat.plane_count(); ++p)
        for (const double v : J[static_cast<std::size_t>(p)]) peak = std::max(peak, std::abs(v));
    const double cut = threshold_frac * peak;
    for (int p = 0; p < lat.plane_count(); ++p) {
        const auto& Jp = J[static_cast<std::size_t>(p)];
        for (int x = 0; x < lat.num_sites; ++x) {
            const double v = Jp[static_cast<std::size_t>(x)];
            if (std::abs(v) < cut || v == 0.0) continue;
            const auto c = lat.coords(x);
            const double row[6] = {t,
                                   static_cast<double>(p),
                                   static_cast<double>(c[0]),
                                   static_cast<double>(c[1]),
                                   static_cast<double>(c[2]),
                                   v};
            csv.write_row(row);
        }
    }
}

void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& entries) {
    const std::filesystem::path final_path(path);
    const std::filesystem::path tmp_path = final_path.string() + ".tmp";
    {
        std::ofstream out(tmp_path, std::ios::trunc);
        if (!out) throw std::runtime_error("write_manifest: cannot open " + tmp_path.string());
        for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
        out.flush();
        if (!out) throw std::runtime_error("write_manifest: write failed for " + tmp_path.string());
    }
    std::filesystem::rename(tmp_path, final_path);
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sep = line.find(" = ");
        if (sep == std::string::npos)
            throw std::runtime_error("read_manifest: malformed line in " + path + ": " + line);
        entries[line.substr(0, sep)] = line.substr(sep + 3);
    }
    return entries;
}

}  // namespace higgsflow
