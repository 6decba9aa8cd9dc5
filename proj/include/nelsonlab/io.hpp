#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nelsonlab/field.hpp"

namespace nelsonlab {

// Field dump, little-endian binary:
//   magic "NLF1"
//   u32 dims
//   u32 points per axis (dims entries)
//   f64 min,max per axis (2*dims entries)
//   u8 periodic flag per axis (dims entries)
//   u32 complex flag (0 real / 1 complex)
//   row-major f64 samples, re/im pairs when complex
namespace detail {

template <class T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw config_error("truncated binary stream");
    return v;
}

inline void write_field_header(std::ostream& os, const Grid& g, std::uint32_t complex_flag) {
    os.write("NLF1", 4);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims()));
    for (int a = 0; a < g.dims(); ++a)
        write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(g.points(a)));
    for (int a = 0; a < g.dims(); ++a) {
        write_raw<double>(os, g.axis(a).min);
        write_raw<double>(os, g.axis(a).max);
    }
    for (int a = 0; a < g.dims(); ++a)
        write_raw<std::uint8_t>(os, g.periodic(a) ? 1 : 0);
    write_raw<std::uint32_t>(os, complex_flag);
}

inline Grid read_field_header(std::istream& is, std::uint32_t& complex_flag) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "NLF1") throw config_error("not an NLF1 field dump");
    const auto dims = read_raw<std::uint32_t>(is);
    if (dims < 1 || dims > 3) throw config_error("NLF1 dims out of range");
    std::vector<AxisSpec> axes(dims);
    for (auto& ax : axes) ax.points = static_cast<int>(read_raw<std::uint32_t>(is));
    for (auto& ax : axes) {
        ax.min = read_raw<double>(is);
        ax.max = read_raw<double>(is);
    }
    for (auto& ax : axes) ax.periodic = read_raw<std::uint8_t>(is) != 0;
    complex_flag = read_raw<std::uint32_t>(is);
    return Grid(axes);
}

} // namespace detail

inline void write_field(const std::filesystem::path& path, const RealField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path.string() + " for writing");
    detail::write_field_header(os, f.grid(), 0);
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.size() * sizeof(double)));
}

inline void write_field(const std::filesystem::path& path, const ComplexField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path.string() + " for writing");
    detail::write_field_header(os, f.grid(), 1);
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.size() * 2 * sizeof(double)));
}

inline RealField read_real_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open " + path.string());
    std::uint32_t complex_flag = 0;
    Grid g = detail::read_field_header(is, complex_flag);
    if (complex_flag != 0) throw config_error("expected a real field in " + path.string());
    std::vector<double> values(g.size());
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw config_error("truncated field dump " + path.string());
    return RealField(g, std::move(values));
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open " + path.string());
    std::uint32_t complex_flag = 0;
    Grid g = detail::read_field_header(is, complex_flag);
    if (complex_flag != 1) throw config_error("expected a complex field in " + path.string());
    std::vector<cplx> values(g.size());
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * 2 * sizeof(double)));
    if (!is) throw config_error("truncated field dump " + path.string());
    return ComplexField(g, std::move(values));
}

/// CSV writer with a fixed shortest-roundtrip float format so identical runs
/// produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : os_(path) {
        if (!os_) throw config_error("cannot open " + path.string() + " for writing");
        for (std::size_t i = 0; i < columns.size(); ++i)
            os_ << (i ? "," : "") << columns[i];
        os_ << "\n";
        n_cols_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != n_cols_)
            throw config_error("csv row width mismatch");
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            os_ << (i ? "," : "") << buf;
        }
        os_ << "\n";
    }

private:
    std::ofstream os_;
    std::size_t n_cols_ = 0;
};

/// One row per node: coordinates then value(s).
inline void write_field_csv(const std::filesystem::path& path, const RealField& f) {
    const Grid& g = f.grid();
    std::vector<std::string> cols;
    for (int a = 0; a < g.dims(); ++a) cols.push_back("q" + std::to_string(a));
    cols.push_back("value");
    CsvWriter csv(path, cols);
    std::vector<double> row(g.dims() + 1);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = g.unflatten(i);
        for (int a = 0; a < g.dims(); ++a) row[a] = g.coord(a, idx[a]);
        row[g.dims()] = f[i];
        csv.row(row);
    }
}

inline void write_field_csv(const std::filesystem::path& path, const ComplexField& f) {
    const Grid& g = f.grid();
    std::vector<std::string> cols;
    for (int a = 0; a < g.dims(); ++a) cols.push_back("q" + std::to_string(a));
    cols.push_back("re");
    cols.push_back("im");
    CsvWriter csv(path, cols);
    std::vector<double> row(g.dims() + 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = g.unflatten(i);
        for (int a = 0; a < g.dims(); ++a) row[a] = g.coord(a, idx[a]);
        row[g.dims()] = f[i].real();
        row[g.dims() + 1] = f[i].imag();
        csv.row(row);
    }
}

// Trajectory store, little-endian binary:
//   magic "NLT1"
//   u32 walker count M, u32 dims, u32 stride (steps between frames)
//   u32 frame count, f64 t0, f64 dt (between stored frames)
//   frames: M*dims f64 each, walker-major
struct TrajectoryStore {
    std::size_t walkers = 0;
    int dims = 0;
    int stride = 1;
    double t0 = 0.0;
    double frame_dt = 0.0;
    std::vector<std::vector<double>> frames; // each of size walkers*dims

    double time_of(std::size_t frame) const { return t0 + frame_dt * static_cast<double>(frame); }
};

inline void write_trajectories(const std::filesystem::path& path, const TrajectoryStore& ts) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path.string() + " for writing");
    os.write("NLT1", 4);
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ts.walkers));
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ts.dims));
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ts.stride));
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ts.frames.size()));
    detail::write_raw<double>(os, ts.t0);
    detail::write_raw<double>(os, ts.frame_dt);
    for (const auto& frame : ts.frames)
        os.write(reinterpret_cast<const char*>(frame.data()),
                 static_cast<std::streamsize>(frame.size() * sizeof(double)));
}

inline TrajectoryStore read_trajectories(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "NLT1") throw config_error("not an NLT1 trajectory store");
    TrajectoryStore ts;
    ts.walkers = detail::read_raw<std::uint32_t>(is);
    ts.dims = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    ts.stride = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    const auto n_frames = detail::read_raw<std::uint32_t>(is);
    ts.t0 = detail::read_raw<double>(is);
    ts.frame_dt = detail::read_raw<double>(is);
    ts.frames.assign(n_frames, std::vector<double>(ts.walkers * static_cast<std::size_t>(ts.dims)));
    for (auto& frame : ts.frames) {
        is.read(reinterpret_cast<char*>(frame.data()),
                static_cast<std::streamsize>(frame.size() * sizeof(double)));
        if (!is) throw config_error("truncated trajectory store " + path.string());
    }
    return ts;
}

} // namespace nelsonlab
