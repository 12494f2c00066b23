#pragma once

// File formats: field snapshots (one UTF-8 metadata line, then little-endian
// float64 payload, x-fastest and component-major), CSV reports, FNV-1a
// checksums, and the run manifest. All numeric text is written with %.17g so
// identical runs produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lerayflux/field.hpp"

namespace lerayflux {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Snapshot files.
// ---------------------------------------------------------------------------

struct SnapshotHeader {
    int dim = 0;
    int n = 0;
    int components = 0;
    double time = 0.0;
    // Extra named parameters, order-preserving so headers round-trip.
    std::vector<std::pair<std::string, std::string>> params;

    const std::string* find(const std::string& key) const {
        for (const auto& kv : params)
            if (kv.first == key) return &kv.second;
        return nullptr;
    }
    double find_double(const std::string& key, double fallback) const {
        const std::string* s = find(key);
        return s ? std::stod(*s) : fallback;
    }
};

namespace detail {
inline void put_le64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(b, 8);
}
inline double get_le64(std::istream& is) {
    char b[8];
    is.read(b, 8);
    if (!is) throw IoError("snapshot: truncated payload");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    double v;
    std::memcpy(&v, &u, sizeof v);
    return v;
}
} // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const PhysicalField& f, double time,
                           const std::vector<std::pair<std::string, std::string>>& params = {}) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << "lerayflux-field dim=" << f.grid().dim() << " n=" << f.grid().n()
       << " components=" << f.components() << " time=" << format_double(time);
    for (const auto& kv : params) os << ' ' << kv.first << '=' << kv.second;
    os << '\n';
    for (double v : f.raw()) detail::put_le64(os, v);
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

struct Snapshot {
    PhysicalField field;
    SnapshotHeader header;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(is, line)) throw IoError("snapshot: missing header line");
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "lerayflux-field") throw IoError("snapshot: bad magic in '" + path.string() + "'");
    SnapshotHeader h;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw IoError("snapshot: malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") h.dim = std::stoi(val);
        else if (key == "n") h.n = std::stoi(val);
        else if (key == "components") h.components = std::stoi(val);
        else if (key == "time") h.time = std::stod(val);
        else h.params.emplace_back(key, val);
    }
    if (h.dim == 0 || h.n == 0 || h.components == 0)
        throw IoError("snapshot: incomplete header in '" + path.string() + "'");
    Grid g(h.dim, h.n);
    if (h.components != 1 && h.components != h.dim)
        throw ShapeError("snapshot: components inconsistent with dim");
    PhysicalField f(g, h.components);
    for (auto& v : f.raw()) v = detail::get_le64(is);
    return {std::move(f), std::move(h)};
}

// ---------------------------------------------------------------------------
// CSV.
// ---------------------------------------------------------------------------

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : os_(path) {
        if (!os_) throw IoError("cannot open '" + path.string() + "' for writing");
        os_ << header << '\n';
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os_ << (i ? "," : "") << format_double(vals[i]);
        os_ << '\n';
    }
    void raw_row(const std::string& line) { os_ << line << '\n'; }
    void close() { os_.close(); }

private:
    std::ofstream os_;
};

// ---------------------------------------------------------------------------
// Checksums and the manifest.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for checksum");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof buf);
        h = fnv1a(buf, static_cast<std::size_t>(is.gcount()), h);
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace lerayflux
