#include "turbkit/checkpoint.hpp"

#include "turbkit/errors.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace turbkit {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
public:
    template <class T>
    void put(T v) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        bytes.insert(bytes.end(), b, b + sizeof(T));
    }
    void put_bytes(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
    void put_array(const CArray& c) {
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            put(c(i).real());
            put(c(i).imag());
        }
    }
    void finish() {
        put(static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size()))));
    }
    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw FormatError("cannot open '" + path + "' for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw FormatError("write to '" + path + "' failed");
    }
    std::vector<unsigned char> bytes;
};

class Reader {
public:
    Reader(const std::string& path, const char* magic) : path_(path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw FormatError("cannot open '" + path + "'");
        bytes_.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
        if (bytes_.size() < 8) throw FormatError("'" + path + "' is truncated");
        if (std::memcmp(bytes_.data(), magic, 4) != 0)
            throw FormatError("'" + path + "' has wrong magic (expected " + std::string(magic, 4) + ")");
        pos_ = 4;
        const auto version = get<std::uint16_t>();
        if (version != checkpoint_version)
            throw FormatError("'" + path + "' has unsupported format version " + std::to_string(version));
    }
    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    CArray get_array(std::size_t n) {
        need(16 * n);
        CArray c(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double re = get<double>();
            const double im = get<double>();
            c(i) = {re, im};
        }
        return c;
    }
    void verify_crc() {
        const std::size_t body = pos_;
        const auto stored = get<std::uint32_t>();
        const auto actual = static_cast<std::uint32_t>(crc32(0L, bytes_.data(), static_cast<uInt>(body)));
        if (stored != actual) throw FormatError("'" + path_ + "' failed its CRC-32 check");
        if (pos_ != bytes_.size()) throw FormatError("'" + path_ + "' has trailing bytes");
    }

    // checked before any grid is allocated so a corrupt header cannot request huge buffers
    void expect_arrays(int dim, int n, int count) const {
        const double cells = std::pow(double(n), dim);
        if (16.0 * cells * count + 4 > double(bytes_.size() - pos_)) throw FormatError("'" + path_ + "' is truncated");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw FormatError("'" + path_ + "' is truncated");
    }
    std::string path_;
    std::vector<unsigned char> bytes_;
    std::size_t pos_ = 0;
};

void write_state(const std::string& path, const SpectralField& u, const SpectralField& Z, double nu, double t,
                 std::uint64_t step, const std::string& rng) {
    require_same_grid(u.grid, Z.grid, "checkpoint");
    Writer w;
    w.put_bytes("TKSC");
    w.put(checkpoint_version);
    w.put(static_cast<std::uint8_t>(u.grid.dim()));
    w.put(static_cast<std::uint32_t>(u.grid.n()));
    w.put(nu);
    w.put(t);
    w.put(step);
    w.put(static_cast<std::uint32_t>(rng.size()));
    w.put_bytes(rng);
    for (const auto& c : u.comp) w.put_array(c);
    for (const auto& c : Z.comp) w.put_array(c);
    w.finish();
    w.write(path);
}

struct RawState {
    SpectralField u, Z;
    double nu = 0, t = 0;
    std::uint64_t step = 0;
    std::string rng;
};

RawState read_state(const std::string& path) {
    Reader r(path, "TKSC");
    RawState s;
    const int dim = r.get<std::uint8_t>();
    const int n = static_cast<int>(r.get<std::uint32_t>());
    s.nu = r.get<double>();
    s.t = r.get<double>();
    s.step = r.get<std::uint64_t>();
    s.rng = r.get_bytes(r.get<std::uint32_t>());
    r.expect_arrays(dim, n, 2 * dim);
    WaveGrid g;
    try {
        g = WaveGrid(dim, n);
    } catch (const ConfigError& e) {
        throw FormatError("'" + path + "' has an invalid grid header: " + e.what());
    }
    s.u = SpectralField(g, dim == 3);
    s.Z = SpectralField(g, dim == 3);
    for (auto& c : s.u.comp) c = r.get_array(g.size());
    for (auto& c : s.Z.comp) c = r.get_array(g.size());
    r.verify_crc();
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const SimState& state, double nu) {
    write_state(path, state.u, state.Z.Z, nu, state.t, state.step, state.rng.state());
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    RawState raw = read_state(path);
    if (raw.rng.empty()) throw FormatError("'" + path + "' is a snapshot, not a checkpoint (no random-stream state)");
    LoadedCheckpoint c;
    c.nu = raw.nu;
    c.state.u = std::move(raw.u);
    c.state.Z.Z = std::move(raw.Z);
    c.state.Z.t = raw.t;
    c.state.t = raw.t;
    c.state.step = raw.step;
    c.state.rng.set_state(raw.rng);
    return c;
}

void save_snapshot(const std::string& path, const Snapshot& snap, double nu) {
    write_state(path, snap.u, snap.Z, nu, snap.t, snap.step, "");
}

Snapshot load_snapshot(const std::string& path, double* nu) {
    RawState raw = read_state(path);
    Snapshot s;
    s.u = std::move(raw.u);
    s.Z = std::move(raw.Z);
    s.t = raw.t;
    s.step = raw.step;
    if (nu) *nu = raw.nu;
    return s;
}

void save_pressure(const std::string& path, const ScalarField& p, double t, std::uint64_t step) {
    Writer w;
    w.put_bytes("TKSP");
    w.put(checkpoint_version);
    w.put(static_cast<std::uint8_t>(p.grid.dim()));
    w.put(static_cast<std::uint32_t>(p.grid.n()));
    w.put(t);
    w.put(step);
    w.put_array(p.c);
    w.finish();
    w.write(path);
}

ScalarField load_pressure(const std::string& path, double* t, std::uint64_t* step) {
    Reader r(path, "TKSP");
    const int dim = r.get<std::uint8_t>();
    const int n = static_cast<int>(r.get<std::uint32_t>());
    const double tt = r.get<double>();
    const auto st = r.get<std::uint64_t>();
    r.expect_arrays(dim, n, 1);
    WaveGrid g;
    try {
        g = WaveGrid(dim, n);
    } catch (const ConfigError& e) {
        throw FormatError("'" + path + "' has an invalid grid header: " + e.what());
    }
    ScalarField p(g, r.get_array(g.size()));
    r.verify_crc();
    if (t) *t = tt;
    if (step) *step = st;
    return p;
}

}  // namespace turbkit
