// checkpoint.hpp: Binary container: magic, JSON header, raw little-endian complex128 payloads
//
// Layout:
//   8 bytes   magic (e.g. "TTMPS\0\0\1")
//   8 bytes   header length H, uint64 little-endian
//   H bytes   UTF-8 JSON header
//   payload   complex128 values (re, im as IEEE-754 float64 little-endian), in header order

#pragma once

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttedopa/errors.hpp"
#include "ttedopa/tensor/mps.hpp"

namespace ttedopa::io {

inline constexpr std::array<char, 8> kMpsMagic{'T', 'T', 'M', 'P', 'S', '\0', '\0', '\1'};
inline constexpr std::array<char, 8> kMatrixMagic{'T', 'T', 'M', 'A', 'T', '\0', '\0', '\1'};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated container header");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline void put_f64(std::ostream& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(out, bits);
}

inline double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

inline void write_container(const std::string& path, const std::array<char, 8>& magic, const nlohmann::json& header,
                            const std::vector<const cvec*>& payloads) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(magic.data(), 8);
    const std::string h = header.dump();
    put_u64(out, h.size());
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const cvec* p : payloads)
        for (Index i = 0; i < p->size(); ++i) {
            put_f64(out, (*p)(i).real());
            put_f64(out, (*p)(i).imag());
        }
    if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json read_header(std::istream& in, const std::array<char, 8>& magic, const std::string& path) {
    std::array<char, 8> m{};
    if (!in.read(m.data(), 8) || m != magic) throw IoError("not a recognised container: " + path);
    const std::uint64_t len = get_u64(in);
    std::string h(len, '\0');
    if (!in.read(h.data(), static_cast<std::streamsize>(len))) throw IoError("truncated header: " + path);
    return nlohmann::json::parse(h);
}

inline cvec read_values(std::istream& in, Index count) {
    cvec v(count);
    for (Index i = 0; i < count; ++i) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        v(i) = {re, im};
    }
    return v;
}

} // namespace detail

// Site payloads are flattened (s, r, l) with l fastest.
inline void save_checkpoint(const std::string& path, const MpsState& psi, double time,
                            const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json h;
    h["format"] = "ttedopa-mps";
    h["version"] = 1;
    h["time"] = time;
    h["ortho_center"] = psi.ortho_center;
    h["log_norm"] = psi.log_norm;
    h["layout"] = "per site: index = l + D_left*(r + D_right*s)";
    nlohmann::json shapes = nlohmann::json::array();
    std::vector<cvec> flat;
    flat.reserve(psi.size());
    for (const auto& s : psi.sites) {
        shapes.push_back({s.dl(), s.d(), s.dr()});
        flat.push_back(s.flatten());
    }
    h["shapes"] = shapes;
    h["local_dims"] = psi.local_dims();
    h["extra"] = extra;
    std::vector<const cvec*> ptrs;
    for (const auto& f : flat) ptrs.push_back(&f);
    detail::write_container(path, kMpsMagic, h, ptrs);
}

struct Checkpoint {
    MpsState state;
    double time{0.0};
    nlohmann::json header;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    Checkpoint c;
    c.header = detail::read_header(in, kMpsMagic, path);
    c.time = c.header.at("time").get<double>();
    for (const auto& shp : c.header.at("shapes")) {
        const Index dl = shp.at(0), d = shp.at(1), dr = shp.at(2);
        c.state.sites.push_back(SiteTensor::unflatten(detail::read_values(in, dl * d * dr), dl, d, dr));
    }
    c.state.ortho_center = c.header.at("ortho_center").get<std::size_t>();
    c.state.log_norm = c.header.value("log_norm", 0.0);
    return c;
}

// Dense complex matrix, column-major payload.
inline void save_matrix(const std::string& path, const cmat& m, const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json h;
    h["format"] = "ttedopa-matrix";
    h["version"] = 1;
    h["shape"] = {m.rows(), m.cols()};
    h["order"] = "column-major";
    h["extra"] = extra;
    const cvec flat = Eigen::Map<const cvec>(m.data(), m.size());
    detail::write_container(path, kMatrixMagic, h, {&flat});
}

inline cmat load_matrix(const std::string& path, nlohmann::json* header = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open matrix file: " + path);
    const auto h = detail::read_header(in, kMatrixMagic, path);
    const Index r = h.at("shape").at(0), c = h.at("shape").at(1);
    const cvec v = detail::read_values(in, r * c);
    if (header) *header = h;
    return Eigen::Map<const cmat>(v.data(), r, c);
}

} // namespace ttedopa::io
