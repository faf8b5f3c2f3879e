#include "vvrom/io.hpp"

#include <cstdint>

namespace vvrom {

namespace {

void open_out(std::ofstream& os, const std::string& path, std::uint32_t tag) {
    os.open(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os.write(reinterpret_cast<const char*>(&tag), 4);
}

void open_in(std::ifstream& is, const std::string& path, std::uint32_t tag) {
    is.open(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    std::uint32_t got = 0;
    is.read(reinterpret_cast<char*>(&got), 4);
    if (!is || got != tag) throw ConfigError("unexpected file type: " + path);
}

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NumericalError("truncated binary file");
    return v;
}

constexpr std::uint32_t kDense = 0x564d4431;   // VMD1
constexpr std::uint32_t kVector = 0x564d5631;  // VMV1
constexpr std::uint32_t kSparse = 0x564d5331;  // VMS1
constexpr std::uint32_t kIntVec = 0x564d4931;  // VMI1

}  // namespace

void write_dense(const std::string& path, const MatX& m) {
    std::ofstream os;
    open_out(os, path, kDense);
    put<std::int64_t>(os, m.rows());
    put<std::int64_t>(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}

MatX read_dense(const std::string& path) {
    std::ifstream is;
    open_in(is, path, kDense);
    const auto r = get<std::int64_t>(is);
    const auto c = get<std::int64_t>(is);
    MatX m(r, c);
    is.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    if (!is) throw NumericalError("truncated matrix: " + path);
    return m;
}

void write_vector(const std::string& path, const VecX& v) {
    std::ofstream os;
    open_out(os, path, kVector);
    put<std::int64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
}

VecX read_vector(const std::string& path) {
    std::ifstream is;
    open_in(is, path, kVector);
    const auto n = get<std::int64_t>(is);
    VecX v(n);
    is.read(reinterpret_cast<char*>(v.data()), sizeof(double) * v.size());
    if (!is) throw NumericalError("truncated vector: " + path);
    return v;
}

void write_sparse(const std::string& path, const SpMat& m) {
    std::ofstream os;
    open_out(os, path, kSparse);
    put<std::int64_t>(os, m.rows());
    put<std::int64_t>(os, m.cols());
    put<std::int64_t>(os, m.nonZeros());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            put<std::int32_t>(os, static_cast<int>(it.row()));
            put<std::int32_t>(os, static_cast<int>(it.col()));
            put<double>(os, it.value());
        }
}

SpMat read_sparse(const std::string& path) {
    std::ifstream is;
    open_in(is, path, kSparse);
    const auto r = get<std::int64_t>(is);
    const auto c = get<std::int64_t>(is);
    const auto nnz = get<std::int64_t>(is);
    std::vector<Triplet> trip;
    trip.reserve(nnz);
    for (std::int64_t k = 0; k < nnz; ++k) {
        const auto i = get<std::int32_t>(is);
        const auto j = get<std::int32_t>(is);
        const auto v = get<double>(is);
        trip.emplace_back(i, j, v);
    }
    SpMat m(r, c);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void write_int_vector(const std::string& path, const std::vector<int>& v) {
    std::ofstream os;
    open_out(os, path, kIntVec);
    put<std::int64_t>(os, static_cast<std::int64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), sizeof(int) * v.size());
}

std::vector<int> read_int_vector(const std::string& path) {
    std::ifstream is;
    open_in(is, path, kIntVec);
    const auto n = get<std::int64_t>(is);
    std::vector<int> v(n);
    is.read(reinterpret_cast<char*>(v.data()), sizeof(int) * v.size());
    if (!is) throw NumericalError("truncated int vector: " + path);
    return v;
}

}  // namespace vvrom
