#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>

namespace vvrom {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using MatX4i = Eigen::Matrix<int, Eigen::Dynamic, 4>;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

template <class Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double mu0 = 4.0e-7 * pi;  // H/m, exact by definition here

// Error taxonomy mapped to CLI exit codes: config=2, numerical=3, validation=4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Static-chunk parallel loop. Chunk assignment depends only on (n, threads),
// so reruns with the same thread count are bit-reproducible.
void parallel_for(long n, int threads, const std::function<void(long)>& body);
int default_threads();

// FNV-1a over raw bytes; used to fingerprint meshes in bundle provenance.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull);

}  // namespace vvrom
