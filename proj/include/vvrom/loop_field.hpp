#pragma once

#include <cmath>

#include "vvrom/common.hpp"

namespace vvrom {

// Vector potential and flux density of a filamentary circular current loop,
// via complete elliptic integrals. Templated on the scalar so tests can run
// the same expressions in extended precision.

struct Loop {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    Vec3 axis = Vec3::UnitZ();  // unit
    double turns = 1.0;
};

namespace detail {

template <class Scalar>
Scalar comp_ellint_k(Scalar k) {
    if constexpr (sizeof(Scalar) > sizeof(double))
        return std::comp_ellint_1l(static_cast<long double>(k));
    else
        return std::comp_ellint_1(static_cast<double>(k));
}

template <class Scalar>
Scalar comp_ellint_e(Scalar k) {
    if constexpr (sizeof(Scalar) > sizeof(double))
        return std::comp_ellint_2l(static_cast<long double>(k));
    else
        return std::comp_ellint_2(static_cast<double>(k));
}

// orthonormal frame with w = axis
template <class Scalar>
void loop_frame(const Vector3<Scalar>& axis, Vector3<Scalar>& u, Vector3<Scalar>& v) {
    Vector3<Scalar> seed = std::abs(axis[0]) < Scalar(0.9) ? Vector3<Scalar>(1, 0, 0)
                                                           : Vector3<Scalar>(0, 1, 0);
    u = axis.cross(seed).normalized();
    v = axis.cross(u);
}

}  // namespace detail

// A [Wb/m] of a loop carrying `current` amperes (times turns).
template <class Scalar>
Vector3<Scalar> loop_vector_potential(const Vector3<Scalar>& center, Scalar radius,
                                      const Vector3<Scalar>& axis, Scalar current,
                                      const Vector3<Scalar>& point) {
    const Vector3<Scalar> d = point - center;
    const Scalar z = axis.dot(d);
    const Vector3<Scalar> radial = d - z * axis;
    const Scalar rho = radial.norm();
    const Scalar denom2 = (radius + rho) * (radius + rho) + z * z;
    const Scalar k2 = Scalar(4) * radius * rho / denom2;
    if (k2 >= Scalar(1))
        throw NumericalError("loop vector potential evaluated on the filament");
    if (rho <= Scalar(0)) return Vector3<Scalar>::Zero();  // on-axis: A = 0 by symmetry
    const Scalar k = std::sqrt(k2);
    const Scalar kk = detail::comp_ellint_k(k);
    const Scalar ee = detail::comp_ellint_e(k);
    const Scalar pref = Scalar(mu0) * current / (Scalar(4) * Scalar(pi));
    const Scalar a_phi =
        pref * (Scalar(4) * radius / std::sqrt(denom2)) * (((Scalar(2) - k2) * kk - Scalar(2) * ee) / k2);
    const Vector3<Scalar> rho_hat = radial / rho;
    const Vector3<Scalar> phi_hat = axis.cross(rho_hat);
    return a_phi * phi_hat;
}

// B [T] of the same loop.
template <class Scalar>
Vector3<Scalar> loop_flux_density(const Vector3<Scalar>& center, Scalar radius,
                                  const Vector3<Scalar>& axis, Scalar current,
                                  const Vector3<Scalar>& point) {
    const Vector3<Scalar> d = point - center;
    const Scalar z = axis.dot(d);
    const Vector3<Scalar> radial = d - z * axis;
    const Scalar rho = radial.norm();
    const Scalar denom2 = (radius + rho) * (radius + rho) + z * z;
    const Scalar k2 = Scalar(4) * radius * rho / denom2;
    if (k2 >= Scalar(1))
        throw NumericalError("loop flux density evaluated on the filament");
    const Scalar pref = Scalar(mu0) * current / (Scalar(2) * Scalar(pi));
    if (rho <= Scalar(0)) {
        const Scalar bz = Scalar(mu0) * current * radius * radius /
                          (Scalar(2) * std::pow(radius * radius + z * z, Scalar(1.5)));
        return bz * axis;
    }
    const Scalar k = std::sqrt(k2);
    const Scalar kk = detail::comp_ellint_k(k);
    const Scalar ee = detail::comp_ellint_e(k);
    const Scalar dsq = (radius - rho) * (radius - rho) + z * z;
    const Scalar common = pref / std::sqrt(denom2);
    const Scalar b_rho =
        common * (z / rho) * (-kk + ee * (radius * radius + rho * rho + z * z) / dsq);
    const Scalar b_z = common * (kk + ee * (radius * radius - rho * rho - z * z) / dsq);
    const Vector3<Scalar> rho_hat = radial / rho;
    return b_rho * rho_hat + b_z * axis;
}

inline Vec3 loop_vector_potential(const Loop& loop, double current, const Vec3& point) {
    return loop_vector_potential<double>(loop.center, loop.radius, loop.axis,
                                         current * loop.turns, point);
}

inline Vec3 loop_flux_density(const Loop& loop, double current, const Vec3& point) {
    return loop_flux_density<double>(loop.center, loop.radius, loop.axis, current * loop.turns,
                                     point);
}

// Mutual inductance of two coaxial filamentary loops (radii a, b, axial
// separation d), the classical elliptic-integral form of the Neumann formula.
inline double coaxial_mutual_inductance(double a, double b, double d) {
    const double k2 = 4.0 * a * b / ((a + b) * (a + b) + d * d);
    const double k = std::sqrt(k2);
    const double kk = std::comp_ellint_1(k);
    const double ee = std::comp_ellint_2(k);
    return mu0 * std::sqrt(a * b) * ((2.0 / k - k) * kk - (2.0 / k) * ee);
}

}  // namespace vvrom
