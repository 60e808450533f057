#ifndef GSOV_SPECIAL_FUNCTIONS_HPP
#define GSOV_SPECIAL_FUNCTIONS_HPP

// Multiplicative theta function on C^x / q^Z and its companions:
//
//   theta(z)    = prod_{i>=0} (1 - q^i z) prod_{i>0} (1 - q^i / z)
//   dlog(z)     = z theta'(z) / theta(z)
//   wp(z)       = -z d/dz dlog(z)        (Weierstrass p of ln z, ~ 1/tau^2)
//   kernel(x,w) = theta(x w) / (theta(x) theta(w))
//
// All functions are templates over the scalar type so that they can be run
// on truncated Taylor jets as well as on plain complex numbers.

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "gsov/errors.hpp"
#include "gsov/jet.hpp"

namespace gsov {

struct EllipticParams {
    cplx q{};
    int trunc = 1;
    double tol = 1e-16;

    /// Picks the smallest truncation with |q|^trunc < tol.
    static EllipticParams make(cplx q, double tol = 1e-16);

    void validate() const;
};

/// Representative of z in the fundamental annulus |q| < |y| <= 1 together with
/// the shift z = q^shift * y.
struct AnnulusPoint {
    cplx z{};
    int shift = 0;
    bool canonical = true;
};

AnnulusPoint canonicalize(cplx z, const EllipticParams& p);

/// Multiplicative distance from z to the lattice q^Z.
double lattice_distance(cplx z, const EllipticParams& p);

namespace detail {

inline int annulus_shift(cplx z, const EllipticParams& p)
{
    const double aq = std::abs(p.q);
    if (aq == 0.0) return 0;
    return static_cast<int>(std::floor(std::log(std::abs(z)) / std::log(aq)));
}

template <class T>
T theta_core(const T& y, const EllipticParams& p)
{
    T r = 1.0 - y;
    cplx qi = 1.0;
    for (int i = 1; i < p.trunc; ++i) {
        qi *= p.q;
        r *= 1.0 - qi * y;
    }
    const T inv = 1.0 / y;
    qi = 1.0;
    for (int i = 1; i <= p.trunc; ++i) {
        qi *= p.q;
        if (qi == cplx{}) break;
        r *= 1.0 - qi * inv;
    }
    return r;
}

template <class T>
T dlog_core(const T& y, const EllipticParams& p)
{
    T r = -y / (1.0 - y);
    cplx qi = 1.0;
    for (int i = 1; i < p.trunc; ++i) {
        qi *= p.q;
        r -= qi * y / (1.0 - qi * y);
    }
    const T inv = 1.0 / y;
    qi = 1.0;
    for (int i = 1; i <= p.trunc; ++i) {
        qi *= p.q;
        if (qi == cplx{}) break;
        const T x = qi * inv;
        r += x / (1.0 - x);
    }
    return r;
}

template <class T>
T wp_core(const T& y, const EllipticParams& p)
{
    T d = 1.0 - y;
    T r = y / (d * d);
    cplx qi = 1.0;
    for (int i = 1; i < p.trunc; ++i) {
        qi *= p.q;
        const T a = qi * y;
        const T b = 1.0 - a;
        r += a / (b * b);
    }
    const T inv = 1.0 / y;
    qi = 1.0;
    for (int i = 1; i <= p.trunc; ++i) {
        qi *= p.q;
        if (qi == cplx{}) break;
        const T a = qi * inv;
        const T b = 1.0 - a;
        r += a / (b * b);
    }
    return r;
}

inline void check_nonzero(cplx z, const char* what)
{
    if (z == cplx{}) throw DomainError(std::string(what) + ": argument is zero");
}

inline void check_pole(cplx z, const EllipticParams& p, const char* what)
{
    if (lattice_distance(z, p) < 10.0 * p.tol)
        throw PoleError(std::string(what) + ": argument lies on q^Z");
}

template <class T>
T theta_impl(const T& z, const EllipticParams& p)
{
    const cplx z0 = value_of(z);
    check_nonzero(z0, "theta");
    const int n = annulus_shift(z0, p);
    if (n == 0) return theta_core(z, p);
    // theta(q^n y) = (-1)^n y^{-n} q^{-n(n-1)/2} theta(y)
    const cplx qn = std::pow(p.q, n);
    const T y = z / qn;
    T ypow = 1.0 / y;
    T acc = ypow;
    const int an = std::abs(n);
    if (n > 0) {
        for (int k = 1; k < an; ++k) acc = acc * ypow;
    } else {
        acc = y;
        for (int k = 1; k < an; ++k) acc = acc * y;
    }
    const double sign = (an % 2) ? -1.0 : 1.0;
    const cplx scale = sign * std::pow(p.q, -static_cast<double>(n) * (n - 1) / 2.0);
    return acc * theta_core(y, p) * scale;
}

template <class T>
T dlog_impl(const T& z, const EllipticParams& p)
{
    const cplx z0 = value_of(z);
    check_nonzero(z0, "theta_log_deriv");
    check_pole(z0, p, "theta_log_deriv");
    const int n = annulus_shift(z0, p);
    if (n == 0) return dlog_core(z, p);
    return dlog_core(z / std::pow(p.q, n), p) - static_cast<double>(n);
}

template <class T>
T wp_impl(const T& z, const EllipticParams& p)
{
    const cplx z0 = value_of(z);
    check_nonzero(z0, "weierstrass_p");
    check_pole(z0, p, "weierstrass_p");
    const int n = annulus_shift(z0, p);
    if (n == 0) return wp_core(z, p);
    return wp_core(z / std::pow(p.q, n), p);
}

}  // namespace detail

/// theta(z); zero exactly on q^Z. Throws DomainError at z = 0.
template <class T>
T theta(const T& z, const EllipticParams& p)
{
    p.validate();
    return detail::theta_impl(z, p);
}

/// z theta'(z) / theta(z). Throws PoleError on q^Z.
template <class T>
T theta_log_deriv(const T& z, const EllipticParams& p)
{
    p.validate();
    return detail::dlog_impl(z, p);
}

/// Weierstrass p evaluated at ln z in the multiplicative convention.
template <class T>
T weierstrass_p(const T& z, const EllipticParams& p)
{
    p.validate();
    return detail::wp_impl(z, p);
}

/// theta(x w) / (theta(x) theta(w)).
template <class T>
T lame_kernel(const T& x, const T& w, const EllipticParams& p)
{
    p.validate();
    detail::check_pole(value_of(x), p, "lame_kernel");
    detail::check_pole(value_of(w), p, "lame_kernel");
    return detail::theta_impl(T(x * w), p) / (detail::theta_impl(x, p) * detail::theta_impl(w, p));
}

/// phi(q) = prod_{i>0} (1 - q^i)^2, so that theta(z) ~ (1 - z) phi near z = 1.
cplx kernel_normalization(const EllipticParams& p);

/// phi(q) * lame_kernel: residue -1 in ln w at w = 1, the normalization under
/// which kernel(x,w) kernel(1/x,w) = -(wp(x) - wp(w)).
template <class T>
T unit_residue_kernel(const T& x, const T& w, const EllipticParams& p)
{
    return lame_kernel(x, w, p) * kernel_normalization(p);
}

/// Sign relating the unit-residue kernel product to wp differences.
inline constexpr double kKernelProductSign = -1.0;

// Multivariate jets go through their univariate expansion.
Jet theta(const Jet& z, const EllipticParams& p);
Jet theta_log_deriv(const Jet& z, const EllipticParams& p);
Jet weierstrass_p(const Jet& z, const EllipticParams& p);

}  // namespace gsov

#endif
