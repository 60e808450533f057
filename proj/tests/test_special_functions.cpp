#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "gsov/special_functions.hpp"

using gsov::cplx;
using gsov::EllipticParams;

namespace {

bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

// Straight product with a generous truncation and no annulus reduction.
cplx naive_theta(cplx z, cplx q)
{
    cplx r = 1.0 - z;
    cplx qi = 1.0;
    for (int i = 1; i < 400; ++i) {
        qi *= q;
        r *= (1.0 - qi * z) * (1.0 - qi / z);
    }
    return r;
}

// z d/dz by a centered difference in ln z.
template <class F>
cplx zdz(F f, cplx z, double h = 1e-5)
{
    return (f(z * std::exp(h)) - f(z * std::exp(-h))) / (2.0 * h);
}

}  // namespace

TEST_CASE("truncation rule")
{
    auto p = EllipticParams::make(0.1, 1e-16);
    CHECK(p.trunc == 17);
    CHECK(EllipticParams::make(0.0).trunc == 1);
    CHECK_THROWS_AS(EllipticParams::make(1.0), gsov::ParameterError);
    CHECK_THROWS_AS(EllipticParams::make(cplx{0.6, 0.9}), gsov::ParameterError);
}

TEST_CASE("closed values")
{
    const auto p1 = EllipticParams::make(0.1);
    CHECK(std::abs(gsov::theta(cplx{1.0}, p1)) < 1e-15);
    const auto p0 = EllipticParams::make(0.0);
    CHECK(near(gsov::theta(cplx{2.0}, p0), -1.0, 1e-15));
    CHECK(near(gsov::theta_log_deriv(cplx{2.0}, p0), 2.0, 1e-15));
    CHECK(near(gsov::weierstrass_p(cplx{2.0}, p0), 2.0, 1e-15));
    CHECK(near(gsov::lame_kernel(cplx{2.0}, cplx{3.0}, p0), -2.5, 1e-15));
    CHECK_THROWS_AS(gsov::theta(cplx{0.0}, p1), gsov::DomainError);
    CHECK_THROWS_AS(gsov::theta_log_deriv(cplx{0.1}, p1), gsov::PoleError);
    CHECK_THROWS_AS(gsov::weierstrass_p(cplx{1.0}, p1), gsov::PoleError);
}

TEST_CASE("theta against the naive product and quasi-periodicity")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const cplx q{0.12, 0.2};
    const auto p = EllipticParams::make(q);
    for (int t = 0; t < 20; ++t) {
        const cplx z = std::exp(cplx{2.5 * U(rng), 3.0 * U(rng)});
        CHECK(near(gsov::theta(z, p), naive_theta(z, q), 1e-11));
        // theta(q z) = -theta(z) / z
        CHECK(near(gsov::theta(q * z, p), -gsov::theta(z, p) / z, 1e-11));
        // theta(1/z) = -theta(z) / z
        CHECK(near(gsov::theta(1.0 / z, p), -gsov::theta(z, p) / z, 1e-11));
        // theta(q^n y) = (-1)^n y^-n q^{-n(n-1)/2} theta(y)
        for (int n : {-3, 2, 4}) {
            const cplx lhs = gsov::theta(std::pow(q, n) * z, p);
            const cplx rhs = ((n % 2) ? -1.0 : 1.0) * std::pow(z, -n) *
                             std::pow(q, -0.5 * n * (n - 1)) * naive_theta(z, q);
            CHECK(near(lhs, rhs, 1e-9));
        }
    }
}

TEST_CASE("log-derivative and wp against finite differences")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const cplx q{-0.2, 0.05};
    const auto p = EllipticParams::make(q);
    auto th = [&](cplx z) { return naive_theta(z, q); };
    for (int t = 0; t < 20; ++t) {
        const cplx z = std::exp(cplx{1.5 * U(rng), 3.0 * U(rng)});
        const cplx g_fd = zdz(th, z) / th(z);
        CHECK(near(gsov::theta_log_deriv(z, p), g_fd, 1e-7));
        auto g = [&](cplx w) { return gsov::theta_log_deriv(w, p); };
        CHECK(near(gsov::weierstrass_p(z, p), -zdz(g, z), 1e-7));
        CHECK(near(gsov::theta_log_deriv(q * z, p), g(z) - 1.0, 1e-11));
        CHECK(near(gsov::theta_log_deriv(1.0 / z, p), 1.0 - g(z), 1e-11));
        CHECK(near(gsov::weierstrass_p(q * q * z, p), gsov::weierstrass_p(z, p), 1e-10));
    }
}

TEST_CASE("kernel product law and residue")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const cplx q{0.3, -0.1};
    const auto p = EllipticParams::make(q);
    const cplx phi = gsov::kernel_normalization(p);
    cplx phi_oracle = 1.0;
    for (int i = 1; i < 300; ++i) phi_oracle *= std::pow(1.0 - std::pow(q, i), 2);
    CHECK(near(phi, phi_oracle, 1e-14));
    for (int t = 0; t < 20; ++t) {
        const cplx x = std::exp(cplx{U(rng), 3.0 * U(rng)});
        const cplx w = std::exp(cplx{U(rng), 3.0 * U(rng)});
        const cplx k1 = gsov::unit_residue_kernel(x, w, p);
        const cplx k2 = gsov::unit_residue_kernel(1.0 / x, w, p);
        const cplx rhs = gsov::kKernelProductSign *
                         (gsov::weierstrass_p(x, p) - gsov::weierstrass_p(w, p));
        CHECK(near(k1 * k2, rhs, 1e-10));
        // K(x, q w) = K(x, w) / x
        CHECK(near(gsov::lame_kernel(x, q * w, p), gsov::lame_kernel(x, w, p) / x, 1e-10));
    }
    // residue -1 in ln w at w = 1
    const cplx x{0.6, 0.4};
    const double eps = 1e-6;
    const cplx k = gsov::unit_residue_kernel(x, std::exp(cplx{eps}), p);
    CHECK(std::abs(k * eps + 1.0) < 1e-5);
}

TEST_CASE("jet evaluation matches finite differences")
{
    const cplx q{0.15, 0.1};
    const auto p = EllipticParams::make(q);
    const cplx z0{0.5, 0.6};
    const gsov::Jet z = gsov::Jet::variable(1, 3, 0, z0);
    const gsov::Jet t = gsov::theta(z, p);
    const gsov::Jet tt = gsov::detail::theta_impl(z, p);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(near(t[i], tt[i], 1e-12));
    const double h = 1e-5;
    auto th = [&](cplx w) { return gsov::theta(w, p); };
    CHECK(near(t.partial({1}), (th(z0 + h) - th(z0 - h)) / (2.0 * h), 1e-8));
    CHECK(near(t.partial({2}), (th(z0 + h) - 2.0 * th(z0) + th(z0 - h)) / (h * h), 1e-4));
    // values outside the fundamental annulus go through the shift
    const gsov::Jet zs = gsov::Jet::variable(1, 2, 0, z0 / (q * q));
    const gsov::Jet g = gsov::theta_log_deriv(zs, p);
    CHECK(near(g.value(), gsov::theta_log_deriv(z0 / (q * q), p), 1e-12));
    auto gf = [&](cplx w) { return gsov::theta_log_deriv(w, p); };
    const cplx w0 = z0 / (q * q);
    const double hh = 1e-4 * std::abs(w0);
    CHECK(near(g.partial({1}), (gf(w0 + hh) - gf(w0 - hh)) / (2.0 * hh), 1e-6));
}
