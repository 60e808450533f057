#include "doctest.h"

#include <cmath>
#include <complex>

#include "gsov/jet.hpp"

using gsov::cplx;
using gsov::Jet;

namespace {

bool near(cplx a, cplx b, double tol = 1e-12) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("layout counts monomials")
{
    auto l = gsov::JetLayout::get(3, 4);
    CHECK(l->size() == 35);  // C(3+4, 4)
    CHECK(l->find({0, 0, 0}) == 0);
    CHECK(l->find({2, 2, 1}) == -1);
    CHECK(l->find({1, 2, 1}) >= 0);
    CHECK(gsov::JetLayout::get(3, 4) == l);
}

TEST_CASE("product of polynomials matches expanded coefficients")
{
    // (1 + x + 2y)(3 - x + y) = 3 + 2x + 7y - x^2 - xy + 2y^2
    const Jet x = Jet::variable(2, 3, 0, 0.0);
    const Jet y = Jet::variable(2, 3, 1, 0.0);
    const Jet p = (1.0 + x + 2.0 * y) * (3.0 - x + y);
    CHECK(near(p.coeff({0, 0}), 3.0));
    CHECK(near(p.coeff({1, 0}), 2.0));
    CHECK(near(p.coeff({0, 1}), 7.0));
    CHECK(near(p.coeff({2, 0}), -1.0));
    CHECK(near(p.coeff({1, 1}), -1.0));
    CHECK(near(p.coeff({0, 2}), 2.0));
    CHECK(near(p.coeff({2, 1}), 0.0));
}

TEST_CASE("partials of a rational function against closed forms")
{
    // f = x / (1 + x y) at (x, y) = (0.7, -0.3)
    const cplx x0 = 0.7, y0 = -0.3;
    const Jet x = Jet::variable(2, 4, 0, x0);
    const Jet y = Jet::variable(2, 4, 1, y0);
    const Jet f = x / (1.0 + x * y);
    const cplx d = 1.0 + x0 * y0;
    CHECK(near(f.value(), x0 / d));
    CHECK(near(f.partial({1, 0}), 1.0 / (d * d)));
    CHECK(near(f.partial({0, 1}), -x0 * x0 / (d * d)));
    CHECK(near(f.partial({2, 0}), -2.0 * y0 / (d * d * d)));
    CHECK(near(f.partial({0, 2}), 2.0 * x0 * x0 * x0 / (d * d * d)));
    // d^2/dx dy = -2x/d^2 + 2 x^2 y / d^3
    CHECK(near(f.partial({1, 1}), -2.0 * x0 / (d * d) + 2.0 * x0 * x0 * y0 / (d * d * d)));
}

TEST_CASE("exp log pow sqrt on a univariate seed")
{
    const cplx z0{0.4, 0.3};
    const Jet z = Jet::variable(1, 6, 0, z0);
    const Jet e = gsov::exp(z);
    for (int k = 0; k <= 6; ++k) CHECK(near(e.partial({k}), std::exp(z0)));
    const Jet l = gsov::log(z);
    CHECK(near(l.partial({3}), 2.0 / (z0 * z0 * z0)));
    const Jet s = gsov::sqrt(z);
    CHECK(near((s * s).coeff({4}), 0.0));
    CHECK(near((s * s).coeff({1}), 1.0));
    const cplx a{0.5, -1.2};
    const Jet p = gsov::pow(z, a);
    CHECK(near(p.partial({2}), a * (a - 1.0) * std::pow(z0, a - 2.0)));
    const Jet p3 = gsov::pow(z, -3);
    CHECK(near(p3.partial({1}), -3.0 / std::pow(z0, 4)));
}

TEST_CASE("substitute composes expansions")
{
    // g(u, v) = u^2 v around (1, 2); u = x + y, v = x y at (x, y) = (0.5, 0.5) -> (1, 0.25)
    const cplx u0 = 1.0, v0 = 0.25;
    const Jet u = Jet::variable(2, 3, 0, u0);
    const Jet v = Jet::variable(2, 3, 1, v0);
    const Jet g = u * u * v;
    const Jet x = Jet::variable(2, 3, 0, 0.5);
    const Jet y = Jet::variable(2, 3, 1, 0.5);
    const Jet h[2] = {x + y, x * y};
    const Jet c = g.substitute(h);
    const Jet direct = (x + y) * (x + y) * (x * y);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(near(c[i], direct[i]));
}

TEST_CASE("derivative and truncation")
{
    const Jet x = Jet::variable(2, 4, 0, 0.3);
    const Jet y = Jet::variable(2, 4, 1, 1.1);
    const Jet f = x * x * x * y;
    const Jet d = f.derivative({1, 1});  // 3 x^2
    CHECK(d.order() == 2);
    CHECK(near(d.value(), 3.0 * 0.09));
    CHECK(near(d.partial({1, 0}), 6.0 * 0.3));
    CHECK(f.truncated(1).size() == 3);
}

TEST_CASE("lift_univariate agrees with direct evaluation")
{
    const Jet x = Jet::variable(2, 3, 0, 0.2);
    const Jet y = Jet::variable(2, 3, 1, 0.7);
    const Jet arg = x * y + 1.0;
    auto f = [](const Jet& t) { return 1.0 / (1.0 - t * t); };
    const Jet a = gsov::lift_univariate(arg, f);
    const Jet b = f(arg);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(near(a[i], b[i], 1e-10));
}
