#include "doctest.h"

#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "gsov/operator_algebra.hpp"

using gsov::cplx;
using gsov::CoeffFn;
using gsov::DifferentialOperator;
using gsov::Jet;
using gsov::MultiIndex;
using gsov::Point;

namespace {

const std::vector<std::string> X1{"x"};
const std::vector<std::string> XY{"x", "y"};

bool near(cplx a, cplx b, double tol = 1e-11) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

gsov::Sampler disk(int n, double r = 1.5)
{
    return [n, r](std::mt19937_64& g) {
        std::uniform_real_distribution<double> U(-r, r);
        Point p(n);
        for (auto& x : p) x = {U(g), U(g)};
        return p;
    };
}

// Brute-force polynomial calculus in two variables, kept independent of the
// jet machinery: polynomials as exponent -> coefficient maps.
using Poly = std::map<std::pair<int, int>, cplx>;

Poly poly_mul(const Poly& a, const Poly& b)
{
    Poly r;
    for (auto [ea, ca] : a)
        for (auto [eb, cb] : b) r[{ea.first + eb.first, ea.second + eb.second}] += ca * cb;
    return r;
}

Poly poly_diff(const Poly& a, int var)
{
    Poly r;
    for (auto [e, c] : a) {
        int k = var == 0 ? e.first : e.second;
        if (k == 0) continue;
        auto e2 = e;
        (var == 0 ? e2.first : e2.second) -= 1;
        r[e2] += c * double(k);
    }
    return r;
}

cplx poly_eval(const Poly& a, const Point& x)
{
    cplx s = 0.0;
    for (auto [e, c] : a) s += c * std::pow(x[0], e.first) * std::pow(x[1], e.second);
    return s;
}

struct PolyOp {
    std::vector<std::pair<MultiIndex, Poly>> terms;

    Poly apply(const Poly& f) const
    {
        Poly r;
        for (const auto& [idx, c] : terms) {
            Poly g = f;
            for (int k = 0; k < idx[0]; ++k) g = poly_diff(g, 0);
            for (int k = 0; k < idx[1]; ++k) g = poly_diff(g, 1);
            for (auto [e, v] : poly_mul(c, g)) r[e] += v;
        }
        return r;
    }

    DifferentialOperator to_op() const
    {
        std::vector<std::pair<MultiIndex, CoeffFn>> t;
        for (const auto& [idx, c] : terms) {
            Poly pc = c;
            t.emplace_back(idx, [pc](std::span<const Jet> x) {
                Jet s(x[0].layout_ptr(), 0.0);
                for (auto [e, v] : pc) s += gsov::pow(x[0], e.first) * gsov::pow(x[1], e.second) * v;
                return s;
            });
        }
        return DifferentialOperator(XY, t);
    }
};

Poly random_poly(std::mt19937_64& g, int deg)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Poly p;
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) p[{a, b}] = {U(g), U(g)};
    return p;
}

PolyOp random_op(std::mt19937_64& g, int order)
{
    PolyOp op;
    for (int a = 0; a <= order; ++a)
        for (int b = 0; a + b <= order; ++b) op.terms.push_back({{a, b}, random_poly(g, 2)});
    return op;
}

gsov::TestFunction poly_test(const Poly& p)
{
    return [p](std::span<const Jet> x) {
        Jet s(x[0].layout_ptr(), 0.0);
        for (auto [e, v] : p) s += gsov::pow(x[0], e.first) * gsov::pow(x[1], e.second) * v;
        return s;
    };
}

}  // namespace

TEST_CASE("Leibniz rule and identities")
{
    const auto dx = DifferentialOperator::partial(X1, 0);
    const auto x = DifferentialOperator::coordinate(X1, 0);
    const auto id = DifferentialOperator::identity(X1);
    gsov::EqualOptions opt;
    opt.tol = 1e-13;
    CHECK(gsov::op_equal(dx * x, x * dx + id, disk(1), opt).pass);
    CHECK(gsov::op_equal(id * id, id, disk(1), opt).pass);
    CHECK(gsov::op_equal(gsov::op_commutator(dx, x), id, disk(1), opt).pass);

    // (u d^2) o u = u^2 d^2 + 2 u d
    const auto ud2 = x * dx * dx;
    const auto rhs = x * x * dx * dx + cplx{2.0} * x * dx;
    CHECK(gsov::op_equal(ud2 * x, rhs, disk(1), opt).pass);
    for (int k = 0; k <= 4; ++k) {
        gsov::TestFunction m = [k](std::span<const Jet> v) { return gsov::pow(v[0], k); };
        const Point p{cplx{0.7, -0.2}};
        CHECK(near(gsov::op_apply(ud2 * x, m, p), gsov::op_apply(rhs, m, p)));
    }
}

TEST_CASE("op_apply values")
{
    const auto x = DifferentialOperator::coordinate(X1, 0);
    const auto dx = DifferentialOperator::partial(X1, 0);
    gsov::TestFunction sq = [](std::span<const Jet> v) { return v[0] * v[0]; };
    CHECK(near(gsov::op_apply(x * dx, sq, Point{3.0}), 18.0));
}

TEST_CASE("barred sl2 triple")
{
    const cplx nu{0.3, -0.7};
    const auto u = DifferentialOperator::coordinate(X1, 0);
    const auto d = DifferentialOperator::partial(X1, 0);
    const auto one = DifferentialOperator::identity(X1);
    const auto e = -(u * d * d + cplx{2.0} * (nu + 1.0) * d);
    const auto f = u;
    const auto h = cplx{-2.0} * (u * d + (nu + 1.0) * one);
    gsov::EqualOptions opt;
    opt.tol = 1e-12;
    CHECK(gsov::op_equal(gsov::op_commutator(e, f), h, disk(1), opt).pass);
    CHECK(gsov::op_equal(gsov::op_commutator(h, e), cplx{2.0} * e, disk(1), opt).pass);
    CHECK(gsov::op_equal(gsov::op_commutator(h, f), cplx{-2.0} * f, disk(1), opt).pass);
    // Euler operator on u^n
    gsov::TestFunction un = [](std::span<const Jet> v) { return gsov::pow(v[0], 3); };
    const Point p{cplx{0.4, 0.9}};
    CHECK(near(gsov::op_apply(h, un, p), -2.0 * (3.0 + nu + 1.0) * std::pow(p[0], 3)));
}

TEST_CASE("composition against brute-force polynomial calculus")
{
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const PolyOp a = random_op(g, 1 + trial % 3);
        const PolyOp b = random_op(g, 3 - trial % 3);
        const auto ab = gsov::op_compose(a.to_op(), b.to_op());
        for (int s = 0; s < 3; ++s) {
            const Poly f = random_poly(g, 4);
            const Point x{cplx{U(g), U(g)}, cplx{U(g), U(g)}};
            const cplx brute = poly_eval(a.apply(b.apply(f)), x);
            CHECK(near(gsov::op_apply(ab, poly_test(f), x), brute, 1e-10));
        }
    }
}

TEST_CASE("Jacobi identity and antisymmetry")
{
    std::mt19937_64 g(9);
    for (int trial = 0; trial < 3; ++trial) {
        const auto a = random_op(g, 2).to_op();
        const auto b = random_op(g, 2).to_op();
        const auto c = random_op(g, 2).to_op();
        using gsov::op_commutator;
        const auto jac = op_commutator(a, op_commutator(b, c)) + op_commutator(b, op_commutator(c, a)) +
                         op_commutator(c, op_commutator(a, b));
        gsov::EqualOptions opt;
        opt.tol = 1e-10;
        opt.samples = 5;
        CHECK(gsov::op_equal(jac, DifferentialOperator::zero(XY), disk(2), opt).pass);
        CHECK(gsov::op_equal(op_commutator(a, a), DifferentialOperator::zero(XY), disk(2), opt).pass);
    }
}

TEST_CASE("planted discrepancy is detected")
{
    const auto d = DifferentialOperator::partial(X1, 0);
    const auto x = DifferentialOperator::coordinate(X1, 0);
    const auto b = d * d + cplx{1e-6} * x;
    gsov::EqualOptions opt;
    opt.tol = 1e-8;
    auto rep = gsov::op_equal(d * d, b, disk(1), opt);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_residual > 1e-8);
    CHECK(gsov::op_equal(d * d, d * d, disk(1), opt).max_residual == 0.0);
    CHECK_THROWS_AS(gsov::op_compose(d * d * d * d * d, d * d * d * d), gsov::ParameterError);
    CHECK_THROWS_AS(gsov::op_compose(d, DifferentialOperator::partial(XY, 0)), gsov::ParameterError);
}

TEST_CASE("pullback through charts")
{
    // x d/dx under y = x^2 becomes 2 y d/dy
    gsov::CoordinateMap sq;
    sq.new_vars = {"y"};
    sq.old_vars = X1;
    sq.param = [](std::span<const Jet> y) { return std::vector<Jet>{gsov::sqrt(y[0])}; };
    const auto x = DifferentialOperator::coordinate(X1, 0);
    const auto dx = DifferentialOperator::partial(X1, 0);
    const auto y = DifferentialOperator::coordinate({"y"}, 0);
    const auto dy = DifferentialOperator::partial({"y"}, 0);
    gsov::EqualOptions opt;
    opt.tol = 1e-12;
    auto right_half = [](std::mt19937_64& g) {
        std::uniform_real_distribution<double> U(0.2, 2.0), V(-1.0, 1.0);
        return Point{cplx{U(g), V(g)}};
    };
    CHECK(gsov::op_equal(gsov::op_pullback(x * dx, sq), cplx{2.0} * y * dy, right_half, opt).pass);

    // identity chart
    gsov::CoordinateMap idm;
    idm.new_vars = XY;
    idm.old_vars = XY;
    idm.param = [](std::span<const Jet> v) { return std::vector<Jet>(v.begin(), v.end()); };
    std::mt19937_64 g(2);
    const auto a = random_op(g, 2).to_op();
    CHECK(gsov::op_equal(gsov::op_pullback(a, idm), a, disk(2), opt).pass);

    // polar-like chart; pullback respects composition
    gsov::CoordinateMap pol;
    pol.new_vars = {"r", "s"};
    pol.old_vars = XY;
    pol.param = [](std::span<const Jet> v) {
        return std::vector<Jet>{v[0] * gsov::exp(v[1]), v[0] * v[0] + v[1]};
    };
    const auto b = random_op(g, 2).to_op();
    const auto lhs = gsov::op_pullback(a * b, pol);
    const auto rhs = gsov::op_pullback(a, pol) * gsov::op_pullback(b, pol);
    opt.tol = 1e-10;
    CHECK(gsov::op_equal(lhs, rhs, disk(2, 1.0), opt).pass);

    // action on pulled-back test functions
    const Poly f = random_poly(g, 3);
    gsov::TestFunction fp = [&](std::span<const Jet> v) {
        const auto old = pol.param(v);
        return poly_test(f)(old);
    };
    const Point p{cplx{0.8, 0.1}, cplx{-0.3, 0.5}};
    const auto xo = pol.old_point(p);
    CHECK(near(gsov::op_apply(gsov::op_pullback(a, pol), fp, p), gsov::op_apply(a, poly_test(f), Point(xo)),
               1e-10));
}
