#include "gsov/special_functions.hpp"

#include <cmath>

namespace gsov {

EllipticParams EllipticParams::make(cplx q, double tol)
{
    EllipticParams p;
    p.q = q;
    p.tol = tol;
    const double aq = std::abs(q);
    if (!(aq < 1.0)) throw ParameterError("elliptic nome must satisfy |q| < 1");
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
    if (aq == 0.0) {
        p.trunc = 1;
        return p;
    }
    int m = 1;
    double pw = aq;
    while (!(pw < tol)) {
        pw *= aq;
        ++m;
        if (m > 100000) throw ParameterError("nome too close to the unit circle");
    }
    p.trunc = m;
    return p;
}

void EllipticParams::validate() const
{
    if (!(std::abs(q) < 1.0)) throw ParameterError("elliptic nome must satisfy |q| < 1");
    if (trunc < 1) throw ParameterError("truncation order must be >= 1");
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
}

AnnulusPoint canonicalize(cplx z, const EllipticParams& p)
{
    detail::check_nonzero(z, "canonicalize");
    AnnulusPoint a;
    a.shift = detail::annulus_shift(z, p);
    a.z = a.shift == 0 ? z : z / std::pow(p.q, a.shift);
    a.canonical = a.shift == 0;
    return a;
}

double lattice_distance(cplx z, const EllipticParams& p)
{
    detail::check_nonzero(z, "lattice_distance");
    const AnnulusPoint a = canonicalize(z, p);
    // y sits in |q| < |y| <= 1, so the nearest lattice points are 1 and q.
    double d = std::abs(std::log(a.z));
    if (std::abs(p.q) > 0.0) d = std::min(d, std::abs(std::log(a.z / p.q)));
    return d;
}

cplx kernel_normalization(const EllipticParams& p)
{
    p.validate();
    cplx r = 1.0;
    cplx qi = 1.0;
    for (int i = 1; i <= p.trunc; ++i) {
        qi *= p.q;
        if (qi == cplx{}) break;
        r *= (1.0 - qi) * (1.0 - qi);
    }
    return r;
}

Jet theta(const Jet& z, const EllipticParams& p)
{
    p.validate();
    return lift_univariate(z, [&](const Jet& s) { return detail::theta_impl(s, p); });
}

Jet theta_log_deriv(const Jet& z, const EllipticParams& p)
{
    p.validate();
    return lift_univariate(z, [&](const Jet& s) { return detail::dlog_impl(s, p); });
}

Jet weierstrass_p(const Jet& z, const EllipticParams& p)
{
    p.validate();
    return lift_univariate(z, [&](const Jet& s) { return detail::wp_impl(s, p); });
}

}  // namespace gsov
