#include "gsov/separation_of_variables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace gsov {

namespace {

/// Sums of operators weighted by chart functions.
DifferentialOperator weighted_sum(const std::vector<CoeffFn>& k, const std::vector<DifferentialOperator>& ops)
{
    DifferentialOperator out;
    for (std::size_t a = 0; a < ops.size(); ++a) {
        auto t = op_scale(k[a], ops[a]);
        out = out.empty() ? t : out + t;
    }
    return out;
}

DifferentialOperator mult(const std::vector<std::string>& vars, CoeffFn f)
{
    return DifferentialOperator::multiplication(vars, std::move(f));
}

double min_gap(const std::vector<cplx>& pts)
{
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) g = std::min(g, std::abs(pts[i] - pts[j]));
    return g;
}

}  // namespace

void sort_points(std::vector<cplx>& w)
{
    std::sort(w.begin(), w.end(), [](cplx a, cplx b) {
        const double aa = std::arg(a), ab = std::arg(b);
        if (std::abs(aa - ab) > 1e-9) return aa < ab;
        return std::abs(a) < std::abs(b);
    });
}

std::vector<cplx> project_sum_zero(std::vector<cplx> u)
{
    if (u.empty()) return u;
    const cplx mean = std::accumulate(u.begin(), u.end(), cplx{}) / static_cast<double>(u.size());
    for (auto& x : u) x -= mean;
    return u;
}

GaudinModel with_synthetic_mu(GaudinModel m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G(0.0, 1.0);
    const int N = m.N;
    Eigen::VectorXcd mu(N);
    for (int a = 0; a < N; ++a) mu(a) = cplx{G(rng), G(rng)};
    const int rows = m.is_elliptic() ? 1 : 3;
    if (N < rows) throw ParameterError("too few sites for the eigenvalue constraints");
    Eigen::MatrixXcd A(rows, N);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(rows);
    for (int a = 0; a < N; ++a) {
        A(0, a) = 1.0;
        if (rows == 3) {
            const cplx c = 2.0 * m.lambda[a] * (m.lambda[a] - 1.0);
            A(1, a) = m.z[a];
            A(2, a) = m.z[a] * m.z[a];
            b(1) -= c;
            b(2) -= 2.0 * c * m.z[a];
        }
    }
    // minimal correction onto {A mu = b}
    const Eigen::VectorXcd r = b - A * mu;
    mu += A.adjoint() * (A * A.adjoint()).ldlt().solve(r);
    m.mu = std::vector<cplx>(mu.data(), mu.data() + N);
    if (m.elliptic) m.elliptic->mu0 = cplx{G(rng), G(rng)};
    return m;
}

bool incidence_check(const std::vector<cplx>& u, const std::vector<cplx>& t, double tol)
{
    if (u.size() != t.size()) throw ParameterError("u and t must have the same length");
    cplx s{};
    for (std::size_t a = 0; a < u.size(); ++a) s += u[a] * t[a];
    return std::abs(s) < tol;
}

// ---------------------------------------------------------------- rational

std::vector<cplx> numerator_polynomial(const std::vector<cplx>& u, const std::vector<cplx>& z)
{
    const std::size_t N = z.size();
    if (u.size() != N) throw ParameterError("u must have N entries");
    std::vector<cplx> P(N, cplx{});
    for (std::size_t a = 0; a < N; ++a) {
        std::vector<cplx> prod{1.0};
        for (std::size_t b = 0; b < N; ++b) {
            if (b == a) continue;
            std::vector<cplx> next(prod.size() + 1, cplx{});
            for (std::size_t k = 0; k < prod.size(); ++k) {
                next[k + 1] += prod[k];
                next[k] -= z[b] * prod[k];
            }
            prod = std::move(next);
        }
        for (std::size_t k = 0; k < prod.size(); ++k) P[k] += u[a] * prod[k];
    }
    return P;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& c)
{
    int deg = static_cast<int>(c.size()) - 1;
    while (deg > 0 && c[deg] == cplx{}) --deg;
    if (deg <= 0) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int k = 0; k < deg; ++k) comp(0, k) = -c[deg - 1 - k] / c[deg];
    for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalBreakdown("companion eigenvalues did not converge");
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + deg);
    for (auto& x : r) {
        for (int it = 0; it < 3; ++it) {
            cplx p = c[deg], dp{};
            for (int k = deg - 1; k >= 0; --k) {
                dp = dp * x + p;
                p = p * x + c[k];
            }
            if (dp == cplx{}) break;
            const cplx step = p / dp;
            if (!std::isfinite(std::abs(step))) break;
            x -= step;
        }
    }
    return r;
}

SeparatedCoordinates rational_u_to_w(const std::vector<cplx>& u, const GaudinModel& m, double tol)
{
    const int N = m.N;
    if (static_cast<int>(u.size()) != N) throw ParameterError("u must have N entries");
    double scale = 0.0;
    cplx sum{};
    for (const auto& x : u) {
        scale = std::max(scale, std::abs(x));
        sum += x;
    }
    if (scale == 0.0) throw DomainError("u = 0 has no separated coordinates");
    if (std::abs(sum) > tol * scale * N) throw DomainError("sum u_a = 0 required on the separation locus");

    const auto P = numerator_polynomial(u, m.z);
    double zs = 1.0;
    for (const auto& z : m.z) zs = std::max(zs, std::abs(z));
    int deg = N - 2;
    // leading coefficients below rounding relative to the polynomial size are zeros at infinity
    double pscale = 0.0;
    for (int k = 0; k <= N - 2; ++k) pscale = std::max(pscale, std::abs(P[k]) * std::pow(zs, k));
    while (deg > 0 && std::abs(P[deg]) * std::pow(zs, deg) < tol * pscale) --deg;

    SeparatedCoordinates s;
    s.kind = SovCase::Rational;
    s.inf_mult = N - 2 - deg;
    s.C = P[deg];
    s.w = polynomial_roots(std::vector<cplx>(P.begin(), P.begin() + deg + 1));
    sort_points(s.w);
    for (int i = 0; i < static_cast<int>(s.w.size()); ++i)
        for (const auto& z : m.z)
            if (std::abs(s.w[i] - z) < 1e-8 * zs) s.touching.push_back(i);
    s.coincident = s.w.size() > 1 && min_gap(s.w) < 1e-8 * zs;
    return s;
}

std::vector<cplx> rational_w_to_u(const SeparatedCoordinates& s, const GaudinModel& m)
{
    if (s.kind != SovCase::Rational) throw ParameterError("rational coordinates expected");
    if (s.inf_mult != 0) throw DomainError("points at infinity are outside the chart");
    if (static_cast<int>(s.w.size()) != m.N - 2) throw ParameterError("expected N - 2 separated points");
    std::vector<cplx> u(m.N);
    for (int a = 0; a < m.N; ++a) {
        cplx num = s.C, den = 1.0;
        for (const auto& w : s.w) num *= m.z[a] - w;
        for (int b = 0; b < m.N; ++b)
            if (b != a) den *= m.z[a] - m.z[b];
        if (num == cplx{}) throw PoleError("separated point touches a marked point");
        u[a] = num / den;
    }
    double scale = 0.0;
    cplx sum{};
    for (const auto& x : u) {
        scale = std::max(scale, std::abs(x));
        sum += x;
    }
    if (std::abs(sum) > 1e-9 * scale * m.N) throw NumericalBreakdown("sum u_a = 0 failed after inversion");
    return u;
}

std::vector<std::string> rational_u_vars(int N)
{
    std::vector<std::string> v;
    for (int a = 0; a < N; ++a) v.push_back("u" + std::to_string(a + 1));
    return v;
}

std::vector<std::string> rational_y_vars(int N)
{
    std::vector<std::string> v{"C"};
    for (int i = 0; i + 2 < N; ++i) v.push_back("w" + std::to_string(i + 1));
    v.push_back("eps");
    return v;
}

std::shared_ptr<const CoordinateMap> sov_jacobian_rational(const GaudinModel& m)
{
    auto map = std::make_shared<CoordinateMap>();
    map->new_vars = rational_y_vars(m.N);
    map->old_vars = rational_u_vars(m.N);
    const auto z = m.z;
    const int N = m.N;
    map->param = [z, N](std::span<const Jet> y) {
        std::vector<Jet> u;
        for (int a = 0; a < N; ++a) {
            cplx den = 1.0;
            for (int b = 0; b < N; ++b)
                if (b != a) den *= z[a] - z[b];
            Jet v = y[0] * (1.0 - y[N - 1] * z[a]);
            for (int j = 1; j + 1 < N; ++j) v = v * (z[a] - y[j]);
            u.push_back(v / den);
        }
        return u;
    };
    map->inverse = [m](const Point& u) {
        // finite zeros from the degree N-2 part, polished on the full numerator;
        // then C(1 - eps z) prod (z - w) matched on the two leading coefficients
        const int N = m.N;
        const auto P = numerator_polynomial(u, m.z);
        std::vector<cplx> w = polynomial_roots(std::vector<cplx>(P.begin(), P.end() - 1));
        for (auto& x : w) x = rational_track_zero(u, m, x);
        sort_points(w);
        cplx e1{};
        for (const auto& x : w) e1 += x;
        const cplx C = P[N - 2] + P[N - 1] * e1;
        Point y{C};
        y.insert(y.end(), w.begin(), w.end());
        y.push_back(-P[N - 1] / C);
        return y;
    };
    return map;
}

Point rational_chart_point(const SeparatedCoordinates& s)
{
    if (!s.strict()) throw DomainError("separated coordinates outside the strict chart");
    Point y{s.C};
    y.insert(y.end(), s.w.begin(), s.w.end());
    y.push_back(0.0);
    return y;
}

cplx rational_track_zero(const std::vector<cplx>& u, const GaudinModel& m, cplx w_ref)
{
    // Newton on sum u_a / (z - z_a)
    cplx w = w_ref;
    for (int it = 0; it < 50; ++it) {
        cplx f{}, df{};
        for (int a = 0; a < m.N; ++a) {
            const cplx r = 1.0 / (w - m.z[a]);
            f += u[a] * r;
            df -= u[a] * r * r;
        }
        const cplx step = f / df;
        w -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// ---------------------------------------------------------------- Radon side

Sl2Triple radon_generators(const std::vector<std::string>& vars, int idx, cplx nu)
{
    const auto u = DifferentialOperator::coordinate(vars, idx);
    const auto d = DifferentialOperator::partial(vars, idx);
    const auto id = DifferentialOperator::identity(vars);
    Sl2Triple s;
    s.e = -(u * (d * d) + (2.0 * (nu + 1.0)) * d);
    s.f = u;
    s.h = cplx{-2.0} * (u * d + (nu + 1.0) * id);
    return s;
}

cplx radon_parameter(cplx lambda, WeightReading r) { return r == WeightReading::Dual ? -lambda : lambda; }

RationalSov make_rational_sov(const GaudinModel& m, WeightReading reading)
{
    if (m.is_elliptic()) throw ParameterError("rational model expected");
    if (m.N < 3) throw ParameterError("separation needs N >= 3 (no finite separated points for N = 2)");
    RationalSov s;
    s.model = m;
    s.chart = sov_jacobian_rational(m);
    const auto vars = rational_u_vars(m.N);
    for (int a = 0; a < m.N; ++a) {
        s.nu.push_back(radon_parameter(m.lambda[a], reading));
        s.bar.push_back(radon_generators(vars, a, s.nu.back()));
    }
    s.L = rational_site_hamiltonians(s.bar, m.z);
    return s;
}

namespace {

std::vector<CoeffFn> rational_kernels(const RationalSov& sov, int i, int power = 1)
{
    std::vector<CoeffFn> k;
    for (const auto& z : sov.model.z) {
        k.push_back([i, z, power](std::span<const Jet> y) { return pow(1.0 / (y[1 + i] - z), power); });
    }
    return k;
}

DifferentialOperator pulled(const DifferentialOperator& a, const RationalSov& sov) { return op_pullback(a, sov.chart); }

}  // namespace

CoeffFn rational_A(const RationalSov& sov, int i)
{
    const auto z = sov.model.z;
    const auto nu = sov.nu;
    return [i, z, nu](std::span<const Jet> y) {
        Jet a = Jet(y[0].layout_ptr(), 0.0);
        for (std::size_t k = 0; k < z.size(); ++k) a = a + (nu[k] + 1.0) / (y[1 + i] - z[k]);
        return a;
    };
}

HatOperators build_hat_operators_rational(const RationalSov& sov, int i)
{
    const auto& m = sov.model;
    if (i < 0 || i >= m.N - 2) throw ParameterError("separated point index out of range");
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const auto k = rational_kernels(sov, i);
    std::vector<DifferentialOperator> e, f, h, L;
    const auto uvars = rational_u_vars(m.N);
    for (int a = 0; a < m.N; ++a) {
        e.push_back(pulled(sov.bar[a].e, sov));
        f.push_back(pulled(sov.bar[a].f, sov));
        h.push_back(pulled(sov.bar[a].h, sov));
        L.push_back(pulled(sov.L[a] - DifferentialOperator::constant(uvars, (*m.mu)[a]), sov));
    }
    return {weighted_sum(k, e), weighted_sum(k, f), weighted_sum(k, h), weighted_sum(k, L)};
}

namespace {

Sampler rational_locus_sampler(const GaudinModel& m)
{
    double R = 1.0;
    for (const auto& z : m.z) R = std::max(R, std::abs(z));
    const auto z = m.z;
    const int N = m.N;
    return [z, N, R](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Point y{std::polar(0.5 + U(rng), 2 * M_PI * U(rng))};
            std::vector<cplx> pts = z;
            bool ok = true;
            for (int j = 0; j + 2 < N; ++j) {
                const cplx w = std::polar(1.5 * R * std::sqrt(U(rng)), 2 * M_PI * U(rng));
                for (const auto& p : pts)
                    if (std::abs(w - p) < 0.15 * R) ok = false;
                pts.push_back(w);
                y.push_back(w);
            }
            if (!ok) continue;
            y.push_back(0.0);
            return y;
        }
        throw NumericalBreakdown("could not sample separated points");
    };
}

}  // namespace

std::vector<VerificationReport> verify_rational_separation(const GaudinModel& m, const SovOptions& opt)
{
    m.validate();
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const RationalSov sov = make_rational_sov(m, opt.reading);
    const auto yv = rational_y_vars(m.N);
    const auto sampler = rational_locus_sampler(m);
    EqualOptions eo;
    eo.samples = opt.trials;
    eo.tol = opt.tol;
    eo.seed = opt.seed;

    std::vector<VerificationReport> out;
    for (int i = 0; i + 2 < m.N; ++i) {
        const auto hat = build_hat_operators_rational(sov, i);
        const auto k1 = rational_kernels(sov, i, 1);
        const auto k2 = rational_kernels(sov, i, 2);
        const auto mu = *m.mu;
        const auto lam = m.lambda;
        CoeffFn constant = [k1, k2, mu, lam](std::span<const Jet> y) {
            Jet c = Jet(y[0].layout_ptr(), 0.0);
            for (std::size_t a = 0; a < mu.size(); ++a)
                c = c - mu[a] * k1[a](y) - 2.0 * lam[a] * (lam[a] - 1.0) * k2[a](y);
            return c;
        };
        const CoeffFn A0 = rational_A(sov, i);
        const double sgn = opt.flip_A ? -1.0 : 1.0;
        CoeffFn A = [A0, sgn](std::span<const Jet> y) { return sgn * A0(y); };
        const std::string tag = "[w" + std::to_string(i + 1) + "]";

        const auto rhs_a = hat.e * hat.f + hat.f * hat.e + cplx{0.5} * (hat.h * hat.h) + mult(yv, constant);
        out.push_back(op_equal(hat.L, rhs_a, sampler, eo, "rational (a) L = ef + fe + h^2/2 + const " + tag));

        out.push_back(op_equal(hat.f, DifferentialOperator::zero(yv), sampler, eo, "rational (b) f = 0 " + tag));

        const auto D = DifferentialOperator::partial(yv, 1 + i) + mult(yv, A);
        out.push_back(op_equal(hat.h, cplx{-2.0} * D, sampler, eo, "rational (c) h = -2 (d_w + A) " + tag));

        const auto rhs_d = cplx{2.0} * (D * D) + mult(yv, constant);
        out.push_back(op_equal(hat.L, rhs_d, sampler, eo, "rational (d) L = 2 (d_w + A)^2 + const " + tag));
    }
    return out;
}

// ---------------------------------------------------------------- elliptic

cplx elliptic_section(const std::vector<cplx>& u, cplx s, const GaudinModel& m, cplx z)
{
    const auto p = m.params();
    cplx F{};
    for (int a = 0; a < m.N; ++a) F += u[a] * lame_kernel(s, z / m.z[a], p);
    return F;
}

namespace {

/// z F'(z) / F(z) for the section F.
cplx section_dlog(const std::vector<cplx>& u, cplx s, const GaudinModel& m, const EllipticParams& p, cplx z,
                  cplx* F_out = nullptr)
{
    cplx F{}, zF{};
    for (int a = 0; a < m.N; ++a) {
        const cplx x = z / m.z[a];
        const cplx k = lame_kernel(s, x, p);
        F += u[a] * k;
        zF += u[a] * k * (theta_log_deriv(s * x, p) - theta_log_deriv(x, p));
    }
    if (F_out) *F_out = F;
    return zF / F;
}

/// q^m with t2 prod w = q^m prod z; throws DomainError when no integer fits.
int abel_shift(cplx t2, const std::vector<cplx>& w, const GaudinModel& m, const EllipticParams& p, double tol)
{
    cplx X = t2;
    for (const auto& x : w) X *= x;
    for (const auto& z : m.z) X /= z;
    const double lq = std::log(std::abs(p.q));
    const int k = static_cast<int>(std::lround(std::log(std::abs(X)) / lq));
    const cplx r = X * std::pow(p.q, -k);
    if (!(std::abs(r - 1.0) < tol)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "t2 prod w = prod z mod q^Z violated (residual %.3e)", std::abs(r - 1.0));
        throw DomainError(buf);
    }
    return k;
}

/// The shift goes to the first point in sort order, so the result does not
/// depend on how w is listed.
std::vector<cplx> shifted_representatives(const std::vector<cplx>& w, int shift, const EllipticParams& p)
{
    auto r = w;
    if (r.empty()) return r;
    auto sorted = w;
    sort_points(sorted);
    const auto it = std::find(r.begin(), r.end(), sorted.front());
    *it *= std::pow(p.q, -shift);
    return r;
}

cplx residue_scale(const std::vector<cplx>& u, const std::vector<cplx>& reps, const GaudinModel& m,
                   const EllipticParams& p)
{
    // C from the largest residue
    int a = 0;
    for (int b = 1; b < m.N; ++b)
        if (std::abs(u[b]) > std::abs(u[a])) a = b;
    cplx num = u[a], den = 1.0;
    for (int b = 0; b < m.N; ++b)
        if (b != a) num *= theta(m.z[a] / m.z[b], p);
    for (const auto& w : reps) den *= theta(m.z[a] / w, p);
    return num / den;
}

}  // namespace

cplx elliptic_track_zero(const std::vector<cplx>& u, cplx s, const GaudinModel& m, cplx w_ref)
{
    const auto p = m.params();
    cplx w = w_ref;
    for (int it = 0; it < 60; ++it) {
        cplx F;
        const cplx d = section_dlog(u, s, m, p, w, &F);
        const cplx step = 1.0 / d;  // Newton in ln w
        w *= std::exp(-step);
        if (std::abs(step) < 1e-15) break;
    }
    return w;
}

SeparatedCoordinates elliptic_u_to_w(const std::vector<cplx>& u, cplx t2, const GaudinModel& m,
                                     const EllipticRootOptions& opt)
{
    if (!m.is_elliptic()) throw ParameterError("elliptic model expected");
    const auto p = m.params();
    const int N = m.N;
    if (static_cast<int>(u.size()) != N) throw ParameterError("u must have N entries");
    double us = 0.0;
    for (const auto& x : u) us = std::max(us, std::abs(x));
    if (us == 0.0) throw DomainError("u = 0 has no separated coordinates");
    if (std::abs(p.q) == 0.0) throw ParameterError("elliptic separation needs q != 0");
    if (lattice_distance(t2, p) < 1e-8) throw PoleError("t2 lies on q^Z");

    const double L = -std::log(std::abs(p.q));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    for (int attempt = 0; attempt < opt.max_seam_tries; ++attempt) {
        // contours |z| = exp(c) and exp(c - L), seam rotated at random
        const double c = (U(rng) - 0.5) * 0.9 * L;
        std::vector<cplx> poles;
        bool clear = true;
        for (const auto& z : m.z) {
            const double x = std::log(std::abs(z)) - c;
            const double n = std::ceil(x / L);
            const double off = x - n * L;  // in (-L, 0]
            if (off > -0.03 * L || off < -0.97 * L) clear = false;
            poles.push_back(z * std::pow(p.q, n));
        }
        if (!clear) continue;

        // power sums of the zeros, trapezoid rule refined until stable
        auto power_sums = [&](int M, bool& ok) {
            std::vector<cplx> ps(N + 1, cplx{});
            double fmin = std::numeric_limits<double>::infinity(), fmax = 0.0;
            for (int side = 0; side < 2; ++side) {
                const double r = std::exp(side == 0 ? c : c - L);
                const double sign = side == 0 ? 1.0 : -1.0;
                for (int j = 0; j < M; ++j) {
                    const cplx z = std::polar(r, 2 * M_PI * (j + 0.5) / M);
                    cplx F;
                    const cplx d = section_dlog(u, t2, m, p, z, &F);
                    fmin = std::min(fmin, std::abs(F));
                    fmax = std::max(fmax, std::abs(F));
                    cplx zk = 1.0;
                    for (int k = 0; k <= N; ++k) {
                        ps[k] += sign * zk * d / double(M);
                        zk *= z;
                    }
                }
            }
            ok = fmin > 1e-9 * fmax;
            for (int k = 0; k <= N; ++k)
                for (const auto& pl : poles) ps[k] += std::pow(pl, k);
            return ps;
        };
        bool ok = true;
        int M = 128;
        auto ps = power_sums(M, ok);
        bool converged = false;
        while (ok && M <= 16384) {
            M *= 2;
            auto next = power_sums(M, ok);
            double diff = 0.0, scale = 1.0;
            for (int k = 0; k <= N; ++k) {
                diff = std::max(diff, std::abs(next[k] - ps[k]));
                scale = std::max(scale, std::abs(next[k]));
            }
            ps = std::move(next);
            if (diff < 1e-12 * scale) {
                converged = true;
                break;
            }
        }
        if (!ok || !converged) continue;
        if (std::abs(ps[0] - double(N)) > 1e-6) throw NumericalBreakdown("zero count differs from N");

        // Newton identities: elementary symmetric functions of the zeros
        std::vector<cplx> e(N + 1, cplx{});
        e[0] = 1.0;
        for (int k = 1; k <= N; ++k) {
            cplx acc{};
            for (int i = 1; i <= k; ++i) acc += (i % 2 == 1 ? 1.0 : -1.0) * e[k - i] * ps[i];
            e[k] = acc / double(k);
        }
        std::vector<cplx> poly(N + 1);
        for (int k = 0; k <= N; ++k) poly[N - k] = (k % 2 == 0 ? 1.0 : -1.0) * e[k];
        auto w = polynomial_roots(poly);
        for (auto& x : w) x = canonicalize(elliptic_track_zero(u, t2, m, x), p).z;
        sort_points(w);

        SeparatedCoordinates s;
        s.kind = SovCase::Elliptic;
        s.t2 = t2;
        s.w = w;
        s.abel_shift = abel_shift(t2, w, m, p, 1e-6);
        s.C = residue_scale(u, shifted_representatives(w, s.abel_shift, p), m, p);
        for (int i = 0; i < N; ++i)
            for (const auto& z : m.z)
                if (lattice_distance(w[i] / z, p) < 1e-8) s.touching.push_back(i);
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (lattice_distance(w[i] / w[j], p) < 1e-8) s.coincident = true;
        return s;
    }
    throw NumericalBreakdown("no clean seam for the zero count");
}

std::vector<cplx> chart_representatives(const SeparatedCoordinates& s, const GaudinModel& m, double tol)
{
    const auto p = m.params();
    return shifted_representatives(s.w, abel_shift(s.t2, s.w, m, p, tol), p);
}

std::vector<cplx> elliptic_w_to_u(const SeparatedCoordinates& s, const GaudinModel& m, double tol)
{
    if (s.kind != SovCase::Elliptic) throw ParameterError("elliptic coordinates expected");
    if (static_cast<int>(s.w.size()) != m.N) throw ParameterError("expected N separated points");
    const auto p = m.params();
    const int k = abel_shift(s.t2, s.w, m, p, tol);
    const auto reps = shifted_representatives(s.w, k, p);
    std::vector<cplx> u(m.N);
    for (int a = 0; a < m.N; ++a) {
        cplx num = s.C, den = 1.0;
        for (const auto& w : reps) num *= theta(m.z[a] / w, p);
        for (int b = 0; b < m.N; ++b)
            if (b != a) den *= theta(m.z[a] / m.z[b], p);
        u[a] = num / den;
    }
    return u;
}

std::vector<std::string> elliptic_u_vars(int N)
{
    std::vector<std::string> v{"s"};
    for (int a = 0; a < N; ++a) v.push_back("u" + std::to_string(a + 1));
    return v;
}

std::vector<std::string> elliptic_y_vars(int N)
{
    std::vector<std::string> v{"C"};
    for (int i = 0; i < N; ++i) v.push_back("w" + std::to_string(i + 1));
    return v;
}

std::shared_ptr<const CoordinateMap> sov_jacobian_elliptic(const GaudinModel& m)
{
    const auto p = m.params();
    auto map = std::make_shared<CoordinateMap>();
    map->new_vars = elliptic_y_vars(m.N);
    map->old_vars = elliptic_u_vars(m.N);
    const auto z = m.z;
    const int N = m.N;
    map->param = [z, N, p](std::span<const Jet> y) {
        std::vector<Jet> out;
        Jet s = Jet(y[0].layout_ptr(), 1.0);
        for (int a = 0; a < N; ++a) s = s * z[a] / y[1 + a];
        out.push_back(s);
        for (int a = 0; a < N; ++a) {
            cplx den = 1.0;
            for (int b = 0; b < N; ++b)
                if (b != a) den *= theta(z[a] / z[b], p);
            Jet v = y[0] / den;
            for (int i = 0; i < N; ++i) v = v * theta(Jet(z[a] / y[1 + i]), p);
            out.push_back(v);
        }
        return out;
    };
    map->inverse = [m](const Point& x) {
        const std::vector<cplx> u(x.begin() + 1, x.end());
        const auto s = elliptic_u_to_w(u, x[0], m);
        return elliptic_chart_point(s, m);
    };
    return map;
}

Point elliptic_chart_point(const SeparatedCoordinates& s, const GaudinModel& m)
{
    if (!s.strict()) throw DomainError("separated coordinates outside the strict chart");
    const auto reps = chart_representatives(s, m);
    Point y{s.C};
    y.insert(y.end(), reps.begin(), reps.end());
    return y;
}

// ---------------------------------------------------------------- elliptic chain

EllipticSov make_elliptic_sov(const GaudinModel& m, WeightReading reading, std::uint64_t seed)
{
    if (!m.is_elliptic()) throw ParameterError("elliptic model expected");
    EllipticSov s;
    s.model = m;
    s.params = m.params();
    s.chart = sov_jacobian_elliptic(m);
    const auto vars = elliptic_u_vars(m.N);
    for (int a = 0; a < m.N; ++a) {
        s.nu.push_back(radon_parameter(m.lambda[a], reading));
        s.bar.push_back(radon_generators(vars, a + 1, s.nu.back()));
    }
    s.H = elliptic_hamiltonians(s.bar, 0, m.z, s.params, seed);
    return s;
}

cplx twist_exponent(const EllipticSov& sov)
{
    cplx L{};
    for (const auto& n : sov.nu) L += n + 1.0;
    return L;
}

namespace {

Jet chart_s(std::span<const Jet> y, const std::vector<cplx>& z)
{
    Jet s = Jet(y[0].layout_ptr(), 1.0);
    for (std::size_t a = 0; a < z.size(); ++a) s = s * z[a] / y[1 + a];
    return s;
}

}  // namespace

EllipticChain build_elliptic_chain(const EllipticSov& sov, int i)
{
    const auto& m = sov.model;
    const int N = m.N;
    if (i < 0 || i >= N) throw ParameterError("separated point index out of range");
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const auto p = sov.params;
    const auto z = m.z;
    const cplx phi = kernel_normalization(p);
    const auto yv = elliptic_y_vars(N);
    const auto uv = elliptic_u_vars(N);
    auto P = [&](const DifferentialOperator& a) { return op_pullback(a, sov.chart); };

    std::vector<CoeffFn> ke, kf, g, wp, g2;
    for (int a = 0; a < N; ++a) {
        const cplx za = z[a];
        ke.push_back([i, za, z, p, phi](std::span<const Jet> y) {
            const Jet inv = 1.0 / chart_s(y, z);
            const Jet x = y[1 + i] / za;
            return phi * theta(Jet(inv * x), p) / (theta(inv, p) * theta(x, p));
        });
        kf.push_back([i, za, z, p, phi](std::span<const Jet> y) {
            const Jet s = chart_s(y, z);
            const Jet x = y[1 + i] / za;
            return phi * theta(Jet(s * x), p) / (theta(s, p) * theta(x, p));
        });
        g.push_back([i, za, p](std::span<const Jet> y) { return theta_log_deriv(Jet(y[1 + i] / za), p); });
        g2.push_back([i, za, p](std::span<const Jet> y) {
            const Jet v = theta_log_deriv(Jet(y[1 + i] / za), p);
            return v * v;
        });
        wp.push_back([i, za, p](std::span<const Jet> y) { return weierstrass_p(Jet(y[1 + i] / za), p); });
    }

    std::vector<DifferentialOperator> E, F, H, D, U, Q;
    DifferentialOperator hsum;
    for (int a = 0; a < N; ++a) hsum = a == 0 ? sov.bar[a].h : hsum + sov.bar[a].h;
    for (int a = 0; a < N; ++a) {
        E.push_back(P(sov.bar[a].e));
        F.push_back(P(sov.bar[a].f));
        H.push_back(P(sov.bar[a].h));
        D.push_back(pullback_partial(sov.chart, 1 + a));
        U.push_back(P(DifferentialOperator::coordinate(uv, 1 + a)));
        Q.push_back(P(cplx{0.5} * (sov.bar[a].h * hsum)));
    }
    const auto sds = P(DifferentialOperator::coordinate(uv, 0) * DifferentialOperator::partial(uv, 0));

    EllipticChain c;
    c.hat.e = weighted_sum(ke, E);
    c.hat.f = weighted_sum(kf, F);
    c.hat.h = cplx{2.0} * sds + weighted_sum(g, H);

    const auto& mu = *m.mu;
    const cplx mu0 = m.elliptic->mu0;
    std::vector<DifferentialOperator> Lm;
    for (int a = 0; a < N; ++a) Lm.push_back(P(sov.H.L[a] - DifferentialOperator::constant(uv, mu[a])));
    c.hat.L = P(sov.H.L0 - DifferentialOperator::constant(uv, mu0)) + weighted_sum(g, Lm) + weighted_sum(g2, Q);

    const auto lam = m.lambda;
    CoeffFn constant = [g, wp, mu, mu0, lam](std::span<const Jet> y) {
        Jet v = Jet(y[0].layout_ptr(), -mu0);
        for (std::size_t a = 0; a < mu.size(); ++a)
            v = v - mu[a] * g[a](y) - 2.0 * lam[a] * (lam[a] - 1.0) * wp[a](y);
        return v;
    };
    c.diff = -c.hat.L + c.hat.e * c.hat.f + c.hat.f * c.hat.e + cplx{0.5} * (c.hat.h * c.hat.h) + mult(yv, constant);

    auto comm = [&](const DifferentialOperator& d, const CoeffFn& f) { return op_commutator(d, mult(yv, f)); };
    DifferentialOperator kernel_u, kernel_c, g_u, g_c, st, su, sc;
    auto acc = [](DifferentialOperator& x, const DifferentialOperator& t) { x = x.empty() ? t : x + t; };
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            const auto dk = comm(D[a], kf[b]);
            const auto ddk = op_commutator(D[a], dk);
            acc(kernel_u, op_scale(ke[a], cplx{-1.0} * ((cplx{2.0} * (U[a] * dk * D[a]) + U[a] * ddk) * U[b])));
            acc(kernel_c, op_scale(ke[a], (-2.0 * (sov.nu[a] + 1.0)) * (dk * U[b])));
            const auto dg = comm(D[a], g[b]);
            acc(g_u, op_scale(g[a], cplx{2.0} * (U[a] * dg * U[b] * D[b])));
            acc(g_c, op_scale(g[a], (2.0 * (sov.nu[b] + 1.0)) * (U[a] * dg)));
        }
        const auto dsg = comm(sds, g[a]);
        acc(st, dsg * H[a]);
        acc(su, cplx{-2.0} * (dsg * U[a] * D[a]));
        acc(sc, (-2.0 * (sov.nu[a] + 1.0)) * dsg);
    }
    c.kernel_u = kernel_u;
    c.kernel_c = kernel_c;
    c.g_u = g_u;
    c.g_c = g_c;
    c.s_term = st;
    c.s_term_u = su;
    c.s_term_c = sc;
    c.q_wp = weighted_sum(wp, Q);
    c.euler = DifferentialOperator::coordinate(yv, 0) * DifferentialOperator::partial(yv, 0);
    c.wdw = DifferentialOperator::coordinate(yv, 1 + i) * DifferentialOperator::partial(yv, 1 + i);
    return c;
}

std::vector<TestFunction> twisted_family(const EllipticSov& sov, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G(0.0, 1.0);
    const int N = sov.model.N;
    const cplx Lam = twist_exponent(sov);
    std::vector<TestFunction> fam;
    for (int k = 0; k < count; ++k) {
        std::vector<cplx> c;
        for (int j = 0; j < 2 * N; ++j) c.push_back({G(rng), G(rng)});
        fam.push_back([c, N, Lam](std::span<const Jet> y) {
            Jet e = Jet(y[0].layout_ptr(), 0.0);
            for (int j = 0; j < N; ++j) e = e + c[j] * y[1 + j] + 0.3 * c[N + j] * y[1 + j] * y[1 + j];
            return pow(y[0], -Lam) * exp(e);
        });
    }
    return fam;
}

Sampler elliptic_locus_sampler(const GaudinModel& m)
{
    const auto p = m.params();
    const auto z = m.z;
    const int N = m.N;
    return [p, z, N](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const double lq = std::log(std::abs(p.q));
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Point y{std::polar(0.5 + U(rng), 2 * M_PI * U(rng))};
            bool ok = true;
            cplx s = 1.0;
            for (const auto& x : z) s *= x;
            for (int k = 0; k < N; ++k) {
                const cplx w = std::exp(cplx{lq * (0.05 + 0.9 * U(rng)), 2 * M_PI * U(rng)});
                for (const auto& x : z)
                    if (lattice_distance(w / x, p) < 0.3) ok = false;
                for (std::size_t j = 1; j < y.size(); ++j)
                    if (lattice_distance(w / y[j], p) < 0.3) ok = false;
                y.push_back(w);
                s /= w;
            }
            if (ok && lattice_distance(s, p) > 0.3) return y;
        }
        throw NumericalBreakdown("could not sample separated points");
    };
}

DifferentialOperator elliptic_separated_form(const EllipticSov& sov, int i, bool printed)
{
    const auto& m = sov.model;
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const auto p = sov.params;
    const auto z = m.z;
    const auto nu = sov.nu;
    const auto lam = m.lambda;
    const auto mu = *m.mu;
    const cplx mu0 = m.elliptic->mu0;
    const auto yv = elliptic_y_vars(m.N);
    CoeffFn A = [=](std::span<const Jet> y) {
        Jet a = Jet(y[0].layout_ptr(), 0.0);
        for (std::size_t k = 0; k < z.size(); ++k) {
            const Jet x = printed ? Jet(y[1 + i] / z[k]) : Jet(z[k] / y[1 + i]);
            a = a - (nu[k] + 1.0) * theta_log_deriv(x, p);
        }
        return a;
    };
    const double sign = printed ? 1.0 : -1.0;
    CoeffFn pot = [=](std::span<const Jet> y) {
        Jet v = Jet(y[0].layout_ptr(), -mu0);
        for (std::size_t k = 0; k < z.size(); ++k) {
            const Jet x = y[1 + i] / z[k];
            v = v - mu[k] * theta_log_deriv(x, p) + sign * 2.0 * lam[k] * (lam[k] - 1.0) * weierstrass_p(x, p);
        }
        return v;
    };
    const auto D = DifferentialOperator::coordinate(yv, 1 + i) * DifferentialOperator::partial(yv, 1 + i) + mult(yv, A);
    return cplx{2.0} * (D * D) + mult(yv, pot);
}

std::vector<VerificationReport> verify_elliptic_separation(const GaudinModel& m, const SovOptions& opt)
{
    m.validate();
    if (!m.is_elliptic()) throw ParameterError("elliptic model expected");
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const EllipticSov sov = make_elliptic_sov(m, opt.reading, opt.seed);
    const auto p = sov.params;
    const auto yv = elliptic_y_vars(m.N);
    const auto z = m.z;
    const auto sampler = elliptic_locus_sampler(m);
    const auto family = twisted_family(sov, 6, opt.seed + 1);
    EqualOptions eo;
    eo.samples = opt.trials;
    eo.tol = opt.tol;
    eo.seed = opt.seed;
    const cplx Lam = twist_exponent(sov);
    const double sigma = kKernelProductSign;
    CoeffFn wp_s = [z, p](std::span<const Jet> y) { return weierstrass_p(chart_s(y, z), p); };

    std::vector<VerificationReport> out;
    for (int i = 0; i < m.N; ++i) {
        const auto c = build_elliptic_chain(sov, i);
        const std::string tag = "[w" + std::to_string(i + 1) + "]";
        const auto sum = c.kernel_u + c.kernel_c + c.g_u + c.g_c + c.s_term;
        out.push_back(op_equal(c.diff, sum - c.q_wp, sampler, eo, "elliptic (a) L difference = kernel_u + kernel_c + g_u + g_c + S - sum wp Q " + tag));
        out.push_back(op_equal(c.kernel_u + c.g_u + c.s_term_u, op_scale(wp_s, cplx{2.0 * sigma} * c.euler), sampler, eo,
                               "elliptic (b) kernel_u + g_u + S_u = 2 sigma wp(s) C d_C " + tag));
        out.push_back(op_equal(c.kernel_c + c.g_c + c.s_term_c, op_scale(wp_s, DifferentialOperator::constant(yv, 2.0 * sigma * Lam)),
                               sampler, eo, "elliptic (c) kernel_c + g_c + S_c = 2 sigma Lambda wp(s) " + tag));
        out.push_back(op_equal(c.hat.f, DifferentialOperator::zero(yv), sampler, eo, "elliptic f = 0 " + tag));
        const auto nu = sov.nu;
        const int ii = i;
        CoeffFn hg = [z, nu, p, ii](std::span<const Jet> y) {
            Jet a = Jet(y[0].layout_ptr(), 0.0);
            for (std::size_t k = 0; k < z.size(); ++k) a = a + (nu[k] + 1.0) * theta_log_deriv(Jet(y[1 + ii] / z[k]), p);
            return a;
        };
        out.push_back(op_equal(c.hat.h, cplx{-2.0} * (c.euler + c.wdw + mult(yv, hg)), sampler, eo,
                               "elliptic h = -2 (C d_C + w d_w + sum (nu+1) g(w/z)) " + tag));
        auto form = elliptic_separated_form(sov, i);
        if (opt.flip_A) {
            // mutation: A -> -A
            const auto yv2 = yv;
            CoeffFn A = [z, nu, p, ii](std::span<const Jet> y) {
                Jet a = Jet(y[0].layout_ptr(), 0.0);
                for (std::size_t k = 0; k < z.size(); ++k) a = a + (nu[k] + 1.0) * theta_log_deriv(Jet(z[k] / y[1 + ii]), p);
                return a;
            };
            const auto D = c.wdw + mult(yv, A);
            form = form - cplx{2.0} * ((c.wdw + cplx{-1.0} * mult(yv, A)) * (c.wdw + cplx{-1.0} * mult(yv, A))) +
                   cplx{2.0} * (D * D);
        }
        out.push_back(op_equal_on(c.hat.L, form, family, sampler, eo,
                                  "elliptic (d) L = 2 (w d_w + A)^2 - mu0 - sum mu g - sum 2l(l-1) wp on C^-Lambda G " + tag));
    }
    return out;
}

// ---------------------------------------------------------------- separated operators

DifferentialOperator separated_operator(const GaudinModel& m, SeparatedSign sign)
{
    if (!m.mu) throw ParameterError("model carries no eigenvalues mu");
    const std::vector<std::string> v{"w"};
    const auto mu = *m.mu;
    const auto z = m.z;
    const auto lam = m.lambda;
    const auto d = DifferentialOperator::partial(v, 0);
    if (!m.is_elliptic()) {
        CoeffFn pot = [mu, z, lam](std::span<const Jet> x) {
            Jet c = Jet(x[0].layout_ptr(), 0.0);
            for (std::size_t a = 0; a < z.size(); ++a) {
                const Jet r = 1.0 / (x[0] - z[a]);
                c = c - mu[a] * r - 2.0 * lam[a] * (lam[a] - 1.0) * r * r;
            }
            return c;
        };
        return cplx{2.0} * (d * d) + DifferentialOperator::multiplication(v, pot);
    }
    const auto p = m.params();
    const cplx mu0 = m.elliptic->mu0;
    const double s = sign == SeparatedSign::Derived ? -1.0 : 1.0;
    CoeffFn pot = [mu, z, lam, p, mu0, s](std::span<const Jet> x) {
        Jet c = Jet(x[0].layout_ptr(), -mu0);
        for (std::size_t a = 0; a < z.size(); ++a) {
            const Jet r = x[0] / z[a];
            c = c - mu[a] * theta_log_deriv(r, p) + s * 2.0 * lam[a] * (lam[a] - 1.0) * weierstrass_p(r, p);
        }
        return c;
    };
    const auto wd = DifferentialOperator::coordinate(v, 0) * d;
    return cplx{2.0} * (wd * wd) + DifferentialOperator::multiplication(v, pot);
}

}  // namespace gsov
