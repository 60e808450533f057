#include "gsov/bethe_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "gsov/errors.hpp"

namespace gsov {

namespace {

double max_abs(const std::vector<cplx>& v)
{
    double r = 0.0;
    for (const auto& x : v) r = std::max(r, std::abs(x));
    return r;
}

cplx centroid(const std::vector<cplx>& z)
{
    cplx c{};
    for (const auto& x : z) c += x;
    return c / double(z.size());
}

double spread(const std::vector<cplx>& z)
{
    const cplx c = centroid(z);
    double r = 0.0;
    for (const auto& x : z) r = std::max(r, std::abs(x - c));
    return std::max(r, 1.0);
}

bool same_roots(std::vector<cplx> a, std::vector<cplx> b, double tol)
{
    if (a.size() != b.size()) return false;
    sort_points(a);
    sort_points(b);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol * (1.0 + std::abs(a[i]))) return false;
    return true;
}

using Poly = std::vector<cplx>;  // ascending coefficients

Poly pmul(const Poly& a, const Poly& b)
{
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

Poly pder(const Poly& a)
{
    if (a.size() <= 1) return Poly{0.0};
    Poly r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = double(i) * a[i];
    return r;
}

void check_distinct(const std::vector<cplx>& a)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(a[i] - a[j]) < 1e-12 * (1.0 + std::abs(a[i]))) throw DomainError("coincident Bethe roots");
}

// Damped Newton on F(a) with Jacobian J(a); returns the final residual.
template <class F, class J>
double newton(std::vector<cplx>& a, F&& f, J&& jac, const BetheOptions& opt)
{
    const int n = static_cast<int>(a.size());
    double res = max_abs(f(a));
    for (int it = 0; it < opt.max_iter && res > opt.tol; ++it) {
        const auto r = f(a);
        const Eigen::MatrixXcd Jm = jac(a);
        Eigen::VectorXcd rv(n);
        for (int i = 0; i < n; ++i) rv(i) = r[i];
        const Eigen::VectorXcd step = Jm.fullPivLu().solve(rv);
        if (!step.allFinite()) return INFINITY;
        double t = 1.0;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            auto b = a;
            for (int i = 0; i < n; ++i) b[i] -= t * step(i);
            double rb;
            try {
                rb = max_abs(f(b));
            } catch (const std::exception&) {
                continue;
            }
            if (std::isfinite(rb) && rb < res * (1.0 - 1e-4 * t)) {
                a = b;
                res = rb;
                break;
            }
            if (k == 29) return res;
        }
    }
    return res;
}

}  // namespace

std::pair<cplx, cplx> indicial_exponents(cplx lambda) { return {lambda, 1.0 - lambda}; }

std::pair<cplx, cplx> elliptic_exponents(cplx lambda) { return {-lambda, lambda - 1.0}; }

std::vector<cplx> mu_from_ansatz_rational(const SeparatedSolution& sol, const GaudinModel& m)
{
    const auto& z = m.z;
    const auto& s = sol.exponents;
    std::vector<cplx> mu(m.N);
    for (int a = 0; a < m.N; ++a) {
        cplx t{};
        for (const auto& r : sol.roots) {
            if (std::abs(z[a] - r) < 1e-14) throw DomainError("Bethe root on a marked point");
            t += 1.0 / (z[a] - r);
        }
        for (int b = 0; b < m.N; ++b)
            if (b != a) t += s[b] / (z[a] - z[b]);
        mu[a] = 4.0 * s[a] * t;
    }
    return mu;
}

std::vector<cplx> bethe_equations_rational(const SeparatedSolution& sol, const GaudinModel& m)
{
    const auto& a = sol.roots;
    check_distinct(a);
    std::vector<cplx> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        cplx t{};
        for (std::size_t j = 0; j < a.size(); ++j)
            if (j != i) t += 1.0 / (a[i] - a[j]);
        for (int b = 0; b < m.N; ++b) t += sol.exponents[b] / (a[i] - m.z[b]);
        r[i] = t;
    }
    return r;
}

std::vector<SeparatedSolution> bethe_solve_rational(const GaudinModel& m, int n_roots, const std::vector<cplx>& exponents,
                                                    const BetheOptions& opt, int* failures)
{
    if (n_roots < 0) throw ParameterError("n_roots must be nonnegative");
    if (static_cast<int>(exponents.size()) != m.N) throw ParameterError("one exponent per site expected");
    std::vector<SeparatedSolution> out;
    int fails = 0;
    SeparatedSolution base;
    base.kind = SovCase::Rational;
    base.exponents = exponents;
    if (n_roots == 0) {
        base.mu = mu_from_ansatz_rational(base, m);
        out.push_back(base);
        if (failures) *failures = 0;
        return out;
    }
    const double R = spread(m.z);
    const int N = m.N;
    const int n = n_roots;
    // Q P'' + 2 S P' = V P with Q = prod (w - z), S = sum s_a Q / (w - z_a), P monic of
    // degree n, deg V = N - 2; unknowns p_0..p_{n-1}, v_0..v_{N-2}.
    Poly Q{1.0};
    for (const auto& x : m.z) Q = pmul(Q, {-x, 1.0});
    Poly S(N, 0.0);
    for (int a = 0; a < N; ++a) {
        Poly t{1.0};
        for (int b = 0; b < N; ++b)
            if (b != a) t = pmul(t, {-m.z[b], 1.0});
        for (int k = 0; k < N; ++k) S[k] += exponents[a] * t[k];
    }
    const int E = n + N - 1;
    auto basis_image = [&](const Poly& P, const Poly& V) {
        Poly r(E, 0.0);
        const Poly A = pmul(Q, pder(pder(P)));
        const Poly B = pmul(S, pder(P));
        const Poly C = pmul(V, P);
        for (std::size_t i = 0; i < A.size() && int(i) < E; ++i) r[i] += A[i];
        for (std::size_t i = 0; i < B.size() && int(i) < E; ++i) r[i] += 2.0 * B[i];
        for (std::size_t i = 0; i < C.size() && int(i) < E; ++i) r[i] -= C[i];
        return r;
    };
    auto unpack = [&](const Eigen::VectorXcd& x, Poly& P, Poly& V) {
        P.assign(n + 1, 0.0);
        V.assign(N - 1, 0.0);
        for (int i = 0; i < n; ++i) P[i] = x(i);
        P[n] = 1.0;
        for (int j = 0; j < N - 1; ++j) V[j] = x(n + j);
    };
    auto resid = [&](const Eigen::VectorXcd& x) {
        Poly P, V;
        unpack(x, P, V);
        const Poly r = basis_image(P, V);
        Eigen::VectorXcd out(E);
        for (int i = 0; i < E; ++i) out(i) = r[i];
        return out;
    };
    auto jac = [&](const Eigen::VectorXcd& x) {
        Poly P, V;
        unpack(x, P, V);
        Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(E, E);
        for (int i = 0; i < n; ++i) {
            Poly e(i + 1, 0.0);
            e[i] = 1.0;
            const Poly r = basis_image(e, V);
            for (int k = 0; k < E; ++k) J(k, i) = r[k];
        }
        for (int j = 0; j < N - 1; ++j)
            for (int i = 0; i <= n && i + j < E; ++i) J(i + j, n + j) -= P[i];
        return J;
    };
    auto bethe_F = [&](const std::vector<cplx>& a) {
        SeparatedSolution t = base;
        t.roots = a;
        return bethe_equations_rational(t, m);
    };
    auto bethe_J = [&](const std::vector<cplx>& a) {
        Eigen::MatrixXcd Jm = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const cplx d = 1.0 / ((a[i] - a[j]) * (a[i] - a[j]));
                Jm(i, j) += d;
                Jm(i, i) -= d;
            }
            for (int b = 0; b < N; ++b) Jm(i, i) -= exponents[b] / ((a[i] - m.z[b]) * (a[i] - m.z[b]));
        }
        return Jm;
    };
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> G(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, N - 1);
    // Heine-Stieltjes count C(n + N - 2, N - 2) bounds the number of solutions
    double heine = 1.0;
    for (int i = 1; i <= N - 2; ++i) heine = heine * (n + i) / i;
    const int seeds = std::max(opt.seeds, static_cast<int>(std::min(6.0 * heine, 4096.0)));
    for (int k = 0; k < seeds; ++k) {
        Poly P{1.0};
        for (int i = 0; i < n; ++i) {
            const cplx p0 = m.z[pick(rng)], p1 = m.z[pick(rng)];
            P = pmul(P, {-(p0 + U(rng) * (p1 - p0) + 0.3 * R * cplx{G(rng), G(rng)}), 1.0});
        }
        Eigen::VectorXcd x(E);
        for (int i = 0; i < n; ++i) x(i) = P[i];
        for (int j = 0; j < N - 1; ++j) x(n + j) = 3.0 * cplx{G(rng), G(rng)} * std::pow(R, double(j - (N - 2)));
        double res = resid(x).norm();
        const double scale = 1.0 + x.head(n).norm();
        for (int it = 0; it < opt.max_iter && res > 1e-13 * scale; ++it) {
            const Eigen::VectorXcd r = resid(x);
            const Eigen::VectorXcd st = jac(x).fullPivLu().solve(r);
            if (!st.allFinite()) break;
            double t = 1.0;
            bool moved = false;
            for (int l = 0; l < 30; ++l, t *= 0.5) {
                const Eigen::VectorXcd y = x - t * st;
                const double ry = resid(y).norm();
                if (std::isfinite(ry) && ry < res) {
                    x = y;
                    res = ry;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        Poly Pf, Vf;
        unpack(x, Pf, Vf);
        std::vector<cplx> a;
        double bres = INFINITY;
        try {
            a = polynomial_roots(Pf);
            for (const auto& r : a)
                for (const auto& zz : m.z)
                    if (std::abs(r - zz) < 1e-6 * R) throw DomainError("root on a marked point");
            bres = newton(a, bethe_F, bethe_J, opt);
        } catch (const std::exception&) {
            bres = INFINITY;
        }
        if (!(bres <= opt.tol)) {
            ++fails;
            continue;
        }
        bool dup = false;
        for (const auto& o : out) dup = dup || same_roots(o.roots, a, opt.dedupe_tol);
        if (dup) continue;
        SeparatedSolution sol = base;
        sort_points(a);
        sol.roots = a;
        sol.bethe_residual = bres;
        sol.mu = mu_from_ansatz_rational(sol, m);
        out.push_back(sol);
    }
    if (failures) *failures = fails;
    return out;
}

std::vector<SeparatedSolution> singlet_bethe_solutions(const GaudinModel& m, const BetheOptions& opt)
{
    if (m.is_elliptic()) throw ParameterError("rational model expected");
    if (m.N > 6) throw ParameterError("exponent-pattern enumeration is capped at N = 6");
    std::vector<SeparatedSolution> out;
    std::set<std::vector<std::pair<double, double>>> seen_patterns;
    for (int mask = 0; mask < (1 << m.N); ++mask) {
        std::vector<cplx> s(m.N);
        cplx sum{};
        for (int a = 0; a < m.N; ++a) {
            const auto [e0, e1] = indicial_exponents(m.lambda[a]);
            s[a] = (mask >> a) & 1 ? e1 : e0;
            sum += s[a];
        }
        std::vector<std::pair<double, double>> key;
        for (const auto& x : s) key.emplace_back(x.real(), x.imag());
        if (!seen_patterns.insert(key).second) continue;
        const cplx n = -sum;
        if (std::abs(n.imag()) > 1e-9 || std::abs(n.real() - std::round(n.real())) > 1e-9 || n.real() < -0.5) continue;
        const auto sols = bethe_solve_rational(m, static_cast<int>(std::lround(n.real())), s, opt);
        for (const auto& sol : sols) {
            const auto c = rational_mu_constraints(m, sol.mu);
            if (std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])}) > 1e-8 * (1.0 + max_abs(sol.mu))) continue;
            bool dup = false;
            for (const auto& o : out) {
                double d = 0.0;
                for (int a = 0; a < m.N; ++a) d = std::max(d, std::abs(o.mu[a] - sol.mu[a]));
                dup = dup || d < opt.dedupe_tol * (1.0 + max_abs(sol.mu));
            }
            if (!dup) out.push_back(sol);
        }
    }
    return out;
}

TestFunction separated_psi(const SeparatedSolution& sol, const GaudinModel& m)
{
    const auto a = sol.roots;
    const auto s = sol.exponents;
    const auto z = m.z;
    if (sol.kind == SovCase::Rational) {
        return [a, s, z](std::span<const Jet> x) {
            Jet r = Jet(x[0].layout_ptr(), 1.0);
            for (const auto& ai : a) r = r * (x[0] - ai);
            for (std::size_t k = 0; k < z.size(); ++k) r = r * pow(x[0] - z[k], s[k]);
            return r;
        };
    }
    const auto p = m.params();
    return [a, s, z, p](std::span<const Jet> x) {
        Jet r = Jet(x[0].layout_ptr(), 1.0);
        for (const auto& ai : a) r = r * theta(Jet(x[0] * ai), p);
        for (std::size_t k = 0; k < z.size(); ++k) r = r / pow(theta(Jet(x[0] / z[k]), p), s[k]);
        return r;
    };
}

namespace {

GaudinModel with_solution_mu(GaudinModel m, const SeparatedSolution& sol)
{
    m.mu = sol.mu;
    if (m.elliptic) m.elliptic->mu0 = sol.mu0;
    return m;
}

// Sample points away from marked points and roots.
Point sample_point(std::mt19937_64& rng, const SeparatedSolution& sol, const GaudinModel& m)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (sol.kind == SovCase::Rational) {
        const cplx c0 = centroid(m.z);
        const double R = spread(m.z);
        for (;;) {
            const cplx w = c0 + std::polar(1.5 * R * std::sqrt(U(rng)), 2 * M_PI * U(rng));
            bool ok = true;
            for (const auto& x : m.z) ok = ok && std::abs(w - x) > 0.1 * R;
            for (const auto& x : sol.roots) ok = ok && std::abs(w - x) > 0.1 * R;
            if (ok) return Point{w};
        }
    }
    const auto p = m.params();
    const double lq = std::log(std::abs(p.q));
    for (;;) {
        const cplx w = std::exp(cplx{lq * (0.05 + 0.9 * U(rng)), 2 * M_PI * U(rng)});
        bool ok = true;
        for (const auto& x : m.z) ok = ok && lattice_distance(w / x, p) > 0.2;
        for (const auto& x : sol.roots) ok = ok && lattice_distance(w * x, p) > 0.2;
        if (ok) return Point{w};
    }
}

}  // namespace

VerificationReport verify_separated_solution(const SeparatedSolution& sol, const GaudinModel& m, int samples,
                                             std::uint64_t seed, double tol)
{
    const auto mm = with_solution_mu(m, sol);
    const auto D = separated_operator(mm);
    const auto psi = separated_psi(sol, m);
    std::mt19937_64 rng(seed);
    VerificationReport rep;
    rep.label = sol.kind == SovCase::Rational ? "rational D psi = 0" : "elliptic D psi = 0";
    rep.samples = samples;
    rep.tol = tol;
    rep.seed = seed;
    const std::vector<std::string> v{"w"};
    const auto one = DifferentialOperator::identity(v);
    for (int k = 0; k < samples; ++k) {
        const Point x = sample_point(rng, sol, m);
        const cplx val = op_apply(one, psi, x);
        const cplx r = op_apply(D, psi, x) / val;
        rep.max_residual = std::max(rep.max_residual, std::abs(r));
    }
    rep.pass = std::isfinite(rep.max_residual) && rep.max_residual < tol;
    return rep;
}

// ---------------------------------------------------------------- elliptic

std::vector<cplx> bethe_equations_elliptic(const SeparatedSolution& sol, const GaudinModel& m)
{
    const auto p = m.params();
    const auto& a = sol.roots;
    check_distinct(a);
    std::vector<cplx> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        cplx t = 0.5;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (j != i) t += theta_log_deriv(a[j] / a[i], p);
        for (int b = 0; b < m.N; ++b) t -= sol.exponents[b] * theta_log_deriv(1.0 / (a[i] * m.z[b]), p);
        r[i] = t;
    }
    return r;
}

void mu_from_ansatz_elliptic(SeparatedSolution& sol, const GaudinModel& m)
{
    const auto p = m.params();
    const auto& z = m.z;
    const auto& s = sol.exponents;
    const auto& lam = m.lambda;
    sol.mu.assign(m.N, 0.0);
    for (int a = 0; a < m.N; ++a) {
        cplx rho = -0.5 * s[a];
        for (const auto& r : sol.roots) rho += theta_log_deriv(z[a] * r, p);
        for (int b = 0; b < m.N; ++b)
            if (b != a) rho -= s[b] * theta_log_deriv(z[a] / z[b], p);
        sol.mu[a] = -4.0 * s[a] * rho;
    }
    // regular part at a base point away from all singularities
    std::mt19937_64 rng(11);
    const Point x = sample_point(rng, sol, m);
    const cplx w = x[0];
    cplx l{}, dl{};
    for (const auto& r : sol.roots) {
        l += theta_log_deriv(w * r, p);
        dl -= weierstrass_p(w * r, p);
    }
    for (int a = 0; a < m.N; ++a) {
        l -= s[a] * theta_log_deriv(w / z[a], p);
        dl += s[a] * weierstrass_p(w / z[a], p);
    }
    cplx c = 2.0 * (l * l + dl);
    for (int a = 0; a < m.N; ++a)
        c -= sol.mu[a] * theta_log_deriv(w / z[a], p) + 2.0 * lam[a] * (lam[a] - 1.0) * weierstrass_p(w / z[a], p);
    sol.mu0 = c;
}

std::vector<SeparatedSolution> bethe_solve_elliptic(const GaudinModel& m, const std::vector<cplx>& exponents,
                                                    const BetheOptions& opt, int* failures)
{
    if (!m.is_elliptic()) throw ParameterError("elliptic model expected");
    if (static_cast<int>(exponents.size()) != m.N) throw ParameterError("one exponent per site expected");
    cplx sum{};
    for (const auto& x : exponents) sum += x;
    if (std::abs(sum.imag()) > 1e-9 || std::abs(sum.real() - std::round(sum.real())) > 1e-9 || sum.real() < -0.5)
        throw ParameterError("sum of exponents must be a nonnegative integer (number of roots)");
    const int n = static_cast<int>(std::lround(sum.real()));
    const auto p = m.params();
    SeparatedSolution base;
    base.kind = SovCase::Elliptic;
    base.exponents = exponents;
    std::vector<SeparatedSolution> out;
    int fails = 0;
    if (n == 0) {
        mu_from_ansatz_elliptic(base, m);
        out.push_back(base);
        if (failures) *failures = 0;
        return out;
    }
    auto F = [&](const std::vector<cplx>& a) {
        SeparatedSolution s = base;
        s.roots = a;
        return bethe_equations_elliptic(s, m);
    };
    auto J = [&](const std::vector<cplx>& a) {
        Eigen::MatrixXcd Jm = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            cplx d{};
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const cplx wp = weierstrass_p(a[j] / a[i], p);
                Jm(i, j) = -wp / a[j];
                d += wp;
            }
            for (int b = 0; b < m.N; ++b) d -= exponents[b] * weierstrass_p(1.0 / (a[i] * m.z[b]), p);
            Jm(i, i) = d / a[i];
        }
        return Jm;
    };
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double lq = std::log(std::abs(p.q));
    for (int k = 0; k < opt.seeds; ++k) {
        std::vector<cplx> a(n);
        for (auto& x : a) x = std::exp(-cplx{lq * (0.05 + 0.9 * U(rng)), 2 * M_PI * U(rng)});
        double res;
        try {
            res = newton(a, F, J, opt);
        } catch (const std::exception&) {
            res = INFINITY;
        }
        if (!(res <= opt.tol)) {
            ++fails;
            continue;
        }
        bool dup = false;
        for (const auto& s : out) dup = dup || same_roots(s.roots, a, opt.dedupe_tol);
        if (dup) continue;
        SeparatedSolution s = base;
        sort_points(a);
        s.roots = a;
        s.bethe_residual = res;
        mu_from_ansatz_elliptic(s, m);
        out.push_back(s);
    }
    if (failures) *failures = fails;
    return out;
}

VerificationReport elliptic_single_valued_check(const SeparatedSolution& sol, const GaudinModel& m, int samples,
                                                std::uint64_t seed, double tol)
{
    const auto p = m.params();
    std::mt19937_64 rng(seed);
    // z d/dz log psi
    auto ell = [&](cplx w) {
        cplx l{};
        for (const auto& r : sol.roots) l += theta_log_deriv(w * r, p);
        for (int a = 0; a < m.N; ++a) l -= sol.exponents[a] * theta_log_deriv(w / m.z[a], p);
        return l;
    };
    double drift = 0.0;
    for (int k = 0; k < samples; ++k) {
        const cplx w = sample_point(rng, sol, m)[0];
        drift = std::max(drift, std::abs(ell(p.q * w) - ell(w)));
    }
    // multiplier at a base point: theta(qx) = -theta(x)/x factor by factor
    const cplx w0 = sample_point(rng, sol, m)[0];
    cplx logmult{};
    for (const auto& r : sol.roots) logmult += std::log(-1.0 / (w0 * r));
    for (int a = 0; a < m.N; ++a) logmult -= sol.exponents[a] * std::log(-m.z[a] / w0);
    const auto D = verify_separated_solution(sol, m, samples, seed + 1, tol);
    VerificationReport rep;
    rep.label = "elliptic psi single-valued and D psi = 0";
    rep.samples = samples;
    rep.tol = tol;
    rep.seed = seed;
    rep.max_residual = std::max(drift, D.max_residual);
    rep.pass = std::isfinite(rep.max_residual) && rep.max_residual < tol;
    const cplx mult = std::exp(logmult);
    char buf[160];
    std::snprintf(buf, sizeof buf, "multiplier %.16e%+.16ei, z-drift %.3e, D residual %.3e", mult.real(), mult.imag(),
                  drift, D.max_residual);
    rep.note = buf;
    return rep;
}

// ---------------------------------------------------------------- matching

MatchReport spectrum_match(const std::vector<SeparatedSolution>& bethe, const SpectrumResult& s, double tol)
{
    MatchReport rep;
    const int nb = static_cast<int>(bethe.size());
    const int ns = static_cast<int>(s.tuples.size());
    struct Cand {
        double d;
        int i, j;
    };
    std::vector<Cand> cand;
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < ns; ++j) {
            double d = 0.0;
            if (bethe[i].mu.size() != s.tuples[j].size()) continue;
            for (std::size_t a = 0; a < bethe[i].mu.size(); ++a) d = std::max(d, std::abs(bethe[i].mu[a] - s.tuples[j][a]));
            cand.push_back({d, i, j});
        }
    std::sort(cand.begin(), cand.end(), [](const Cand& x, const Cand& y) { return x.d < y.d; });
    std::vector<bool> ub(nb, false), us(ns, false);
    for (const auto& c : cand) {
        if (c.d > tol) break;
        if (ub[c.i] || us[c.j]) continue;
        ub[c.i] = us[c.j] = true;
        rep.pairs.emplace_back(c.i, c.j);
        rep.max_distance = std::max(rep.max_distance, c.d);
    }
    for (int i = 0; i < nb; ++i)
        if (!ub[i]) rep.unmatched_bethe.push_back(i);
    for (int j = 0; j < ns; ++j)
        if (!us[j]) rep.unmatched_spectrum.push_back(j);
    rep.bijection = rep.unmatched_bethe.empty() && rep.unmatched_spectrum.empty();
    return rep;
}

}  // namespace gsov
