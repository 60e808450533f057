#include "gsov/gaudin_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace gsov {

namespace {

std::string fmt(cplx c)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << std::abs(c);
    return os.str();
}

double max_abs(const SparseMat& a)
{
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

SparseMat sparse_identity(std::size_t n)
{
    SparseMat id(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    id.setIdentity();
    return id;
}

}  // namespace

EllipticParams GaudinModel::params() const
{
    if (!elliptic) throw ParameterError("model is not elliptic");
    EllipticParams p = EllipticParams::make(elliptic->q, elliptic->tol);
    if (elliptic->trunc > 0) p.trunc = elliptic->trunc;
    return p;
}

void GaudinModel::validate(double tol) const
{
    if (N < 2) throw ParameterError("N must be at least 2");
    if (static_cast<int>(z.size()) != N) throw ParameterError("z must have N entries");
    if (static_cast<int>(lambda.size()) != N) throw ParameterError("lambda must have N entries");
    if (mu && static_cast<int>(mu->size()) != N) throw ParameterError("mu must have N entries");
    for (int a = 0; a < N; ++a) {
        for (int b = a + 1; b < N; ++b) {
            if (std::abs(z[a] - z[b]) < 1e-12) throw ParameterError("marked points must be distinct");
        }
    }
    if (!elliptic) {
        if (mu) {
            const auto r = rational_mu_constraints(*this, *mu);
            const char* names[3] = {"sum mu_a = 0", "sum mu_a z_a + sum 2 lambda_a(lambda_a - 1) = 0",
                                    "sum mu_a z_a^2 + sum 4 lambda_a(lambda_a - 1) z_a = 0"};
            std::string bad;
            for (int i = 0; i < 3; ++i) {
                if (std::abs(r[i]) > tol) bad += std::string(bad.empty() ? "" : "; ") + names[i] + " violated by " + fmt(r[i]);
            }
            if (!bad.empty()) throw ParameterError(bad);
        }
        return;
    }
    const EllipticParams p = params();
    for (int a = 0; a < N; ++a) {
        if (z[a] == cplx{}) throw ParameterError("marked points must be nonzero");
        for (int b = a + 1; b < N; ++b) {
            if (lattice_distance(z[a] / z[b], p) < 1e-10) throw ParameterError("marked points must be distinct modulo q");
        }
    }
    if (mu) {
        cplx s = 0.0;
        for (auto v : *mu) s += v;
        if (std::abs(s) > tol) throw ParameterError("sum mu_a = 0 violated by " + fmt(s));
    }
}

std::array<cplx, 3> rational_mu_constraints(const GaudinModel& m, const std::vector<cplx>& mu)
{
    std::array<cplx, 3> r{};
    for (int a = 0; a < m.N; ++a) {
        const cplx l = m.lambda[a];
        r[0] += mu[a];
        r[1] += mu[a] * m.z[a] + 2.0 * l * (l - 1.0);
        r[2] += mu[a] * m.z[a] * m.z[a] + 4.0 * l * (l - 1.0) * m.z[a];
    }
    return r;
}

int rep_degree(cplx lambda)
{
    const double d = -2.0 * lambda.real();
    const long r = std::lround(d);
    if (std::abs(lambda.imag()) > 1e-12 || std::abs(d - static_cast<double>(r)) > 1e-12 || r < 0)
        throw ParameterError("weight must satisfy -2 lambda in {0, 1, 2, ...}");
    return static_cast<int>(r);
}

Sl2Rep sl2_rep(cplx lambda)
{
    const int deg = rep_degree(lambda);
    const double l = -0.5 * deg;
    Sl2Rep r;
    r.lambda = l;
    r.dim = deg + 1;
    r.e = Eigen::MatrixXcd::Zero(r.dim, r.dim);
    r.f = Eigen::MatrixXcd::Zero(r.dim, r.dim);
    r.h = Eigen::MatrixXcd::Zero(r.dim, r.dim);
    for (int k = 0; k < r.dim; ++k) {
        if (k > 0) r.f(k - 1, k) = -double(k);
        r.h(k, k) = 2.0 * (k + l);
        if (k + 1 < r.dim) r.e(k + 1, k) = k + 2.0 * l;
    }
    return r;
}

std::size_t TensorSpace::size() const
{
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

SparseMat TensorSpace::site(int alpha, const Eigen::MatrixXcd& op) const
{
    // basis index = sum k_a * stride_a, site 0 slowest
    const std::size_t n = size();
    std::size_t stride = 1;
    for (std::size_t a = dims.size(); a-- > static_cast<std::size_t>(alpha) + 1;) stride *= static_cast<std::size_t>(dims[a]);
    const std::size_t d = static_cast<std::size_t>(dims[alpha]);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t k = (col / stride) % d;
        const std::size_t base = col - k * stride;
        for (std::size_t r = 0; r < d; ++r) {
            const cplx v = op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
            if (v != cplx{})
                trip.emplace_back(static_cast<int>(base + r * stride), static_cast<int>(col), v);
        }
    }
    SparseMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

std::vector<cplx> TensorSpace::weights() const
{
    const std::size_t n = size();
    std::vector<cplx> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (std::size_t a = dims.size(); a-- > 0;) {
            const std::size_t k = rem % static_cast<std::size_t>(dims[a]);
            rem /= static_cast<std::size_t>(dims[a]);
            w[i] += 2.0 * (double(k) + reps[a].lambda);
        }
    }
    return w;
}

TensorSpace tensor_space(const GaudinModel& m, std::size_t cap)
{
    TensorSpace ts;
    for (const auto& l : m.lambda) {
        ts.reps.push_back(sl2_rep(l));
        ts.dims.push_back(ts.reps.back().dim);
    }
    if (ts.size() > cap) throw ParameterError("tensor product dimension exceeds the cap");
    return ts;
}

GlobalSl2 global_generators(const TensorSpace& ts)
{
    const auto n = static_cast<Eigen::Index>(ts.size());
    GlobalSl2 g{SparseMat(n, n), SparseMat(n, n), SparseMat(n, n)};
    for (int a = 0; a < static_cast<int>(ts.dims.size()); ++a) {
        g.e += ts.site(a, ts.reps[a].e);
        g.f += ts.site(a, ts.reps[a].f);
        g.h += ts.site(a, ts.reps[a].h);
    }
    return g;
}

namespace {

struct SiteMats {
    std::vector<SparseMat> e, f, h;
};

SiteMats site_mats(const TensorSpace& ts)
{
    SiteMats s;
    for (int a = 0; a < static_cast<int>(ts.dims.size()); ++a) {
        s.e.push_back(ts.site(a, ts.reps[a].e));
        s.f.push_back(ts.site(a, ts.reps[a].f));
        s.h.push_back(ts.site(a, ts.reps[a].h));
    }
    return s;
}

std::vector<SparseMat> hamiltonians_from(const SiteMats& s, const std::vector<cplx>& z)
{
    const int N = static_cast<int>(z.size());
    std::vector<SparseMat> L;
    for (int a = 0; a < N; ++a) {
        SparseMat acc(s.e[0].rows(), s.e[0].cols());
        for (int b = 0; b < N; ++b) {
            if (b == a) continue;
            SparseMat omega = s.e[a] * s.f[b] + s.f[a] * s.e[b] + cplx{0.5} * (s.h[a] * s.h[b]);
            acc += (2.0 / (z[a] - z[b])) * omega;
        }
        L.push_back(acc);
    }
    return L;
}

}  // namespace

std::vector<SparseMat> rational_hamiltonians(const GaudinModel& m, std::size_t cap)
{
    if (m.is_elliptic()) throw ParameterError("rational_hamiltonians needs a rational model");
    const TensorSpace ts = tensor_space(m, cap);
    return hamiltonians_from(site_mats(ts), m.z);
}

RationalRelationResiduals rational_operator_relations(const GaudinModel& m, std::size_t cap)
{
    const TensorSpace ts = tensor_space(m, cap);
    const SiteMats s = site_mats(ts);
    const auto L = hamiltonians_from(s, m.z);
    const GlobalSl2 g = global_generators(ts);
    const std::size_t n = ts.size();
    RationalRelationResiduals r;
    SparseMat sum(L[0].rows(), L[0].cols()), m1 = sum, m2 = sum;
    SparseMat e1 = sum, f1 = sum, h1 = sum;
    cplx c1 = 0.0, c2 = 0.0;
    for (int a = 0; a < m.N; ++a) {
        for (int b = a + 1; b < m.N; ++b) {
            SparseMat c = L[a] * L[b] - L[b] * L[a];
            r.commutators = std::max(r.commutators, max_abs(c));
        }
        const cplx l = ts.reps[a].lambda;
        sum += L[a];
        m1 += m.z[a] * L[a];
        m2 += (m.z[a] * m.z[a]) * L[a];
        c1 += 2.0 * l * (l - 1.0);
        c2 += 4.0 * l * (l - 1.0) * m.z[a];
        e1 += m.z[a] * s.e[a];
        f1 += m.z[a] * s.f[a];
        h1 += m.z[a] * s.h[a];
    }
    const SparseMat id = sparse_identity(n);
    r.sum = max_abs(sum);
    SparseMat cas = g.e * g.f + g.f * g.e + cplx{0.5} * (g.h * g.h);
    r.first_moment = max_abs(SparseMat(m1 + c1 * id - cas));
    SparseMat rhs2 = cplx{2.0} * SparseMat(e1 * g.f + f1 * g.e + cplx{0.5} * (h1 * g.h));
    r.second_moment = max_abs(SparseMat(m2 + c2 * id - rhs2));
    return r;
}

std::string Sector::label() const
{
    switch (kind) {
    case Singlet: return "singlet";
    case Weight: return "weight:" + std::to_string(weight);
    case HighestWeight: return "highest:" + std::to_string(weight);
    }
    return "?";
}

SpectrumResult joint_spectrum(const GaudinModel& m, const Sector& sector, std::uint64_t seed, std::size_t cap,
                              double cluster_tol)
{
    if (m.is_elliptic()) throw ParameterError("joint_spectrum needs a rational model");
    const TensorSpace ts = tensor_space(m, cap);
    const SiteMats s = site_mats(ts);
    const auto L = hamiltonians_from(s, m.z);
    const GlobalSl2 g = global_generators(ts);
    const auto w = ts.weights();
    const int target = sector.kind == Sector::Singlet ? 0 : sector.weight;

    SpectrumResult res;
    res.sector = sector;

    // basis of the h-eigenspace (h is diagonal in the tensor basis)
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::abs(w[i] - double(target)) < 1e-9) idx.push_back(static_cast<Eigen::Index>(i));
    const auto n = static_cast<Eigen::Index>(ts.size());
    if (idx.empty()) {
        res.vectors = Eigen::MatrixXcd(n, 0);
        return res;
    }
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) B(idx[j], static_cast<Eigen::Index>(j)) = 1.0;

    if (sector.kind != Sector::Weight) {
        // highest-weight vectors: kernel of e inside the eigenspace
        const Eigen::MatrixXcd EB = Eigen::MatrixXcd(g.e) * B;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(EB, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double scale = std::max(1.0, sv.size() ? sv(0) : 0.0);
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * scale) ++rank;
        const Eigen::MatrixXcd V = svd.matrixV();
        const Eigen::Index k = V.cols() - rank;
        B = B * V.rightCols(k);
    }
    const Eigen::Index d = B.cols();
    if (d == 0) {
        res.vectors = Eigen::MatrixXcd(n, 0);
        return res;
    }

    std::vector<Eigen::MatrixXcd> R;
    for (const auto& La : L) R.push_back(B.adjoint() * (Eigen::MatrixXcd(La) * B));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G;
    Eigen::MatrixXcd comb = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& r : R) comb += cplx{G(rng), G(rng)} * r;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comb);
    if (es.info() != Eigen::Success) throw NumericalBreakdown("eigen-decomposition failed");
    const auto ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
            if (std::abs(ev(i) - ev(j)) < cluster_tol * (1.0 + std::abs(ev(i)))) res.ill_conditioned = true;

    // order tuples by the first component for reproducibility
    std::vector<std::pair<std::vector<cplx>, Eigen::VectorXcd>> found;
    std::vector<double> resid;
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::VectorXcd v = es.eigenvectors().col(i);
        v.normalize();
        std::vector<cplx> mu;
        double worst = 0.0;
        for (const auto& r : R) {
            const cplx mu_a = v.dot(r * v);
            worst = std::max(worst, (r * v - mu_a * v).norm());
            mu.push_back(mu_a);
        }
        found.emplace_back(mu, B * v);
        resid.push_back(worst);
    }
    std::vector<std::size_t> order(found.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < found[a].first.size(); ++k) {
            const cplx x = found[a].first[k], y = found[b].first[k];
            if (std::abs(x.real() - y.real()) > 1e-9) return x.real() < y.real();
            if (std::abs(x.imag() - y.imag()) > 1e-9) return x.imag() < y.imag();
        }
        return false;
    });
    res.vectors = Eigen::MatrixXcd(n, d);
    for (std::size_t j = 0; j < order.size(); ++j) {
        Eigen::VectorXcd v = found[order[j]].second;
        // fix the phase: largest component real positive
        Eigen::Index im = 0;
        v.cwiseAbs().maxCoeff(&im);
        v *= std::abs(v(im)) / v(im);
        res.vectors.col(static_cast<Eigen::Index>(j)) = v;
        res.tuples.push_back(found[order[j]].first);
        res.residuals.push_back(resid[order[j]]);
    }
    return res;
}

VerificationReport check_linear_relations(const SpectrumResult& s, const GaudinModel& m, double tol)
{
    VerificationReport r;
    r.label = "singlet linear relations";
    r.tol = tol;
    for (const auto& mu : s.tuples) {
        for (const auto& c : rational_mu_constraints(m, mu)) r.max_residual = std::max(r.max_residual, std::abs(c));
        ++r.samples;
    }
    r.pass = r.max_residual < tol;
    return r;
}

// ---------------------------------------------------------------- operators

Sl2Triple site_generators(const std::vector<std::string>& vars, int idx, cplx lambda)
{
    const auto t = DifferentialOperator::coordinate(vars, idx);
    const auto d = DifferentialOperator::partial(vars, idx);
    const auto one = DifferentialOperator::identity(vars);
    Sl2Triple s;
    s.e = t * t * d + (2.0 * lambda) * t;
    s.f = -d;
    s.h = cplx{2.0} * (t * d + lambda * one);
    return s;
}

DifferentialOperator casimir(const Sl2Triple& s)
{
    return s.e * s.f + s.f * s.e + cplx{0.5} * (s.h * s.h);
}

std::vector<DifferentialOperator> rational_site_hamiltonians(const std::vector<Sl2Triple>& sites,
                                                             const std::vector<cplx>& z)
{
    const int N = static_cast<int>(z.size());
    std::vector<DifferentialOperator> L;
    for (int a = 0; a < N; ++a) {
        std::vector<std::pair<cplx, DifferentialOperator>> parts;
        for (int b = 0; b < N; ++b) {
            if (b == a) continue;
            const auto omega = sites[a].e * sites[b].f + sites[a].f * sites[b].e + cplx{0.5} * (sites[a].h * sites[b].h);
            parts.emplace_back(2.0 / (z[a] - z[b]), omega);
        }
        L.push_back(op_linear(parts));
    }
    return L;
}

Sl2Triple rational_currents(const std::vector<Sl2Triple>& sites, const std::vector<cplx>& z, cplx w)
{
    std::vector<std::pair<cplx, DifferentialOperator>> e, f, h;
    for (std::size_t a = 0; a < z.size(); ++a) {
        const cplx k = 1.0 / (w - z[a]);
        e.emplace_back(k, sites[a].e);
        f.emplace_back(k, sites[a].f);
        h.emplace_back(k, sites[a].h);
    }
    return {op_linear(e), op_linear(f), op_linear(h)};
}

Sl2Triple elliptic_currents(const std::vector<Sl2Triple>& sites, int s_index, const std::vector<cplx>& za, cplx z,
                            const EllipticParams& p)
{
    const auto& vars = sites.at(0).e.vars();
    std::vector<std::pair<cplx, DifferentialOperator>> h;
    Sl2Triple out;
    const cplx phi = kernel_normalization(p);
    for (std::size_t a = 0; a < za.size(); ++a) {
        const cplx w = z / za[a];
        CoeffFn ke = [s_index, w, p, phi](std::span<const Jet> x) {
            const Jet inv = 1.0 / x[s_index];
            return phi * theta(Jet(inv * w), p) / (theta(inv, p) * theta(w, p));
        };
        CoeffFn kf = [s_index, w, p, phi](std::span<const Jet> x) {
            return phi * theta(Jet(x[s_index] * w), p) / (theta(x[s_index], p) * theta(w, p));
        };
        const auto te = op_scale(ke, sites[a].e);
        const auto tf = op_scale(kf, sites[a].f);
        out.e = a == 0 ? te : out.e + te;
        out.f = a == 0 ? tf : out.f + tf;
        h.emplace_back(theta_log_deriv(w, p), sites[a].h);
    }
    const auto s = DifferentialOperator::coordinate(vars, s_index);
    const auto ds = DifferentialOperator::partial(vars, s_index);
    h.emplace_back(2.0, s * ds);
    out.h = op_linear(h);
    return out;
}

DifferentialOperator elliptic_hamiltonian_density(const std::vector<Sl2Triple>& sites, int s_index,
                                                  const std::vector<cplx>& za, cplx z, const EllipticParams& p)
{
    return casimir(elliptic_currents(sites, s_index, za, z, p));
}

std::vector<cplx> elliptic_basis(const std::vector<cplx>& za, cplx z, const EllipticParams& p)
{
    const std::size_t N = za.size();
    std::vector<cplx> b(3 * N + 1);
    b[0] = 1.0;
    for (std::size_t a = 0; a < N; ++a) {
        const cplx g = theta_log_deriv(z / za[a], p);
        b[1 + a] = g;
        b[1 + N + a] = weierstrass_p(z / za[a], p);
        b[1 + 2 * N + a] = g * g;
    }
    return b;
}

EllipticHamiltonians elliptic_hamiltonians(const std::vector<Sl2Triple>& sites, int s_index,
                                           const std::vector<cplx>& za, const EllipticParams& p, std::uint64_t seed,
                                           int extra_samples)
{
    const int N = static_cast<int>(za.size());
    const int nb = 3 * N + 1;
    const int M = nb + std::max(extra_samples, 0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double lq = std::abs(p.q) > 0 ? std::log(std::abs(p.q)) : -3.0;

    EllipticHamiltonians out;
    Eigen::MatrixXcd B(M, nb);
    int row = 0;
    int guard = 0;
    while (row < M) {
        if (++guard > 100 * M) throw NumericalBreakdown("could not place fit samples");
        const cplx z = std::exp(cplx{lq * (0.1 + 0.8 * U(rng)), 2.0 * M_PI * U(rng)});
        bool ok = true;
        for (const auto& a : za)
            if (lattice_distance(z / a, p) < 0.2) ok = false;
        if (!ok) continue;
        const auto b = elliptic_basis(za, z, p);
        for (int k = 0; k < nb; ++k) B(row, k) = b[k];
        out.sample_points.push_back(z);
        ++row;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.condition = sv(0) / sv(sv.size() - 1);
    if (!(out.condition < 1e10)) throw NumericalBreakdown("ill-conditioned elliptic fit");
    const Eigen::MatrixXcd W =
        svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();  // nb x M

    std::vector<DifferentialOperator> Lz;
    for (const auto& z : out.sample_points) Lz.push_back(elliptic_hamiltonian_density(sites, s_index, za, z, p));
    auto coeff = [&](int k) {
        std::vector<std::pair<cplx, DifferentialOperator>> parts;
        for (int j = 0; j < M; ++j) parts.emplace_back(W(k, j), Lz[j]);
        return op_linear(parts);
    };
    out.L0 = coeff(0);
    for (int a = 0; a < N; ++a) {
        out.L.push_back(coeff(1 + a));
        out.P.push_back(coeff(1 + N + a));
        out.Q.push_back(coeff(1 + 2 * N + a));
    }
    return out;
}

std::vector<std::string> elliptic_t_vars(int N)
{
    std::vector<std::string> v{"s"};
    for (int a = 0; a < N; ++a) v.push_back("t" + std::to_string(a + 1));
    return v;
}

std::vector<Sl2Triple> elliptic_t_sites(const GaudinModel& m)
{
    const auto vars = elliptic_t_vars(m.N);
    std::vector<Sl2Triple> s;
    for (int a = 0; a < m.N; ++a) s.push_back(site_generators(vars, a + 1, m.lambda[a]));
    return s;
}

}  // namespace gsov
