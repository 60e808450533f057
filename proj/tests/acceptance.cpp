// Acceptance run: one line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsov/bethe_spectra.hpp"
#include "gsov/errors.hpp"
#include "gsov/separation_of_variables.hpp"
#include "harness.hpp"

using namespace gsov;
using Mat = Eigen::MatrixXcd;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why)
    {
        if (pass) detail = why;
        pass = false;
    }
    void check(bool ok, const std::string& why)
    {
        if (!ok) fail(why);
    }
};

std::string sci(double x)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", x);
    return b;
}

GaudinModel model(std::vector<cplx> z, std::vector<cplx> lambda)
{
    GaudinModel m;
    m.N = static_cast<int>(z.size());
    m.z = std::move(z);
    m.lambda = std::move(lambda);
    return m;
}

GaudinModel elliptic(std::vector<cplx> z, std::vector<cplx> lambda, cplx q)
{
    auto m = model(std::move(z), std::move(lambda));
    EllipticData d;
    d.q = q;
    m.elliptic = d;
    return m;
}

void absorb(Outcome& o, const std::vector<VerificationReport>& reps, double& worst)
{
    for (const auto& r : reps) {
        worst = std::max(worst, r.max_residual);
        o.check(r.pass, r.label + " residual " + sci(r.max_residual));
    }
}

// ---------------------------------------------------------------- criterion 2 oracle

// Standard spin-j matrices, basis m = j, j-1, ..., -j; e raises, h = 2 J_z.
struct Spin {
    Mat e, f, h;
};

Spin spin(double j)
{
    const int d = static_cast<int>(std::lround(2 * j)) + 1;
    Spin s{Mat::Zero(d, d), Mat::Zero(d, d), Mat::Zero(d, d)};
    for (int k = 0; k < d; ++k) {
        const double m = j - k;
        s.h(k, k) = 2 * m;
        if (k > 0) s.e(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
        if (k + 1 < d) s.f(k + 1, k) = std::sqrt(j * (j + 1) - m * (m - 1));
    }
    return s;
}

Mat kron(const Mat& a, const Mat& b)
{
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) r.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return r;
}

Mat embed(const std::vector<Spin>& sites, int a, Mat Spin::*g)
{
    Mat r = Mat::Identity(1, 1);
    for (int b = 0; b < static_cast<int>(sites.size()); ++b) {
        const Mat& x = b == a ? sites[b].*g : Mat::Identity(sites[b].h.rows(), sites[b].h.rows()).eval();
        r = kron(r, x);
    }
    return r;
}

// Singlet mu tuples of L_a = 2 sum_{b != a} Omega_ab / (z_a - z_b), computed densely.
std::vector<std::vector<cplx>> oracle_singlet_tuples(const GaudinModel& m, double& relation_residual)
{
    std::vector<Spin> sites;
    for (const auto& l : m.lambda) sites.push_back(spin(-l.real()));
    const int N = m.N;
    std::vector<Mat> E, F, H;
    for (int a = 0; a < N; ++a) {
        E.push_back(embed(sites, a, &Spin::e));
        F.push_back(embed(sites, a, &Spin::f));
        H.push_back(embed(sites, a, &Spin::h));
    }
    const auto dim = E[0].rows();
    std::vector<Mat> L(N, Mat::Zero(dim, dim));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            if (a != b) L[a] += 2.0 * (E[a] * F[b] + F[a] * E[b] + 0.5 * H[a] * H[b]) / (m.z[a] - m.z[b]);

    Mat Et = Mat::Zero(dim, dim), Ft = Et, Ht = Et;
    for (int a = 0; a < N; ++a) {
        Et += E[a];
        Ft += F[a];
        Ht += H[a];
    }
    Mat lhs = Mat::Zero(dim, dim);
    cplx cas{};
    for (int a = 0; a < N; ++a) {
        lhs += m.z[a] * L[a];
        cas += 2.0 * m.lambda[a] * (m.lambda[a] - 1.0);
    }
    relation_residual = (lhs + cas * Mat::Identity(dim, dim) - (Et * Ft + Ft * Et + 0.5 * Ht * Ht)).cwiseAbs().maxCoeff();

    Mat stacked(2 * dim, dim);
    stacked << Et, Ft;
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<int> null;
    for (int k = 0; k < dim; ++k)
        if (sv(k) < 1e-9) null.push_back(k);
    Mat V(dim, null.size());
    for (std::size_t k = 0; k < null.size(); ++k) V.col(k) = svd.matrixV().col(null[k]);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> G(0.0, 1.0);
    Mat comb = Mat::Zero(V.cols(), V.cols());
    std::vector<Mat> R;
    for (int a = 0; a < N; ++a) {
        R.push_back(V.adjoint() * L[a] * V);
        comb += cplx{G(rng), G(rng)} * R.back();
    }
    Eigen::ComplexEigenSolver<Mat> es(comb);
    std::vector<std::vector<cplx>> out;
    for (int k = 0; k < V.cols(); ++k) {
        const Eigen::VectorXcd v = es.eigenvectors().col(k).normalized();
        std::vector<cplx> mu;
        for (int a = 0; a < N; ++a) mu.push_back(v.dot(R[a] * v));
        out.push_back(mu);
    }
    return out;
}

double tuple_distance(const std::vector<std::vector<cplx>>& a, const std::vector<std::vector<cplx>>& b)
{
    if (a.size() != b.size()) return INFINITY;
    double worst = 0;
    std::vector<bool> used(b.size(), false);
    for (const auto& x : a) {
        double best = INFINITY;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (used[k]) continue;
            double d = 0;
            for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - b[k][i]));
            if (d < best) {
                best = d;
                arg = k;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1()
{
    Outcome o;
    double worst = 0;
    for (cplx q : {cplx{0.1}, cplx{0.05}, cplx{0.1, 0.05}, cplx{-0.3, 0.2}})
        for (const auto& r : harness::special_function_checks(q, 100, 11, 1e-8)) {
            worst = std::max(worst, r.max_residual);
            o.check(r.pass, r.label + " at q = " + sci(std::abs(q)) + " residual " + sci(r.max_residual));
        }
    if (o.pass) o.detail = "8 identities x 4 nomes x 100 samples, max residual " + sci(worst);
    return o;
}

Outcome criterion2()
{
    Outcome o;
    std::vector<GaudinModel> ms{
        model({0.0, 1.0}, {-0.5, -0.5}),
        model({0.0, 1.0}, {-1.0, -1.0}),
        model({0.3, -1.1, cplx{0.2, 1.4}}, {-0.5, -1.0, -0.5}),
        model({0.3, -1.1, cplx{0.2, 1.4}}, {-1.0, -1.0, -1.0}),
        model({0.0, 1.0, 2.0, 3.0}, {-0.5, -0.5, -0.5, -0.5}),
        model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}}, {-0.5, -1.0, -0.5, -1.0}),
        model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}}, {-1.0, -1.0, -1.0, -1.0}),
    };
    double worst = 0;
    for (const auto& m : ms) {
        const auto rel = rational_operator_relations(m);
        for (double x : {rel.commutators, rel.sum, rel.first_moment, rel.second_moment}) {
            worst = std::max(worst, x);
            o.check(x < 1e-10, "operator relation residual " + sci(x) + " at N = " + std::to_string(m.N));
        }
        const auto spec = joint_spectrum(m);
        const auto lin = check_linear_relations(spec, m, 1e-10);
        worst = std::max(worst, lin.max_residual);
        o.check(lin.pass, lin.label + " residual " + sci(lin.max_residual));
        double orel = 0;
        const auto oracle = oracle_singlet_tuples(m, orel);
        o.check(orel < 1e-10, "dense oracle relation residual " + sci(orel));
        const double d = tuple_distance(spec.tuples, oracle);
        o.check(d < 1e-8, "singlet tuples differ from the dense oracle by " + sci(d) + " at N = " +
                              std::to_string(m.N));
    }
    if (o.pass) o.detail = std::to_string(ms.size()) + " models, max residual " + sci(worst) + ", singlets agree with dense oracle";
    return o;
}

Outcome criterion3()
{
    Outcome o;
    std::vector<GaudinModel> ms{
        model({0.3, -1.1, cplx{0.2, 1.4}}, {-0.5, -1.0, -0.5}),
        model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}}, {-0.5, -0.5, cplx{-0.3, 0.4}, -1.0}),
        model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}, cplx{1.3, -0.2}}, {-0.5, -1.0, -0.5, -1.5, -0.5}),
    };
    double worst = 0;
    int controls = 0;
    for (std::size_t k = 0; k < ms.size(); ++k) {
        const auto m = with_synthetic_mu(ms[k], 100 + k);
        SovOptions opt;
        opt.trials = 20;
        opt.tol = 1e-8;
        opt.seed = 7 + k;
        absorb(o, verify_rational_separation(m, opt), worst);
        auto flip = opt;
        flip.trials = 4;
        flip.flip_A = true;
        for (const auto& r : verify_rational_separation(m, flip))
            if (r.label.find("(c)") != std::string::npos || r.label.find("(d)") != std::string::npos) {
                o.check(!r.pass, "mutation A -> -A not detected: " + r.label);
                ++controls;
            }
        auto printed = opt;
        printed.trials = 4;
        printed.flip_A = false;
        printed.reading = WeightReading::Printed;
        for (const auto& r : verify_rational_separation(m, printed))
            if (r.label.find("(a)") != std::string::npos || r.label.find("(d)") != std::string::npos) {
                o.check(!r.pass, "mutation nu = lambda not detected: " + r.label);
                ++controls;
            }
    }
    if (o.pass)
        o.detail = "N = 3, 4, 5 at 20 points, max residual " + sci(worst) + "; " + std::to_string(controls) +
                   " mutation controls fail as required";
    return o;
}

Outcome criterion4()
{
    Outcome o;
    std::mt19937_64 rng(23);
    std::normal_distribution<double> G(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0;
    auto rel = [](cplx a, cplx b) { return std::abs(a - b) / (1.0 + std::abs(b)); };

    const auto mr = model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}}, {-0.5, -0.5, -0.5, -0.5});
    for (int t = 0; t < 100; ++t) {
        // u -> w -> u
        std::vector<cplx> u(4);
        for (auto& x : u) x = {G(rng), G(rng)};
        u = project_sum_zero(u);
        const auto s = rational_u_to_w(u, mr);
        const auto back = rational_w_to_u(s, mr);
        for (int a = 0; a < 4; ++a) worst = std::max(worst, rel(back[a], u[a]));
        // w -> u -> w
        SeparatedCoordinates w;
        w.C = {G(rng), G(rng)};
        w.w = {cplx{G(rng), G(rng)}, cplx{G(rng), G(rng)}};
        sort_points(w.w);
        const auto s2 = rational_u_to_w(rational_w_to_u(w, mr), mr);
        worst = std::max(worst, rel(s2.C, w.C));
        for (int i = 0; i < 2; ++i) worst = std::max(worst, rel(s2.w[i], w.w[i]));
    }
    o.check(worst < 1e-8, "rational roundtrip residual " + sci(worst));
    const double wr = worst;

    worst = 0;
    const auto me = elliptic({cplx{0.6, 0.1}, cplx{-0.3, 0.5}, cplx{-0.2, -0.45}}, {-0.5, -1.0, -0.5}, cplx{0.08, 0.03});
    const auto p = me.params();
    const double lq = std::log(std::abs(me.elliptic->q));
    auto annulus = [&] { return std::exp(cplx{lq * (0.05 + 0.9 * U(rng)), 2 * M_PI * U(rng)}); };
    int done = 0;
    while (done < 100) {
        // u, t2 -> w -> u
        std::vector<cplx> u(3);
        for (auto& x : u) x = {G(rng), G(rng)};
        const cplx t2 = annulus();
        if (lattice_distance(t2, p) < 0.3) continue;
        SeparatedCoordinates s;
        try {
            s = elliptic_u_to_w(u, t2, me);
        } catch (const NumericalBreakdown&) {
            continue;
        }
        if (!s.strict()) continue;
        const auto back = elliptic_w_to_u(s, me);
        for (int a = 0; a < 3; ++a) worst = std::max(worst, rel(back[a], u[a]));
        // w -> u -> w with t2 fixed by prod z / prod w
        SeparatedCoordinates w;
        w.kind = SovCase::Elliptic;
        w.C = std::polar(0.5 + U(rng), 2 * M_PI * U(rng));
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            const cplx x = annulus();
            for (const auto& z : me.z) ok = ok && lattice_distance(x / z, p) > 0.3;
            for (const auto& y : w.w) ok = ok && lattice_distance(x / y, p) > 0.3;
            w.w.push_back(x);
        }
        cplx tt = 1.0;
        for (const auto& z : me.z) tt *= z;
        for (const auto& x : w.w) tt /= x;
        if (!ok || lattice_distance(tt, p) < 0.3) continue;
        w.t2 = canonicalize(tt, p).z;
        sort_points(w.w);
        const auto r = elliptic_u_to_w(elliptic_w_to_u(w, me), w.t2, me);
        worst = std::max(worst, rel(r.C, w.C));
        for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(r.w[i] - w.w[i]));
        ++done;
    }
    o.check(worst < 1e-8, "elliptic roundtrip residual " + sci(worst));
    if (o.pass) o.detail = "100 instances per direction and case, max residual rational " + sci(wr) + ", elliptic " + sci(worst);
    return o;
}

Outcome criterion5()
{
    Outcome o;
    double worst = 0;
    int reports = 0;
    for (cplx q : {cplx{0.05}, cplx{0.1, 0.05}}) {
        std::vector<GaudinModel> ms{
            elliptic({cplx{0.6, 0.1}, cplx{-0.3, 0.5}}, {-0.5, -0.5}, q),
            elliptic({cplx{0.6, 0.1}, cplx{-0.3, 0.5}, cplx{-0.2, -0.45}}, {-0.5, cplx{0.3, 0.2}, -1.5}, q),
        };
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const auto m = with_synthetic_mu(ms[k], 40 + k);
            SovOptions opt;
            opt.trials = 8;
            opt.tol = 1e-7;
            opt.seed = 3 + k;
            const auto reps = verify_elliptic_separation(m, opt);
            reports += static_cast<int>(reps.size());
            absorb(o, reps, worst);
        }
    }
    if (o.pass) o.detail = std::to_string(reports) + " reports (chain, parts, f, h, final form), max residual " + sci(worst);
    return o;
}

// psi = w^{3/2} (w - 1)^{-1/2}, with D = 2 d^2 - sum mu/(w - z) - sum 2 l(l-1)/(w - z)^2.
double closed_form_residual(const std::vector<cplx>& mu, cplx w)
{
    const cplx r = 1.5 / w - 0.5 / (w - 1.0);
    const cplx dr = -1.5 / (w * w) + 0.5 / ((w - 1.0) * (w - 1.0));
    const double c = 2 * (-0.5) * (-1.5);
    const cplx v = mu[0] / w + mu[1] / (w - 1.0) + c / (w * w) + c / ((w - 1.0) * (w - 1.0));
    return std::abs(2.0 * (dr + r * r) - v);
}

Outcome criterion6()
{
    Outcome o;
    double worst = 0;
    std::string counts;
    for (const auto& m : {model({0.0, 1.0}, {-0.5, -0.5}), model({0.0, 1.0, 2.0, 3.0}, {-0.5, -0.5, -0.5, -0.5}),
                          model({0.3, -1.1, cplx{0.2, 1.4}, cplx{-0.7, -0.6}}, {-0.5, -0.5, -0.5, -0.5})}) {
        const auto sols = singlet_bethe_solutions(m);
        const auto spec = joint_spectrum(m);
        const auto rep = spectrum_match(sols, spec, 1e-8);
        o.check(rep.bijection, "no bijection at N = " + std::to_string(m.N) + ": " + std::to_string(sols.size()) +
                                   " Bethe vs " + std::to_string(spec.tuples.size()) + " singlet tuples");
        worst = std::max(worst, rep.max_distance);
        for (const auto& s : sols) {
            const auto v = verify_separated_solution(s, m, 20, 9, 1e-8);
            worst = std::max(worst, v.max_residual);
            o.check(v.pass, "D psi residual " + sci(v.max_residual));
        }
        counts += (counts.empty() ? "" : ", ") + std::to_string(sols.size());
    }
    const auto m2 = model({0.0, 1.0}, {-0.5, -0.5});
    SeparatedSolution cf;
    cf.exponents = {1.5, -0.5};
    cf.mu = mu_from_ansatz_rational(cf, m2);
    o.check(std::abs(cf.mu[0] - 3.0) < 1e-12 && std::abs(cf.mu[1] + 3.0) < 1e-12, "closed form mu is not (3, -3)");
    double cfr = 0;
    for (cplx w : {cplx{0.3, 0.8}, cplx{-1.2, 0.4}, cplx{2.5, -1.0}}) cfr = std::max(cfr, closed_form_residual({3.0, -3.0}, w));
    const auto v = verify_separated_solution(cf, m2, 20, 9, 1e-8);
    o.check(cfr < 1e-12 && v.pass, "closed form residual " + sci(std::max(cfr, v.max_residual)));
    if (o.pass)
        o.detail = "bijections with " + counts + " singlet tuples, max residual " + sci(worst) +
                   "; w^{3/2}(w-1)^{-1/2} gives mu = (3, -3)";
    return o;
}

Outcome criterion7()
{
    Outcome o;
    int found = 0;
    double best = INFINITY;
    std::string note;
    for (cplx q : {cplx{0.1}, cplx{0.1, 0.05}}) {
        const auto m = elliptic({cplx{0.6, 0.1}, cplx{-0.3, 0.5}}, {-0.5, -0.5}, q);
        std::vector<cplx> s{elliptic_exponents(-0.5).first, elliptic_exponents(-0.5).first};
        for (const auto& sol : bethe_solve_elliptic(m, s)) {
            const auto r = elliptic_single_valued_check(sol, m, 20, 1, 1e-6);
            if (r.pass) ++found;
            if (r.max_residual < best) {
                best = r.max_residual;
                note = r.note;
            }
        }
    }
    o.check(found > 0, "no theta-product solution passes; best residual " + sci(best));
    if (o.pass) o.detail = std::to_string(found) + " solutions pass; best: " + note;
    return o;
}

Outcome criterion8()
{
    Outcome o;
    std::vector<harness::RunConfig> cfgs;
    auto add = [&](std::string cmd, SovCase c, int trials) {
        harness::RunConfig r;
        r.command = std::move(cmd);
        r.kind = c;
        r.trials = trials;
        r.seed = 42;
        cfgs.push_back(r);
    };
    add("theta-eval", SovCase::Rational, 100);
    add("identity-suite", SovCase::Rational, 6);
    add("identity-suite", SovCase::Elliptic, 2);
    add("spectrum", SovCase::Rational, 0);
    add("bethe", SovCase::Rational, 0);
    add("bethe", SovCase::Elliptic, 0);
    add("match", SovCase::Rational, 0);

    std::vector<std::string> first;
    for (const auto& c : cfgs) first.push_back(harness::report_json(c, harness::run_suite(c)));
    const auto pooled = harness::run_suites(cfgs, 4);
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        o.check(pooled[k].exit_code == 0, cfgs[k].command + " exit code " + std::to_string(pooled[k].exit_code));
        o.check(first[k] == harness::report_json(cfgs[k], pooled[k]),
                cfgs[k].command + " report differs between runs");
        o.check(pooled[k].csv == harness::run_suite(cfgs[k]).csv, cfgs[k].command + " CSV differs between runs");
    }
    if (o.pass) o.detail = std::to_string(cfgs.size()) + " suites, sequential and pooled reports byte-identical";
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"special functions", criterion1},   {"rational Gaudin oracle", criterion2},
        {"rational separation", criterion3}, {"transform roundtrips", criterion4},
        {"elliptic separation chain", criterion5}, {"Bethe solutions vs spectrum", criterion6},
        {"elliptic theta-product solution", criterion7}, {"determinism", criterion8},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
