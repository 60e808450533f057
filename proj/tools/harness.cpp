#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "gsov/errors.hpp"
#include "gsov/special_functions.hpp"

namespace gsov::harness {

using nlohmann::json;

namespace {

cplx parse_complex(const json& v, const char* what)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ParameterError(std::string(what) + ": expected a number or [re, im]");
}

std::vector<cplx> parse_complex_array(const json& j, const char* key)
{
    if (!j.contains(key)) throw ParameterError(std::string("missing key \"") + key + "\"");
    const auto& v = j.at(key);
    if (!v.is_array()) throw ParameterError(std::string(key) + ": expected an array");
    std::vector<cplx> out;
    for (const auto& x : v) out.push_back(parse_complex(x, key));
    return out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json complex_array_json(const std::vector<cplx>& v)
{
    json a = json::array();
    for (const auto& z : v) a.push_back(complex_json(z));
    return a;
}

std::string fmt(double x)
{
    char b[40];
    std::snprintf(b, sizeof b, "%.16e", x);
    return b;
}

void dump_rec(std::ostringstream& os, const json& j, int indent, int level)
{
    const std::string pad(indent * (level + 1), ' '), end(indent * level, ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{" << nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << "," << nl;
            first = false;
            os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
            dump_rec(os, it.value(), indent, level + 1);
        }
        os << nl << end << "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // short numeric arrays on one line
        bool flat = j.size() <= 4;
        for (const auto& x : j) flat = flat && x.is_primitive();
        if (flat) {
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                dump_rec(os, j[i], indent, level + 1);
            }
            os << "]";
            return;
        }
        os << "[" << nl;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << "," << nl;
            os << pad;
            dump_rec(os, j[i], indent, level + 1);
        }
        os << nl << end << "]";
        return;
    }
    case json::value_t::number_float: os << fmt(j.get<double>()); return;
    default: os << j.dump(); return;
    }
}

EllipticParams params_for(cplx q, double tol = 1e-16) { return EllipticParams::make(q, tol); }

Record make_record(std::string label, std::string identity, int samples, double res, double tol)
{
    Record r;
    r.label = std::move(label);
    r.identity = std::move(identity);
    r.samples = samples;
    r.max_residual = res;
    r.tol = tol;
    r.pass = std::isfinite(res) && res < tol;
    return r;
}

cplx direct_theta(cplx z, cplx q)
{
    cplx r = 1.0 - z;
    cplx qi = q;
    for (int i = 1; i < 400 && std::abs(qi) > 1e-300; ++i) {
        r *= (1.0 - qi * z) * (1.0 - qi / z);
        qi *= q;
    }
    return r;
}

GaudinModel model_for(const RunConfig& cfg)
{
    GaudinModel m;
    if (cfg.model_path) {
        m = load_model(*cfg.model_path);
        if (cfg.kind && (*cfg.kind == SovCase::Elliptic) != m.is_elliptic())
            throw ParameterError("--case does not match the model file");
    } else {
        m = default_model(cfg.kind.value_or(SovCase::Rational));
    }
    if (m.elliptic && cfg.trunc > 0) m.elliptic->trunc = cfg.trunc;
    return m;
}

json model_json(const GaudinModel& m)
{
    json j;
    j["N"] = m.N;
    j["z"] = complex_array_json(m.z);
    j["lambda"] = complex_array_json(m.lambda);
    if (m.mu) j["mu"] = complex_array_json(*m.mu);
    if (m.elliptic) {
        j["q"] = complex_json(m.elliptic->q);
        j["k"] = m.elliptic->k;
        j["mu0"] = complex_json(m.elliptic->mu0);
    }
    return j;
}

void add_reports(SuiteResult& r, const std::vector<VerificationReport>& reps, const std::string& identity)
{
    for (const auto& x : reps) r.records.push_back(from_report(x, identity));
}

const VerificationReport* find_report(const std::vector<VerificationReport>& reps, const std::string& key)
{
    for (const auto& x : reps)
        if (x.label.find(key) != std::string::npos) return &x;
    return nullptr;
}

// ---------------------------------------------------------------- suites

void suite_theta_eval(const RunConfig& cfg, SuiteResult& r)
{
    const int samples = cfg.trials > 0 ? cfg.trials : 100;
    const double tol = cfg.tol > 0 ? cfg.tol : 1e-8;
    auto p = params_for(cfg.q);
    if (cfg.trunc > 0) p.trunc = cfg.trunc;
    json vals = json::array();
    for (const auto& z : cfg.points) {
        json v;
        v["z"] = complex_json(z);
        v["theta"] = complex_json(theta(z, p));
        v["dlog"] = complex_json(theta_log_deriv(z, p));
        v["wp"] = complex_json(weierstrass_p(z, p));
        vals.push_back(v);
    }
    r.data["q"] = complex_json(cfg.q);
    r.data["trunc"] = p.trunc;
    r.data["values"] = vals;
    for (auto& x : special_function_checks(cfg.q, samples, cfg.seed, tol)) r.records.push_back(std::move(x));
}

void suite_spectrum(const RunConfig& cfg, SuiteResult& r)
{
    const auto m = model_for(cfg);
    if (m.is_elliptic()) throw ParameterError("spectrum: the rational case only");
    const double tol = cfg.tol > 0 ? cfg.tol : 1e-10;
    r.data["model"] = model_json(m);
    const auto rel = rational_operator_relations(m);
    r.records.push_back(make_record("[L_a, L_b] = 0", "rational Hamiltonians", 1, rel.commutators, tol));
    r.records.push_back(make_record("sum L_a = 0", "rational Hamiltonians", 1, rel.sum, tol));
    r.records.push_back(make_record("sum z L + sum 2l(l-1) = ef + fe + h^2/2", "rational Hamiltonians", 1,
                                    rel.first_moment, tol));
    r.records.push_back(make_record("sum z^2 L + sum 4l(l-1) z = 2(e1 f + f1 e + h1 h/2)", "rational Hamiltonians", 1,
                                    rel.second_moment, tol));
    const auto spec = joint_spectrum(m, {}, cfg.seed);
    if (spec.ill_conditioned) throw NumericalBreakdown("joint spectrum is ill-conditioned");
    r.records.push_back(from_report(check_linear_relations(spec, m, tol), "singlet eigenvalue constraints"));
    std::ostringstream csv;
    csv << "sector";
    for (int a = 1; a <= m.N; ++a) csv << ",mu_" << a << "_re,mu_" << a << "_im";
    csv << ",residual\n";
    json rows = json::array();
    for (std::size_t k = 0; k < spec.tuples.size(); ++k) {
        csv << spec.sector.label();
        for (const auto& x : spec.tuples[k]) csv << "," << fmt(x.real()) << "," << fmt(x.imag());
        csv << "," << fmt(spec.residuals[k]) << "\n";
        json row;
        row["mu"] = complex_array_json(spec.tuples[k]);
        row["residual"] = spec.residuals[k];
        rows.push_back(row);
    }
    r.data["sector"] = spec.sector.label();
    r.data["tuples"] = rows;
    r.csv = csv.str();
}

void suite_sov(const RunConfig& cfg, SuiteResult& r, bool controls)
{
    auto m = model_for(cfg);
    if (!m.mu) {
        m = with_synthetic_mu(m, cfg.seed);
        r.data["mu_source"] = "synthetic";
    } else {
        r.data["mu_source"] = "model";
    }
    r.data["model"] = model_json(m);
    SovOptions o;
    o.seed = cfg.seed;
    if (!m.is_elliptic()) {
        o.trials = cfg.trials > 0 ? cfg.trials : 20;
        o.tol = cfg.tol > 0 ? cfg.tol : 1e-8;
        add_reports(r, verify_rational_separation(m, o), "rational separation");
        if (!controls) return;
        auto op = o;
        op.reading = WeightReading::Printed;
        const auto pr = verify_rational_separation(m, op);
        if (auto x = find_report(pr, "rational (a)")) r.records.push_back(negative_control(*x, "weight nu = lambda"));
        if (auto x = find_report(pr, "rational (d)")) r.records.push_back(negative_control(*x, "weight nu = lambda"));
        auto of = o;
        of.flip_A = true;
        const auto fr = verify_rational_separation(m, of);
        if (auto x = find_report(fr, "rational (d)")) r.records.push_back(negative_control(*x, "A -> -A"));
        return;
    }
    o.trials = cfg.trials > 0 ? cfg.trials : 6;
    o.tol = cfg.tol > 0 ? cfg.tol : 1e-7;
    add_reports(r, verify_elliptic_separation(m, o), "elliptic separation");
    if (!controls) return;
    auto of = o;
    of.flip_A = true;
    const auto fr = verify_elliptic_separation(m, of);
    if (auto x = find_report(fr, "elliptic (d)")) r.records.push_back(negative_control(*x, "A -> -A"));
    const auto sov = make_elliptic_sov(m, WeightReading::Dual, cfg.seed);
    const auto chain = build_elliptic_chain(sov, 0);
    EqualOptions eo;
    eo.samples = o.trials;
    eo.tol = o.tol;
    eo.seed = cfg.seed;
    const auto fam = twisted_family(sov, 4, cfg.seed + 1);
    const auto rep = op_equal_on(chain.hat.L, elliptic_separated_form(sov, 0, true), fam, elliptic_locus_sampler(m), eo,
                                 "elliptic (d) with A = -sum (nu+1) g(w/z) and +2l(l-1) wp [w1]");
    r.records.push_back(negative_control(rep, "printed separated form"));
}

void suite_identity(const RunConfig& cfg, SuiteResult& r)
{
    auto m = model_for(cfg);
    if (m.is_elliptic()) {
        const int samples = cfg.trials > 0 ? std::max(cfg.trials, 20) : 100;
        for (auto& x : special_function_checks(m.elliptic->q, samples, cfg.seed)) r.records.push_back(std::move(x));
    } else {
        const auto rel = rational_operator_relations(m);
        const double t = 1e-10;
        r.records.push_back(make_record("[L_a, L_b] = 0", "rational Hamiltonians", 1, rel.commutators, t));
        r.records.push_back(make_record("sum L_a = 0", "rational Hamiltonians", 1, rel.sum, t));
        r.records.push_back(make_record("first moment relation", "rational Hamiltonians", 1, rel.first_moment, t));
        r.records.push_back(make_record("second moment relation", "rational Hamiltonians", 1, rel.second_moment, t));
        const auto spec = joint_spectrum(m, {}, cfg.seed);
        r.records.push_back(from_report(check_linear_relations(spec, m, t), "singlet eigenvalue constraints"));
    }
    suite_sov(cfg, r, true);
}

void suite_bethe(const RunConfig& cfg, SuiteResult& r)
{
    const auto m = model_for(cfg);
    r.data["model"] = model_json(m);
    BetheOptions bo;
    bo.seeds = cfg.seeds;
    bo.seed = cfg.seed;
    const int samples = cfg.trials > 0 ? cfg.trials : 20;
    json sols_json = json::array();
    std::vector<SeparatedSolution> sols;
    int failures = 0;
    if (!m.is_elliptic()) {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-8;
        if (cfg.roots >= 0) {
            std::vector<cplx> s;
            for (const auto& l : m.lambda) s.push_back(indicial_exponents(l).first);
            sols = bethe_solve_rational(m, cfg.roots, s, bo, &failures);
        } else {
            sols = singlet_bethe_solutions(m, bo);
        }
        for (std::size_t k = 0; k < sols.size(); ++k) {
            auto rep = verify_separated_solution(sols[k], m, samples, cfg.seed, tol);
            rep.label += " [solution " + std::to_string(k + 1) + "]";
            r.records.push_back(from_report(rep, "separated solution"));
        }
    } else {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-6;
        std::vector<cplx> s;
        cplx sum{};
        for (const auto& l : m.lambda) {
            s.push_back(elliptic_exponents(l).first);
            sum += s.back();
        }
        if (cfg.roots >= 0 && std::abs(sum - double(cfg.roots)) > 1e-9)
            throw ParameterError("--roots must equal sum(-lambda) for a single-valued product");
        sols = bethe_solve_elliptic(m, s, bo, &failures);
        for (std::size_t k = 0; k < sols.size(); ++k) {
            auto rep = elliptic_single_valued_check(sols[k], m, samples, cfg.seed, tol);
            rep.label += " [solution " + std::to_string(k + 1) + "]";
            r.records.push_back(from_report(rep, "theta-product solution"));
        }
    }
    for (const auto& s : sols) {
        json j;
        j["roots"] = complex_array_json(s.roots);
        j["exponents"] = complex_array_json(s.exponents);
        j["mu"] = complex_array_json(s.mu);
        if (s.kind == SovCase::Elliptic) j["mu0"] = complex_json(s.mu0);
        j["bethe_residual"] = s.bethe_residual;
        sols_json.push_back(j);
    }
    r.data["solutions"] = sols_json;
    r.data["failed_seeds"] = failures;
    if (sols.empty()) r.records.push_back(make_record("at least one converged solution", "bethe", 0, INFINITY, 1.0));
}

void suite_match(const RunConfig& cfg, SuiteResult& r)
{
    const auto m = model_for(cfg);
    if (m.is_elliptic()) throw ParameterError("match: the rational case only");
    const double tol = cfg.tol > 0 ? cfg.tol : 1e-8;
    r.data["model"] = model_json(m);
    BetheOptions bo;
    bo.seeds = cfg.seeds;
    bo.seed = cfg.seed;
    const auto sols = singlet_bethe_solutions(m, bo);
    const auto spec = joint_spectrum(m, {}, cfg.seed);
    const auto rep = spectrum_match(sols, spec, tol);
    Record rec = make_record("Bethe mu tuples biject with singlet tuples", "spectrum match", int(sols.size()),
                             rep.max_distance, tol);
    rec.pass = rep.bijection;
    rec.note = std::to_string(rep.pairs.size()) + " pairs, " + std::to_string(rep.unmatched_bethe.size()) +
               " unmatched Bethe, " + std::to_string(rep.unmatched_spectrum.size()) + " unmatched spectrum";
    r.records.push_back(rec);
    for (std::size_t k = 0; k < sols.size(); ++k) {
        auto v = verify_separated_solution(sols[k], m, cfg.trials > 0 ? cfg.trials : 20, cfg.seed, tol);
        v.label += " [solution " + std::to_string(k + 1) + "]";
        r.records.push_back(from_report(v, "separated solution"));
    }
    json pairs = json::array();
    for (const auto& [i, j] : rep.pairs) pairs.push_back(json::array({i, j}));
    r.data["pairs"] = pairs;
    r.data["bethe_count"] = sols.size();
    r.data["spectrum_count"] = spec.tuples.size();
}

}  // namespace

GaudinModel parse_model(const json& j)
{
    if (!j.is_object()) throw ParameterError("model: expected a JSON object");
    GaudinModel m;
    if (!j.contains("N") || !j.at("N").is_number_integer()) throw ParameterError("missing integer key \"N\"");
    m.N = j.at("N").get<int>();
    m.z = parse_complex_array(j, "z");
    m.lambda = parse_complex_array(j, "lambda");
    if (j.contains("mu")) m.mu = parse_complex_array(j, "mu");
    if (j.contains("q")) {
        EllipticData d;
        d.q = parse_complex(j.at("q"), "q");
        if (j.contains("k")) d.k = j.at("k").get<int>();
        if (d.k != 0) throw ParameterError("only k = 0 is supported");
        if (j.contains("mu0")) d.mu0 = parse_complex(j.at("mu0"), "mu0");
        m.elliptic = d;
    } else if (j.contains("k") || j.contains("mu0")) {
        throw ParameterError("\"k\" and \"mu0\" need an elliptic model (key \"q\")");
    }
    m.validate();
    return m;
}

GaudinModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open model file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("model file does not parse: ") + e.what());
    }
    return parse_model(j);
}

GaudinModel default_model(SovCase kind)
{
    GaudinModel m;
    if (kind == SovCase::Rational) {
        m.N = 3;
        m.z = {0.0, 1.0, cplx{0.4, 1.2}};
        m.lambda = {-0.5, -0.5, -1.0};
        return m;
    }
    m.N = 2;
    m.z = {cplx{0.6, 0.1}, cplx{-0.3, 0.5}};
    m.lambda = {-0.5, -0.5};
    EllipticData d;
    d.q = 0.1;
    m.elliptic = d;
    return m;
}

Record from_report(const VerificationReport& r, const std::string& identity)
{
    Record x;
    x.label = r.label;
    x.identity = identity;
    x.samples = r.samples;
    x.max_residual = r.max_residual;
    x.tol = r.tol;
    x.pass = r.pass;
    x.note = r.note;
    return x;
}

Record negative_control(const VerificationReport& r, const std::string& identity)
{
    Record x = from_report(r, "negative control: " + identity);
    x.label = r.label + " (must fail)";
    x.pass = !r.pass;
    return x;
}

std::vector<Record> special_function_checks(cplx q, int samples, std::uint64_t seed, double tol)
{
    const auto p = params_for(q);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double lq = std::log(std::abs(q));
    auto annulus = [&]() {
        for (;;) {
            const cplx z = std::exp(cplx{lq * (0.02 + 0.96 * U(rng)), 2 * M_PI * U(rng)});
            if (lattice_distance(z, p) > 0.2) return z;
        }
    };
    double qp = 0, inv = 0, direct = 0, deg = 0, lead = 0, law = 0, gq = 0, ginv = 0;
    const double sigma = kKernelProductSign;
    const cplx qsmall = 1e-10 * q / std::abs(q);
    const auto p0 = params_for(qsmall);
    for (int k = 0; k < samples; ++k) {
        const cplx z = annulus();
        const cplx t = theta(z, p);
        const double s = std::abs(t / z) + 1e-300;
        qp = std::max(qp, std::abs(theta(q * z, p) + t / z) / s);
        inv = std::max(inv, std::abs(theta(1.0 / z, p) + t / z) / s);
        direct = std::max(direct, std::abs(t - direct_theta(z, q)) / (std::abs(t) + 1e-300));
        gq = std::max(gq, std::abs(theta_log_deriv(q * z, p) - theta_log_deriv(z, p) + 1.0) /
                              (1.0 + std::abs(theta_log_deriv(z, p))));
        ginv = std::max(ginv, std::abs(theta_log_deriv(1.0 / z, p) - 1.0 + theta_log_deriv(z, p)) /
                                  (1.0 + std::abs(theta_log_deriv(z, p))));
        deg = std::max(deg, std::abs(theta(z, p0) - (1.0 - z)));
        const cplx tau = std::polar(1e-4, 2 * M_PI * U(rng));
        lead = std::max(lead, std::abs(tau * tau * weierstrass_p(std::exp(tau), p) - 1.0));
        const cplx w = annulus();
        if (lattice_distance(z / w, p) < 0.2 || lattice_distance(z * w, p) < 0.2) continue;
        const cplx lhs = unit_residue_kernel(z, w, p) * unit_residue_kernel(1.0 / z, w, p);
        const cplx rhs = sigma * (weierstrass_p(z, p) - weierstrass_p(w, p));
        law = std::max(law, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    const std::string id = "special functions";
    return {make_record("theta(q z) = -theta(z) / z", id, samples, qp, tol),
            make_record("theta(1/z) = -theta(z) / z", id, samples, inv, tol),
            make_record("theta against the direct product", id, samples, direct, tol),
            make_record("g(q z) = g(z) - 1", id, samples, gq, tol),
            make_record("g(1/z) = 1 - g(z)", id, samples, ginv, tol),
            make_record("theta -> 1 - z as q -> 0 (|q| = 1e-10)", id, samples, deg, tol),
            make_record("tau^2 wp(exp tau) -> 1 (|tau| = 1e-4)", id, samples, lead, tol),
            make_record("phiK(x,w) phiK(1/x,w) = sigma (wp(x) - wp(w)), sigma = -1", id, samples, law, tol)};
}

SuiteResult run_suite(const RunConfig& cfg)
{
    SuiteResult r;
    try {
        if (cfg.tol < 0) throw ParameterError("--tol must be positive");
        if (cfg.trials < 0) throw ParameterError("--trials must be positive");
        if (cfg.command == "theta-eval")
            suite_theta_eval(cfg, r);
        else if (cfg.command == "spectrum")
            suite_spectrum(cfg, r);
        else if (cfg.command == "sov-check")
            suite_sov(cfg, r, false);
        else if (cfg.command == "identity-suite")
            suite_identity(cfg, r);
        else if (cfg.command == "bethe")
            suite_bethe(cfg, r);
        else if (cfg.command == "match")
            suite_match(cfg, r);
        else
            throw ParameterError("unknown subcommand " + cfg.command);
    } catch (const ParameterError& e) {
        r.exit_code = InvalidInput;
        r.error = e.what();
        return r;
    } catch (const std::exception& e) {
        r.exit_code = Breakdown;
        r.error = e.what();
        return r;
    }
    r.exit_code = Pass;
    for (const auto& x : r.records)
        if (!x.pass) r.exit_code = IdentityFailure;
    return r;
}

std::vector<SuiteResult> run_suites(const std::vector<RunConfig>& cfgs, unsigned workers)
{
    std::vector<SuiteResult> out(cfgs.size());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cfgs.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < cfgs.size();) out[i] = run_suite(cfgs[i]);
    };
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
    return out;
}

std::string dump_scientific(const json& j, int indent)
{
    std::ostringstream os;
    dump_rec(os, j, indent, 0);
    return os.str();
}

std::string report_json(const RunConfig& cfg, const SuiteResult& r)
{
    json j;
    j["command"] = cfg.command;
    j["seed"] = cfg.seed;
    j["exit_code"] = r.exit_code;
    if (!r.error.empty()) j["error"] = r.error;
    json recs = json::array();
    bool all = true;
    for (const auto& x : r.records) {
        json o;
        o["label"] = x.label;
        o["identity"] = x.identity;
        o["samples"] = x.samples;
        o["max_residual"] = x.max_residual;
        o["tol"] = x.tol;
        o["pass"] = x.pass;
        if (!x.note.empty()) o["note"] = x.note;
        recs.push_back(o);
        all = all && x.pass;
    }
    j["records"] = recs;
    j["all_pass"] = all && r.exit_code == Pass;
    j["data"] = r.data;
    return dump_scientific(j) + "\n";
}

}  // namespace gsov::harness
