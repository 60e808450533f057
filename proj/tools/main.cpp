#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "harness.hpp"

namespace {

std::complex<double> parse_point(const std::string& s)
{
    // "re" or "re,im"
    const auto c = s.find(',');
    if (c == std::string::npos) return {std::stod(s), 0.0};
    return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
}

bool write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) return false;
    f << text;
    return bool(f);
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace gsov::harness;
    CLI::App app{"Gaudin separation of variables: verification harness"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string model, kase, out, csv, q_text = "0.1";
    std::vector<std::string> pts;
    const std::map<std::string, gsov::SovCase> cases{{"rational", gsov::SovCase::Rational},
                                                     {"elliptic", gsov::SovCase::Elliptic}};

    auto common = [&](CLI::App* s) {
        s->add_option("--tol", cfg.tol, "tolerance (default per suite)");
        s->add_option("--trials", cfg.trials, "sample points per identity");
        s->add_option("--seed", cfg.seed, "RNG seed");
        s->add_option("--trunc", cfg.trunc, "theta product truncation (0: from tolerance)");
        s->add_option("--out", out, "write the JSON report here instead of stdout");
    };
    auto with_model = [&](CLI::App* s) {
        s->add_option("--model", model, "model JSON file")->check(CLI::ExistingFile);
        s->add_option("--case", kase, "rational or elliptic (default model)")
            ->check(CLI::IsMember({"rational", "elliptic"}));
    };

    auto* th = app.add_subcommand("theta-eval", "theta, g and wp at points plus special-function identities");
    common(th);
    th->add_option("--q", q_text, "nome, re or re,im");
    th->add_option("--z", pts, "evaluation points, re or re,im");

    auto* sp = app.add_subcommand("spectrum", "joint singlet spectrum of the rational Hamiltonians");
    common(sp);
    with_model(sp);
    sp->add_option("--csv", csv, "write the spectrum table as CSV");

    auto* sv = app.add_subcommand("sov-check", "separation identities on random points");
    common(sv);
    with_model(sv);

    auto* id = app.add_subcommand("identity-suite", "all identities for a model, with negative controls");
    common(id);
    with_model(id);

    auto* be = app.add_subcommand("bethe", "solutions of the separated equation");
    common(be);
    with_model(be);
    be->add_option("--roots", cfg.roots, "number of roots (rational: fixed exponents lambda)");
    be->add_option("--seeds", cfg.seeds, "random starts");

    auto* ma = app.add_subcommand("match", "Bethe mu tuples against the singlet spectrum");
    common(ma);
    with_model(ma);
    ma->add_option("--seeds", cfg.seeds, "random starts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : InvalidInput;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (!model.empty()) cfg.model_path = model;
    if (!kase.empty()) cfg.kind = cases.at(kase);
    cfg.out = out;
    cfg.csv = csv;
    try {
        cfg.q = parse_point(q_text);
        for (const auto& p : pts) cfg.points.push_back(parse_point(p));
    } catch (const std::exception&) {
        std::cerr << "error: malformed complex number\n";
        return InvalidInput;
    }

    const auto r = run_suite(cfg);
    const auto text = report_json(cfg, r);
    if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
    if (out.empty()) {
        std::cout << text;
    } else if (!write_file(out, text)) {
        std::cerr << "error: cannot write " << out << "\n";
        return InvalidInput;
    }
    if (!csv.empty() && !r.csv.empty() && !write_file(csv, r.csv)) {
        std::cerr << "error: cannot write " << csv << "\n";
        return InvalidInput;
    }
    for (const auto& x : r.records)
        if (!x.pass) std::cerr << "FAIL " << x.label << " residual " << x.max_residual << " tol " << x.tol << "\n";
    return r.exit_code;
}
