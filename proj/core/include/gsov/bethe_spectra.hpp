#ifndef GSOV_BETHE_SPECTRA_HPP
#define GSOV_BETHE_SPECTRA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsov/gaudin_models.hpp"
#include "gsov/operator_algebra.hpp"
#include "gsov/separation_of_variables.hpp"

namespace gsov {

/// Rational: psi(w) = prod (w - a_i) prod (w - z_a)^{s_a}.
/// Elliptic: psi(z) = prod theta(z a_i) / prod theta(z / z_a)^{s_a}.
struct SeparatedSolution {
    SovCase kind = SovCase::Rational;
    std::vector<cplx> roots;
    std::vector<cplx> exponents;
    std::vector<cplx> mu;
    cplx mu0{};  // elliptic only
    bool converged = true;
    double bethe_residual = 0.0;
    std::string note;
};

/// Frobenius exponents (lambda, 1 - lambda) of the rational separated operator at z_a.
std::pair<cplx, cplx> indicial_exponents(cplx lambda);

/// Admissible s_a in the elliptic product, (-lambda, lambda - 1); they give
/// theta(z/z_a)^{lambda} and theta(z/z_a)^{1-lambda} in the numerator.
std::pair<cplx, cplx> elliptic_exponents(cplx lambda);

/// mu_a = 4 s_a (sum_i 1/(z_a - a_i) + sum_{b != a} s_b / (z_a - z_b)).
std::vector<cplx> mu_from_ansatz_rational(const SeparatedSolution& sol, const GaudinModel& m);

/// r_i = sum_{j != i} 1/(a_i - a_j) + sum_b s_b / (a_i - z_b). Throws DomainError on coincident roots.
std::vector<cplx> bethe_equations_rational(const SeparatedSolution& sol, const GaudinModel& m);

struct BetheOptions {
    int seeds = 32;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int max_iter = 200;
    double dedupe_tol = 1e-7;
};

/// Newton on Q P'' + 2 S P' = V P (P = prod (w - a_i), deg V = N - 2) from at least
/// max(seeds, 6 C(n + N - 2, N - 2)) random starts, then root polish on the Bethe
/// equations; converged solutions carry mu,
/// deduplicated up to permutation. Non-converged seeds are dropped and counted in `failures`.
std::vector<SeparatedSolution> bethe_solve_rational(const GaudinModel& m, int n_roots, const std::vector<cplx>& exponents,
                                                    const BetheOptions& opt = {}, int* failures = nullptr);

/// Exponent patterns s with n = -sum s a nonnegative integer (psi ~ w^0 at infinity);
/// the Bethe solutions of every pattern, keeping mu tuples that satisfy the three
/// rational constraints, one solution per distinct mu.
std::vector<SeparatedSolution> singlet_bethe_solutions(const GaudinModel& m, const BetheOptions& opt = {});

/// Max |D psi / psi| at sample points, D the separated operator with the solution's
/// mu (and mu0), psi applied through the operator engine.
VerificationReport verify_separated_solution(const SeparatedSolution& sol, const GaudinModel& m, int samples = 20,
                                             std::uint64_t seed = 1, double tol = 1e-8);

/// psi as a test function in the variable of separated_operator.
TestFunction separated_psi(const SeparatedSolution& sol, const GaudinModel& m);

// ---------------------------------------------------------------- elliptic

/// r_i = 1/2 + sum_{j != i} g(a_j / a_i) - sum_a s_a g(1 / (a_i z_a)).
std::vector<cplx> bethe_equations_elliptic(const SeparatedSolution& sol, const GaudinModel& m);

/// mu_a = -4 s_a rho_a, rho_a = -s_a/2 + sum_i g(z_a a_i) - sum_{b != a} s_b g(z_a / z_b);
/// mu0 from the regular part at a base point.
void mu_from_ansatz_elliptic(SeparatedSolution& sol, const GaudinModel& m);

/// Requires #roots = sum s (otherwise the product is not single-valued).
std::vector<SeparatedSolution> bethe_solve_elliptic(const GaudinModel& m, const std::vector<cplx>& exponents,
                                                    const BetheOptions& opt = {}, int* failures = nullptr);

/// z-independence of psi(qz)/psi(z) through z d/dz of its log at sample points,
/// together with D psi / psi. `note` carries the multiplier at a base point.
VerificationReport elliptic_single_valued_check(const SeparatedSolution& sol, const GaudinModel& m, int samples = 20,
                                                std::uint64_t seed = 1, double tol = 1e-6);

// ---------------------------------------------------------------- matching

struct MatchReport {
    std::vector<std::pair<int, int>> pairs;  // (bethe index, spectrum index)
    std::vector<int> unmatched_bethe;
    std::vector<int> unmatched_spectrum;
    double max_distance = 0.0;
    bool bijection = false;
};

/// Greedy matching of mu tuples by max-abs distance within tol.
MatchReport spectrum_match(const std::vector<SeparatedSolution>& bethe, const SpectrumResult& s, double tol = 1e-8);

}  // namespace gsov

#endif
