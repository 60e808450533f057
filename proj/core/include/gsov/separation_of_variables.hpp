#ifndef GSOV_SEPARATION_OF_VARIABLES_HPP
#define GSOV_SEPARATION_OF_VARIABLES_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gsov/gaudin_models.hpp"
#include "gsov/operator_algebra.hpp"
#include "gsov/special_functions.hpp"

namespace gsov {

enum class SovCase { Rational, Elliptic };

struct SeparatedCoordinates {
    SovCase kind = SovCase::Rational;
    cplx C{};
    std::vector<cplx> w;  // rational: finite zeros; elliptic: annulus representatives
    int inf_mult = 0;     // rational only
    cplx t2{};            // elliptic only
    /// Elliptic: t2 * prod w = q^abel_shift * prod z. The chart (and C) use the
    /// representatives with the first point in sort order multiplied by q^{-abel_shift}.
    int abel_shift = 0;
    std::vector<int> touching;  // indices i with w_i on a marked point (chart boundary)
    bool coincident = false;    // two w_i coincide

    bool strict() const { return inf_mult == 0 && touching.empty() && !coincident; }
};

/// Order used for separated points: principal argument, then modulus.
void sort_points(std::vector<cplx>& w);

/// Removes the mean so that sum u = 0.
std::vector<cplx> project_sum_zero(std::vector<cplx> u);

/// Random eigenvalue tuple projected onto the linear constraints (the three
/// rational relations, or sum mu = 0 in the elliptic case; mu0 is drawn too).
GaudinModel with_synthetic_mu(GaudinModel m, std::uint64_t seed);

bool incidence_check(const std::vector<cplx>& u, const std::vector<cplx>& t, double tol = 1e-10);

// ---------------------------------------------------------------- rational

/// Coefficients (ascending) of P(z) = sum_a u_a prod_{b != a} (z - z_b).
std::vector<cplx> numerator_polynomial(const std::vector<cplx>& u, const std::vector<cplx>& z);

/// Roots of an ascending coefficient vector (companion matrix plus Newton polish).
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs);

/// Zeros of sum u_a / (z - z_a) with sum u = 0. Throws DomainError when u = 0 or sum u != 0.
SeparatedCoordinates rational_u_to_w(const std::vector<cplx>& u, const GaudinModel& m, double tol = 1e-10);

/// u_a = C prod_i (z_a - w_i) / prod_{b != a} (z_a - z_b).
std::vector<cplx> rational_w_to_u(const SeparatedCoordinates& s, const GaudinModel& m);

std::vector<std::string> rational_u_vars(int N);
/// (C, w1..w_{N-2}, eps), eps = 1/w_{N-1}; the separation locus is eps = 0.
std::vector<std::string> rational_y_vars(int N);

/// Chart y -> u, u_a = C (1 - eps z_a) prod_j (z_a - w_j) / prod_{b != a} (z_a - z_b),
/// so that sum u_a / (z - z_a) = C (1 - eps z) prod (z - w_j) / prod (z - z_b) and sum u = -C eps.
std::shared_ptr<const CoordinateMap> sov_jacobian_rational(const GaudinModel& m);

/// Chart point of locus coordinates (eps = 0).
Point rational_chart_point(const SeparatedCoordinates& s);

/// Zero of sum u_a / (z - z_a) reached by Newton from w_ref, for arbitrary u.
cplx rational_track_zero(const std::vector<cplx>& u, const GaudinModel& m, cplx w_ref);

// ---------------------------------------------------------------- Radon side

/// e = -(u d^2 + 2 (nu + 1) d), f = u, h = -2 (u d + nu + 1) in vars[idx].
Sl2Triple radon_generators(const std::vector<std::string>& vars, int idx, cplx nu);

/// Parameter fed to radon_generators for a site of weight lambda. The
/// transform t -> d_u, d_t -> -u carries site_generators(lambda) to
/// radon_generators(-lambda).
enum class WeightReading {
    Dual,    // nu = -lambda (transform of the t-realization)
    Printed  // nu = lambda
};
cplx radon_parameter(cplx lambda, WeightReading r);

struct HatOperators {
    DifferentialOperator e, f, h, L;
};

struct RationalSov {
    GaudinModel model;
    std::vector<cplx> nu;
    std::shared_ptr<const CoordinateMap> chart;
    std::vector<Sl2Triple> bar;          // u variables
    std::vector<DifferentialOperator> L;  // barred L_a, u variables
};

RationalSov make_rational_sov(const GaudinModel& m, WeightReading reading = WeightReading::Dual);

/// Hatted operators at w_i (i < N - 2), in chart variables. Requires mu.
HatOperators build_hat_operators_rational(const RationalSov& sov, int i);

/// A(w_i) = sum (nu_a + 1) / (w_i - z_a) as a chart function.
CoeffFn rational_A(const RationalSov& sov, int i);

struct SovOptions {
    int trials = 12;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    WeightReading reading = WeightReading::Dual;
    /// Mutation: flip the sign of A in the assembled right-hand sides.
    bool flip_A = false;
};

/// Items (a) ef+fe+h^2/2 identity, (b) f = 0, (c) h pullback, (d) final
/// formula, for every separated point. Requires mu.
std::vector<VerificationReport> verify_rational_separation(const GaudinModel& m, const SovOptions& opt = {});

// ---------------------------------------------------------------- elliptic

/// F(z) = sum u_a theta(s z / z_a) / (theta(s) theta(z / z_a)).
cplx elliptic_section(const std::vector<cplx>& u, cplx s, const GaudinModel& m, cplx z);

struct EllipticRootOptions {
    std::uint64_t seed = 1;
    int max_seam_tries = 16;
    double tol = 1e-10;
};

/// Zeros of F on the fundamental annulus by contour power sums and Newton, C
/// by the residue at z_1, Abel shift from t2 prod w = q^m prod z.
SeparatedCoordinates elliptic_u_to_w(const std::vector<cplx>& u, cplx t2, const GaudinModel& m,
                                     const EllipticRootOptions& opt = {});

/// u_a = C prod theta(z_a / w_i) / prod_{b != a} theta(z_a / z_b) over the chart representatives.
/// Throws DomainError if t2 prod w != prod z mod q^Z.
std::vector<cplx> elliptic_w_to_u(const SeparatedCoordinates& s, const GaudinModel& m, double tol = 1e-8);

/// Chart representatives of the separated points.
std::vector<cplx> chart_representatives(const SeparatedCoordinates& s, const GaudinModel& m, double tol = 1e-8);

std::vector<std::string> elliptic_u_vars(int N);  // (s, u1..uN)
std::vector<std::string> elliptic_y_vars(int N);  // (C, w1..wN)

/// Chart y -> (s, u): s = prod z / prod w, u_a = C prod theta(z_a / w_i) / prod_{b != a} theta(z_a / z_b).
std::shared_ptr<const CoordinateMap> sov_jacobian_elliptic(const GaudinModel& m);

Point elliptic_chart_point(const SeparatedCoordinates& s, const GaudinModel& m);

/// Zero of F(., u, s) obtained by Newton from w_ref.
cplx elliptic_track_zero(const std::vector<cplx>& u, cplx s, const GaudinModel& m, cplx w_ref);

struct EllipticSov {
    GaudinModel model;
    EllipticParams params;
    std::vector<cplx> nu;
    std::shared_ptr<const CoordinateMap> chart;
    std::vector<Sl2Triple> bar;  // (s, u) variables
    EllipticHamiltonians H;      // barred coefficient operators
};

EllipticSov make_elliptic_sov(const GaudinModel& m, WeightReading reading = WeightReading::Dual,
                              std::uint64_t seed = 1);

/// Pieces of the difference computation at w_i, all in chart variables.
struct EllipticChain {
    HatOperators hat;
    DifferentialOperator diff;  // -L + (ef + fe + h^2/2) - mu0 - sum mu g - sum 2l(l-1) wp
    // kernel terms (phi K second derivatives) and g terms, split into u d_u and constant parts
    DifferentialOperator kernel_u, kernel_c, g_u, g_c;
    DifferentialOperator s_term;  // sum_b (s d_s g(w_i/z_b)) h_b, u fixed
    DifferentialOperator s_term_u, s_term_c;  // its u d_u and constant parts
    DifferentialOperator q_wp;    // sum_a wp(w_i/z_a) Q_a
    DifferentialOperator euler;   // C d_C
    DifferentialOperator wdw;     // w_i d/dw_i in the chart
};

EllipticChain build_elliptic_chain(const EllipticSov& sov, int i);

/// Weight sum Lambda = sum (nu_a + 1); the twisted family is C^{-Lambda} G(w).
cplx twist_exponent(const EllipticSov& sov);

/// Test functions C^{-Lambda} exp(sum c_j w_j + d_j w_j^2) with random c, d.
std::vector<TestFunction> twisted_family(const EllipticSov& sov, int count, std::uint64_t seed);

/// Chart points (C, w) with the w_i, w_i / z_a, w_i / w_j and s kept away from q^Z.
Sampler elliptic_locus_sampler(const GaudinModel& m);

/// Right-hand side of the separated form of L(w_i) on the twisted family:
/// 2 (w d_w + A)^2 - mu0 - sum mu g(w/z) - sum 2 l(l-1) wp(w/z),
/// A = -sum (nu + 1) g(z / w). With `printed` set: A = -sum (nu + 1) g(w / z)
/// and +sum 2 l(l-1) wp.
DifferentialOperator elliptic_separated_form(const EllipticSov& sov, int i, bool printed = false);

/// Items (a) chain decomposition, (b) u d_u parts, (c) constant parts, (d) final
/// formula on the twisted family, plus f = 0 and the h identity.
std::vector<VerificationReport> verify_elliptic_separation(const GaudinModel& m, const SovOptions& opt = {});

// ---------------------------------------------------------------- separated operators

enum class SeparatedSign {
    Derived,  // elliptic double-pole term -2 l(l-1) wp, exponents {l, 1-l}
    Printed   // elliptic +2 l(l-1) wp
};

/// Rational: 2 d^2 - sum mu/(w - z) - sum 2 l(l-1)/(w - z)^2 in variable "w".
/// Elliptic: 2 (w d)^2 - mu0 - sum mu g(w/z) -+ sum 2 l(l-1) wp(w/z).
DifferentialOperator separated_operator(const GaudinModel& m, SeparatedSign sign = SeparatedSign::Derived);

}  // namespace gsov

#endif
