#ifndef GSOV_GAUDIN_MODELS_HPP
#define GSOV_GAUDIN_MODELS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gsov/operator_algebra.hpp"
#include "gsov/special_functions.hpp"

namespace gsov {

struct EllipticData {
    cplx q{};
    int k = 0;  // twist; only k = 0 is exercised
    cplx mu0{};
    int trunc = 0;  // 0: choose from tol
    double tol = 1e-16;
};

struct GaudinModel {
    int N = 0;
    std::vector<cplx> z;
    std::vector<cplx> lambda;
    std::optional<EllipticData> elliptic;
    std::optional<std::vector<cplx>> mu;

    bool is_elliptic() const { return elliptic.has_value(); }
    EllipticParams params() const;

    /// Structural checks plus the eigenvalue constraints when mu is present.
    /// Throws ParameterError naming the violated constraint.
    void validate(double tol = 1e-8) const;
};

/// Residuals of sum mu, sum mu z + sum 2 lambda(lambda-1), and
/// sum mu z^2 + sum 4 lambda(lambda-1) z.
std::array<cplx, 3> rational_mu_constraints(const GaudinModel& m, const std::vector<cplx>& mu);

// ---------------------------------------------------------------- matrices

using SparseMat = Eigen::SparseMatrix<cplx>;

struct Sl2Rep {
    cplx lambda{};
    int dim = 0;
    Eigen::MatrixXcd e, f, h;
};

/// Finite-dimensional representation on {1, t, ..., t^{-2 lambda}}.
Sl2Rep sl2_rep(cplx lambda);

/// Integer -2 lambda when admissible, otherwise throws ParameterError.
int rep_degree(cplx lambda);

/// Site operators e^(a), f^(a), h^(a) and global sums on the tensor product.
struct TensorSpace {
    std::vector<int> dims;
    std::vector<Sl2Rep> reps;
    std::size_t size() const;
    SparseMat site(int alpha, const Eigen::MatrixXcd& op) const;
    /// 2 sum (k_a + lambda_a) for each basis vector.
    std::vector<cplx> weights() const;
};

TensorSpace tensor_space(const GaudinModel& m, std::size_t cap = 4096);

struct GlobalSl2 {
    SparseMat e, f, h;
};
GlobalSl2 global_generators(const TensorSpace& ts);

/// L_a = 2 sum_{b != a} Omega_ab / (z_a - z_b).
std::vector<SparseMat> rational_hamiltonians(const GaudinModel& m, std::size_t cap = 4096);

/// Max entry residuals of: commutators, sum L, and the two operator relations
/// sum L z + sum 2l(l-1) = ef+fe+h^2/2, sum L z^2 + sum 4l(l-1) z = 2(e1 f + f1 e + h1 h/2).
struct RationalRelationResiduals {
    double commutators = 0.0;
    double sum = 0.0;
    double first_moment = 0.0;
    double second_moment = 0.0;
};
RationalRelationResiduals rational_operator_relations(const GaudinModel& m, std::size_t cap = 4096);

struct Sector {
    enum Kind { Singlet, Weight, HighestWeight } kind = Singlet;
    int weight = 0;  // total h eigenvalue for Weight / HighestWeight
    std::string label() const;
};

struct SpectrumResult {
    Sector sector;
    std::vector<std::vector<cplx>> tuples;
    Eigen::MatrixXcd vectors;  // columns, unit norm, in the full tensor basis
    std::vector<double> residuals;
    bool ill_conditioned = false;
};

SpectrumResult joint_spectrum(const GaudinModel& m, const Sector& sector = {}, std::uint64_t seed = 1,
                              std::size_t cap = 4096, double cluster_tol = 1e-8);

VerificationReport check_linear_relations(const SpectrumResult& s, const GaudinModel& m, double tol = 1e-10);

// ---------------------------------------------------------------- operators

struct Sl2Triple {
    DifferentialOperator e, f, h;
};

/// e = t^2 d + 2 lambda t, f = -d, h = 2 (t d + lambda) in variable vars[idx].
Sl2Triple site_generators(const std::vector<std::string>& vars, int idx, cplx lambda);

/// Casimir e f + f e + h^2 / 2 of a triple.
DifferentialOperator casimir(const Sl2Triple& s);

/// Rational site Hamiltonians from arbitrary site triples.
std::vector<DifferentialOperator> rational_site_hamiltonians(const std::vector<Sl2Triple>& sites,
                                                             const std::vector<cplx>& z);

/// Rational currents e(w) = sum e^(a) / (w - z_a) etc. at a fixed point w.
Sl2Triple rational_currents(const std::vector<Sl2Triple>& sites, const std::vector<cplx>& z, cplx w);

/// Elliptic currents at a fixed point z: kernels in the bundle variable
/// vars[s_index] = t^2,
///   e(z) = sum K(1/s, z/z_a) e^(a), f(z) = sum K(s, z/z_a) f^(a),
///   h(z) = 2 s d_s + sum g(z/z_a) h^(a),
/// with K the unit-residue kernel (see special_functions).
Sl2Triple elliptic_currents(const std::vector<Sl2Triple>& sites, int s_index, const std::vector<cplx>& za,
                            cplx z, const EllipticParams& p);

/// e(z) f(z) + f(z) e(z) + h(z)^2 / 2.
DifferentialOperator elliptic_hamiltonian_density(const std::vector<Sl2Triple>& sites, int s_index,
                                                  const std::vector<cplx>& za, cplx z, const EllipticParams& p);

/// Coefficient operators of the expansion
///   L(z) = L0 + sum L_a g(z/z_a) + sum P_a wp(z/z_a) + sum Q_a g(z/z_a)^2,
/// extracted by a least-squares fit over sample points z_j. Each coefficient
/// is an exact linear combination of the L(z_j).
struct EllipticHamiltonians {
    DifferentialOperator L0;
    std::vector<DifferentialOperator> L;  // L_a
    std::vector<DifferentialOperator> P;  // wp coefficients
    std::vector<DifferentialOperator> Q;  // g^2 coefficients
    std::vector<cplx> sample_points;
    double condition = 0.0;
};

EllipticHamiltonians elliptic_hamiltonians(const std::vector<Sl2Triple>& sites, int s_index,
                                           const std::vector<cplx>& za, const EllipticParams& p,
                                           std::uint64_t seed = 1, int extra_samples = 3);

/// Basis functions {1, g_a, wp_a, g_a^2} at z (length 3N+1).
std::vector<cplx> elliptic_basis(const std::vector<cplx>& za, cplx z, const EllipticParams& p);

/// The t-realization in variables (s, t_1..t_N).
std::vector<std::string> elliptic_t_vars(int N);
std::vector<Sl2Triple> elliptic_t_sites(const GaudinModel& m);

}  // namespace gsov

#endif
