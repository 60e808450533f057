#ifndef GSOV_OPERATOR_ALGEBRA_HPP
#define GSOV_OPERATOR_ALGEBRA_HPP

// Linear differential operators sum_I c_I(x) d^I with black-box analytic
// coefficients. Coefficients are evaluated on Taylor jets of the coordinates,
// so every derivative needed for normal ordering is exact to rounding.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsov/errors.hpp"
#include "gsov/jet.hpp"

namespace gsov {

using Point = std::vector<cplx>;

/// Coefficient function: receives the seed jets x_k + h_k of all variables
/// and returns the expansion of the coefficient at that point.
using CoeffFn = std::function<Jet(std::span<const Jet> x)>;

/// Test function with exact derivatives, same calling convention as CoeffFn.
using TestFunction = CoeffFn;

/// Expansions of the coefficients at one point, keyed by derivative index.
using Terms = std::map<MultiIndex, Jet>;

inline constexpr int kDefaultOrderCap = 8;

class EvalContext;

namespace detail {

struct OpNode {
    int nvars = 0;
    int order = 0;
    virtual ~OpNode() = default;
    /// Coefficient expansions to `jet_order` at ctx.point().
    virtual Terms eval(EvalContext& ctx, int jet_order) const = 0;
};

}  // namespace detail

/// Per-point evaluation state: seeds and a cache of node expansions.
class EvalContext {
public:
    explicit EvalContext(Point x) : x_(std::move(x)) {}

    const Point& point() const { return x_; }
    std::span<const Jet> seeds(int order);
    const Terms& terms(const detail::OpNode* node, int order);

    /// Opaque per-point storage for node implementations (keyed by owner and tag).
    std::shared_ptr<void>& aux(const void* owner, int tag) { return aux_[{owner, tag}]; }

private:
    Point x_;
    std::map<int, std::vector<Jet>> seeds_;
    std::map<std::pair<const detail::OpNode*, int>, Terms> cache_;
    std::map<std::pair<const void*, int>, std::shared_ptr<void>> aux_;
};

class DifferentialOperator {
public:
    DifferentialOperator() = default;

    /// Explicit term list; every index must have length vars.size().
    DifferentialOperator(std::vector<std::string> vars,
                         std::vector<std::pair<MultiIndex, CoeffFn>> terms);

    static DifferentialOperator zero(std::vector<std::string> vars);
    static DifferentialOperator identity(std::vector<std::string> vars);
    /// Multiplication by a function.
    static DifferentialOperator multiplication(std::vector<std::string> vars, CoeffFn f);
    static DifferentialOperator constant(std::vector<std::string> vars, cplx c);
    /// d / d vars[k].
    static DifferentialOperator partial(std::vector<std::string> vars, int k);
    /// Multiplication by the coordinate vars[k].
    static DifferentialOperator coordinate(std::vector<std::string> vars, int k);

    const std::vector<std::string>& vars() const { return *vars_; }
    int nvars() const { return node_ ? node_->nvars : 0; }
    int order() const { return node_ ? node_->order : 0; }
    bool empty() const { return !node_; }

    Terms terms(EvalContext& ctx, int jet_order = 0) const;
    Terms terms_at(const Point& x, int jet_order = 0) const;

    const std::shared_ptr<const detail::OpNode>& node() const { return node_; }
    const std::shared_ptr<const std::vector<std::string>>& var_list() const { return vars_; }

    DifferentialOperator(std::shared_ptr<const std::vector<std::string>> vars,
                         std::shared_ptr<const detail::OpNode> node)
        : vars_(std::move(vars)), node_(std::move(node))
    {
    }

private:
    std::shared_ptr<const std::vector<std::string>> vars_;
    std::shared_ptr<const detail::OpNode> node_;
};

/// sum_k c_k A_k.
DifferentialOperator op_linear(std::span<const std::pair<cplx, DifferentialOperator>> parts);

DifferentialOperator operator+(const DifferentialOperator& a, const DifferentialOperator& b);
DifferentialOperator operator-(const DifferentialOperator& a, const DifferentialOperator& b);
DifferentialOperator operator*(cplx c, const DifferentialOperator& a);
DifferentialOperator operator-(const DifferentialOperator& a);

/// A o B, normal ordered.
DifferentialOperator op_compose(const DifferentialOperator& a, const DifferentialOperator& b,
                                int order_cap = kDefaultOrderCap);
DifferentialOperator operator*(const DifferentialOperator& a, const DifferentialOperator& b);

/// f * A (multiplication by a function on the left).
DifferentialOperator op_scale(const CoeffFn& f, const DifferentialOperator& a);

DifferentialOperator op_commutator(const DifferentialOperator& a, const DifferentialOperator& b,
                                   int order_cap = kDefaultOrderCap);

/// sum_I c_I(x) d^I f(x).
cplx op_apply(const DifferentialOperator& a, const TestFunction& f, const Point& x);
cplx op_apply(const DifferentialOperator& a, const TestFunction& f, EvalContext& ctx);

/// Coordinate chart: the old coordinates as analytic functions of the new
/// ones (`param`), with an optional numeric inverse old -> new.
struct CoordinateMap {
    std::vector<std::string> new_vars;
    std::vector<std::string> old_vars;
    std::function<std::vector<Jet>(std::span<const Jet> y)> param;
    std::function<Point(const Point& x)> inverse;  // may be empty

    std::vector<cplx> old_point(const Point& y) const;
};

/// Jacobian d old / d new at y (rows: old coordinates).
std::vector<std::vector<cplx>> jacobian(const CoordinateMap& m, const Point& y);
/// 2-norm condition number of the Jacobian at y.
double jacobian_condition(const CoordinateMap& m, const Point& y);

/// Operator in the new coordinates acting as A does on functions of the old
/// ones: coefficients composed with the chart, d/d old_k = sum_j (J^-1)_{jk} d/d new_j.
DifferentialOperator op_pullback(const DifferentialOperator& a, const CoordinateMap& m);
/// Same, sharing one chart object (and its per-point Jacobian cache) between pullbacks.
DifferentialOperator op_pullback(const DifferentialOperator& a, const std::shared_ptr<const CoordinateMap>& m);

/// The coordinate vector field d / d old_k expressed in the new coordinates.
DifferentialOperator pullback_partial(const std::shared_ptr<const CoordinateMap>& m, int k);

/// Inverse of a square matrix of jets (Gaussian elimination with pivoting on
/// the constant terms). Throws NumericalBreakdown if singular.
std::vector<std::vector<Jet>> invert(std::vector<std::vector<Jet>> a);

struct VerificationReport {
    std::string label;
    int samples = 0;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::string note;
};

using Sampler = std::function<Point(std::mt19937_64&)>;

struct EqualOptions {
    int samples = 20;
    int test_degree = -1;  // default: order(A - B) + 1
    double tol = 1e-8;
    std::uint64_t seed = 0;
    /// Residuals are divided by 1 + |A m| + |B m| when set.
    bool relative = true;
    int max_rejections = 1000;
};

/// Applies A - B to the monomials (x - x0)^I / I!, |I| <= test_degree, at
/// sampled points x0. Points where a coefficient raises a domain error are
/// redrawn.
VerificationReport op_equal(const DifferentialOperator& a, const DifferentialOperator& b,
                            const Sampler& sampler, const EqualOptions& opt,
                            const std::string& label = "op_equal");

/// Same comparison, but with the test functions supplied explicitly (for
/// restricted identities). Each test function is applied at every sample.
VerificationReport op_equal_on(const DifferentialOperator& a, const DifferentialOperator& b,
                               std::span<const TestFunction> tests, const Sampler& sampler,
                               const EqualOptions& opt, const std::string& label = "op_equal_on");

/// Binomial coefficient of multi-indices.
double binomial(const MultiIndex& a, const MultiIndex& c);

}  // namespace gsov

#endif
