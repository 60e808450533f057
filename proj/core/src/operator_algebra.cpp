#include "gsov/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gsov/errors.hpp"

namespace gsov {

namespace {

using VarList = std::shared_ptr<const std::vector<std::string>>;

VarList make_vars(std::vector<std::string> v) { return std::make_shared<const std::vector<std::string>>(std::move(v)); }

Jet constant_jet(int nvars, int order, cplx c) { return Jet(JetLayout::get(nvars, order), c); }

void add_term(Terms& t, const MultiIndex& k, const Jet& v)
{
    auto it = t.find(k);
    if (it == t.end())
        t.emplace(k, v);
    else
        it->second += v;
}

struct LeafNode final : detail::OpNode {
    std::vector<std::pair<MultiIndex, CoeffFn>> terms;

    Terms eval(EvalContext& ctx, int k) const override
    {
        Terms out;
        const auto seeds = ctx.seeds(k);
        for (const auto& [idx, f] : terms) {
            Jet v = f(seeds);
            if (v.nvars() != nvars) throw std::invalid_argument("coefficient returned a jet in the wrong variables");
            if (v.order() < k) throw std::invalid_argument("coefficient returned a truncated jet");
            add_term(out, idx, v.truncated(k));
        }
        return out;
    }
};

struct LinearNode final : detail::OpNode {
    std::vector<std::pair<cplx, std::shared_ptr<const detail::OpNode>>> parts;

    Terms eval(EvalContext& ctx, int k) const override
    {
        Terms out;
        for (const auto& [c, node] : parts) {
            if (c == cplx{}) continue;
            for (const auto& [idx, v] : ctx.terms(node.get(), k)) add_term(out, idx, v * c);
        }
        return out;
    }
};

/// sub-indices c <= a
void for_each_subindex(const MultiIndex& a, const std::function<void(const MultiIndex&)>& f)
{
    MultiIndex c(a.size(), 0);
    while (true) {
        f(c);
        std::size_t j = 0;
        while (j < a.size()) {
            if (c[j] < a[j]) {
                ++c[j];
                break;
            }
            c[j] = 0;
            ++j;
        }
        if (j == a.size()) return;
    }
}

Terms compose_terms(const Terms& p, const Terms& q, int k)
{
    Terms out;
    for (const auto& [a, pa] : p) {
        const Jet pk = pa.truncated(k);
        for (const auto& [b, qb] : q) {
            for_each_subindex(a, [&](const MultiIndex& c) {
                const double w = binomial(a, c);
                MultiIndex idx(a.size());
                for (std::size_t j = 0; j < a.size(); ++j) idx[j] = a[j] - c[j] + b[j];
                add_term(out, idx, (pk * qb.derivative(c).truncated(k)) * cplx{w});
            });
        }
    }
    return out;
}

struct ComposeNode final : detail::OpNode {
    std::shared_ptr<const detail::OpNode> a, b;

    Terms eval(EvalContext& ctx, int k) const override
    {
        const Terms& ta = ctx.terms(a.get(), k);
        const Terms& tb = ctx.terms(b.get(), k + a->order);
        return compose_terms(ta, tb, k);
    }
};

struct ScaleNode final : detail::OpNode {
    CoeffFn f;
    std::shared_ptr<const detail::OpNode> a;

    Terms eval(EvalContext& ctx, int k) const override
    {
        const Jet s = f(ctx.seeds(k)).truncated(k);
        Terms out;
        for (const auto& [idx, v] : ctx.terms(a.get(), k)) out.emplace(idx, s * v);
        return out;
    }
};

/// Chart expansions at the context point: old coordinates to order K and the
/// inverse Jacobian to order K - 1, plus memoized products of the transformed
/// coordinate fields.
struct ChartData {
    int order = 0;
    std::vector<Jet> old_coords;
    std::vector<std::vector<Jet>> inv_jac;  // (J^-1)_{jk}
    std::vector<Terms> fields;              // d/d old_k in new coordinates
    std::map<std::pair<MultiIndex, int>, Terms> powers;
};

ChartData& chart_data(EvalContext& ctx, const CoordinateMap& map, int order)
{
    auto& slot = ctx.aux(&map, 0);
    auto* d = static_cast<ChartData*>(slot.get());
    if (d && d->order >= order) return *d;
    auto fresh = std::make_shared<ChartData>();
    const int n = static_cast<int>(ctx.point().size());
    const int nold = static_cast<int>(map.old_vars.size());
    fresh->order = order;
    fresh->old_coords = map.param(ctx.seeds(order));
    if (static_cast<int>(fresh->old_coords.size()) != nold)
        throw std::invalid_argument("coordinate map returned the wrong number of coordinates");
    std::vector<std::vector<Jet>> jac(nold, std::vector<Jet>(n));
    for (int r = 0; r < nold; ++r) {
        for (int c = 0; c < n; ++c) {
            MultiIndex e(n, 0);
            e[c] = 1;
            jac[r][c] = fresh->old_coords[r].derivative(e);
        }
    }
    fresh->inv_jac = invert(std::move(jac));
    fresh->fields.resize(nold);
    for (int o = 0; o < nold; ++o) {
        for (int j = 0; j < n; ++j) {
            MultiIndex e(n, 0);
            e[j] = 1;
            fresh->fields[o].emplace(e, fresh->inv_jac[j][o]);
        }
    }
    slot = fresh;
    return *fresh;
}

/// (d/d old)^m in new coordinates, to jet order `need`.
const Terms& field_power(ChartData& cd, const MultiIndex& m, int need, int n)
{
    const auto key = std::make_pair(m, need);
    auto it = cd.powers.find(key);
    if (it != cd.powers.end()) return it->second;
    Terms result;
    if (total_degree(m) == 0) {
        result.emplace(MultiIndex(n, 0), Jet(JetLayout::get(n, need), 1.0));
    } else {
        int v = 0;
        while (m[v] == 0) ++v;
        MultiIndex rest = m;
        --rest[v];
        const Terms tail = field_power(cd, rest, need + 1, n);
        Terms head;
        for (const auto& [idx, j] : cd.fields[v]) head.emplace(idx, j.truncated(need));
        result = compose_terms(head, tail, need);
    }
    return cd.powers.emplace(key, std::move(result)).first->second;
}

struct PullbackNode final : detail::OpNode {
    std::shared_ptr<const detail::OpNode> a;
    std::shared_ptr<const CoordinateMap> map;
    int old_nvars = 0;

    Terms eval(EvalContext& ctx, int k) const override
    {
        const int oa = a->order;
        ChartData& cd = chart_data(ctx, *map, k + oa + 1);

        // coefficients of A at the image point, as jets in the new variables
        Point x_old(old_nvars);
        for (int i = 0; i < old_nvars; ++i) x_old[i] = cd.old_coords[i].value();
        auto& old_slot = ctx.aux(map.get(), 1);
        if (!old_slot) old_slot = std::make_shared<EvalContext>(x_old);
        auto& old_ctx = *static_cast<EvalContext*>(old_slot.get());
        const Terms& ta = old_ctx.terms(a.get(), k);
        std::vector<Jet> h(old_nvars);
        for (int i = 0; i < old_nvars; ++i) h[i] = cd.old_coords[i].truncated(k);

        Terms out;
        for (const auto& [idx, coef] : ta) {
            const Jet c = coef.substitute(h);
            for (const auto& [j, v] : field_power(cd, idx, k, nvars)) add_term(out, j, c * v.truncated(k));
        }
        return out;
    }
};

template <class Node>
std::shared_ptr<Node> new_node(int nvars, int order)
{
    auto n = std::make_shared<Node>();
    n->nvars = nvars;
    n->order = order;
    return n;
}

void require_same_vars(const DifferentialOperator& a, const DifferentialOperator& b)
{
    if (a.empty() || b.empty()) throw ParameterError("operator is empty");
    if (a.var_list() != b.var_list() && a.vars() != b.vars())
        throw ParameterError("operators act on different variables");
}

}  // namespace

double binomial(const MultiIndex& a, const MultiIndex& c)
{
    double r = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (int t = 1; t <= c[j]; ++t) r = r * (a[j] - c[j] + t) / t;
    }
    return r;
}

std::span<const Jet> EvalContext::seeds(int order)
{
    auto it = seeds_.find(order);
    if (it == seeds_.end()) {
        std::vector<Jet> s;
        const int n = static_cast<int>(x_.size());
        for (int k = 0; k < n; ++k) s.push_back(Jet::variable(n, order, k, x_[k]));
        it = seeds_.emplace(order, std::move(s)).first;
    }
    return it->second;
}

const Terms& EvalContext::terms(const detail::OpNode* node, int order)
{
    const auto key = std::make_pair(node, order);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (static_cast<int>(x_.size()) != node->nvars) throw std::invalid_argument("point has the wrong dimension");
    Terms t = node->eval(*this, order);
    return cache_.emplace(key, std::move(t)).first->second;
}

DifferentialOperator::DifferentialOperator(std::vector<std::string> vars,
                                           std::vector<std::pair<MultiIndex, CoeffFn>> terms)
{
    const int n = static_cast<int>(vars.size());
    int ord = 0;
    for (const auto& [idx, f] : terms) {
        if (static_cast<int>(idx.size()) != n) throw ParameterError("multi-index length differs from the variable count");
        for (int v : idx)
            if (v < 0) throw ParameterError("negative derivative order");
        ord = std::max(ord, total_degree(idx));
    }
    auto node = new_node<LeafNode>(n, ord);
    node->terms = std::move(terms);
    vars_ = make_vars(std::move(vars));
    node_ = node;
}

DifferentialOperator DifferentialOperator::zero(std::vector<std::string> vars)
{
    return DifferentialOperator(std::move(vars), {});
}

DifferentialOperator DifferentialOperator::constant(std::vector<std::string> vars, cplx c)
{
    const int n = static_cast<int>(vars.size());
    CoeffFn f = [n, c](std::span<const Jet> x) { return constant_jet(n, x.empty() ? 0 : x[0].order(), c); };
    return DifferentialOperator(std::move(vars), {{MultiIndex(n, 0), f}});
}

DifferentialOperator DifferentialOperator::identity(std::vector<std::string> vars)
{
    return constant(std::move(vars), 1.0);
}

DifferentialOperator DifferentialOperator::multiplication(std::vector<std::string> vars, CoeffFn f)
{
    const int n = static_cast<int>(vars.size());
    return DifferentialOperator(std::move(vars), {{MultiIndex(n, 0), std::move(f)}});
}

DifferentialOperator DifferentialOperator::partial(std::vector<std::string> vars, int k)
{
    const int n = static_cast<int>(vars.size());
    if (k < 0 || k >= n) throw ParameterError("variable index out of range");
    MultiIndex e(n, 0);
    e[k] = 1;
    CoeffFn one = [n](std::span<const Jet> x) { return constant_jet(n, x[0].order(), 1.0); };
    return DifferentialOperator(std::move(vars), {{e, one}});
}

DifferentialOperator DifferentialOperator::coordinate(std::vector<std::string> vars, int k)
{
    const int n = static_cast<int>(vars.size());
    if (k < 0 || k >= n) throw ParameterError("variable index out of range");
    return multiplication(std::move(vars), [k](std::span<const Jet> x) { return x[k]; });
}

Terms DifferentialOperator::terms(EvalContext& ctx, int jet_order) const
{
    if (!node_) return {};
    return ctx.terms(node_.get(), jet_order);
}

Terms DifferentialOperator::terms_at(const Point& x, int jet_order) const
{
    EvalContext ctx(x);
    return terms(ctx, jet_order);
}

DifferentialOperator op_linear(std::span<const std::pair<cplx, DifferentialOperator>> parts)
{
    if (parts.empty()) throw ParameterError("empty linear combination");
    int ord = 0;
    for (const auto& p : parts) {
        require_same_vars(parts[0].second, p.second);
        ord = std::max(ord, p.second.order());
    }
    auto node = new_node<LinearNode>(parts[0].second.nvars(), ord);
    for (const auto& [c, op] : parts) node->parts.emplace_back(c, op.node());
    return DifferentialOperator(parts[0].second.var_list(), node);
}

DifferentialOperator operator+(const DifferentialOperator& a, const DifferentialOperator& b)
{
    const std::pair<cplx, DifferentialOperator> p[] = {{1.0, a}, {1.0, b}};
    return op_linear(p);
}

DifferentialOperator operator-(const DifferentialOperator& a, const DifferentialOperator& b)
{
    const std::pair<cplx, DifferentialOperator> p[] = {{1.0, a}, {-1.0, b}};
    return op_linear(p);
}

DifferentialOperator operator*(cplx c, const DifferentialOperator& a)
{
    const std::pair<cplx, DifferentialOperator> p[] = {{c, a}};
    return op_linear(p);
}

DifferentialOperator operator-(const DifferentialOperator& a) { return cplx{-1.0} * a; }

DifferentialOperator op_compose(const DifferentialOperator& a, const DifferentialOperator& b, int order_cap)
{
    require_same_vars(a, b);
    const int ord = a.order() + b.order();
    if (ord > order_cap) throw ParameterError("composite exceeds the order cap");
    auto node = new_node<ComposeNode>(a.nvars(), ord);
    node->a = a.node();
    node->b = b.node();
    return DifferentialOperator(a.var_list(), node);
}

DifferentialOperator operator*(const DifferentialOperator& a, const DifferentialOperator& b)
{
    return op_compose(a, b);
}

DifferentialOperator op_scale(const CoeffFn& f, const DifferentialOperator& a)
{
    if (a.empty()) throw ParameterError("operator is empty");
    auto node = new_node<ScaleNode>(a.nvars(), a.order());
    node->f = f;
    node->a = a.node();
    return DifferentialOperator(a.var_list(), node);
}

DifferentialOperator op_commutator(const DifferentialOperator& a, const DifferentialOperator& b, int order_cap)
{
    return op_compose(a, b, order_cap) - op_compose(b, a, order_cap);
}

cplx op_apply(const DifferentialOperator& a, const TestFunction& f, EvalContext& ctx)
{
    const int ord = a.order();
    const Jet fv = f(ctx.seeds(ord));
    cplx r = 0.0;
    for (const auto& [idx, c] : a.terms(ctx, 0)) r += c.value() * fv.partial(idx);
    return r;
}

cplx op_apply(const DifferentialOperator& a, const TestFunction& f, const Point& x)
{
    EvalContext ctx(x);
    return op_apply(a, f, ctx);
}

std::vector<cplx> CoordinateMap::old_point(const Point& y) const
{
    std::vector<Jet> s;
    const int n = static_cast<int>(y.size());
    for (int k = 0; k < n; ++k) s.push_back(Jet::variable(n, 0, k, y[k]));
    const auto v = param(s);
    std::vector<cplx> r;
    for (const auto& j : v) r.push_back(j.value());
    return r;
}

std::vector<std::vector<cplx>> jacobian(const CoordinateMap& m, const Point& y)
{
    std::vector<Jet> s;
    const int n = static_cast<int>(y.size());
    for (int k = 0; k < n; ++k) s.push_back(Jet::variable(n, 1, k, y[k]));
    const auto v = m.param(s);
    std::vector<std::vector<cplx>> j(v.size(), std::vector<cplx>(n));
    for (std::size_t r = 0; r < v.size(); ++r) {
        for (int c = 0; c < n; ++c) {
            MultiIndex e(n, 0);
            e[c] = 1;
            j[r][c] = v[r].coeff(e);
        }
    }
    return j;
}

double jacobian_condition(const CoordinateMap& m, const Point& y)
{
    const auto j = jacobian(m, y);
    const Eigen::Index r = static_cast<Eigen::Index>(j.size());
    const Eigen::Index c = r == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXcd a(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) a(i, k) = j[i][k];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 1.0;
    const double smin = sv(sv.size() - 1);
    return smin == 0.0 ? INFINITY : sv(0) / smin;
}

std::vector<std::vector<Jet>> invert(std::vector<std::vector<Jet>> a)
{
    const std::size_t n = a.size();
    if (n == 0) return a;
    std::vector<std::vector<Jet>> inv(n, std::vector<Jet>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) throw ParameterError("matrix is not square");
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = Jet(a[0][0].layout_ptr(), i == j ? 1.0 : 0.0);
    }
    double scale = 0.0;
    for (const auto& row : a)
        for (const auto& x : row) scale = std::max(scale, std::abs(x.value()));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col].value()) > std::abs(a[piv][col].value())) piv = r;
        if (!(std::abs(a[piv][col].value()) > 1e-14 * scale))
            throw NumericalBreakdown("singular Jacobian");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const Jet p = a[col][col].reciprocal();
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * p;
            inv[col][j] = inv[col][j] * p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const Jet f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

DifferentialOperator op_pullback(const DifferentialOperator& a, const CoordinateMap& m)
{
    return op_pullback(a, std::make_shared<const CoordinateMap>(m));
}

DifferentialOperator op_pullback(const DifferentialOperator& a, const std::shared_ptr<const CoordinateMap>& mp)
{
    const CoordinateMap& m = *mp;
    if (a.empty()) throw ParameterError("operator is empty");
    if (a.vars() != m.old_vars) throw ParameterError("operator variables differ from the chart's old coordinates");
    if (m.new_vars.size() != m.old_vars.size()) throw ParameterError("chart must be square");
    auto node = new_node<PullbackNode>(static_cast<int>(m.new_vars.size()), a.order());
    node->a = a.node();
    node->map = mp;
    node->old_nvars = static_cast<int>(m.old_vars.size());
    return DifferentialOperator(make_vars(m.new_vars), node);
}

DifferentialOperator pullback_partial(const std::shared_ptr<const CoordinateMap>& m, int k)
{
    return op_pullback(DifferentialOperator::partial(m->old_vars, k), m);
}

namespace {

struct SampleOutcome {
    double residual = 0.0;
};

template <class Body>
VerificationReport sweep(const Sampler& sampler, const EqualOptions& opt, const std::string& label, Body body)
{
    VerificationReport rep;
    rep.label = label;
    rep.tol = opt.tol;
    rep.seed = opt.seed;
    int rejected = 0;
    for (int s = 0; s < opt.samples; ++s) {
        // per-sample stream so that a rejection does not shift later samples
        std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(s));
        while (true) {
            Point x = sampler(rng);
            try {
                const double r = body(x);
                if (!std::isfinite(r)) throw NumericalBreakdown("non-finite residual");
                rep.max_residual = std::max(rep.max_residual, r);
                ++rep.samples;
                break;
            } catch (const std::domain_error&) {
                if (++rejected > opt.max_rejections) throw NumericalBreakdown(label + ": sampler keeps hitting singular points");
            }
        }
    }
    rep.pass = rep.samples > 0 && rep.max_residual < opt.tol;
    return rep;
}

}  // namespace

VerificationReport op_equal(const DifferentialOperator& a, const DifferentialOperator& b, const Sampler& sampler,
                            const EqualOptions& opt, const std::string& label)
{
    require_same_vars(a, b);
    const int ord = std::max(a.order(), b.order());
    const int deg = opt.test_degree >= 0 ? opt.test_degree : ord + 1;
    return sweep(sampler, opt, label, [&](const Point& x) {
        EvalContext ctx(x);
        const Terms ta = a.terms(ctx, 0);
        const Terms tb = b.terms(ctx, 0);
        // (A - B) applied to (x - x0)^I / I! at x0 picks out c_I exactly
        double worst = 0.0;
        auto value = [](const Terms& t, const MultiIndex& i) {
            auto it = t.find(i);
            return it == t.end() ? cplx{} : it->second.value();
        };
        auto visit = [&](const MultiIndex& i) {
            if (total_degree(i) > deg) return;
            const cplx va = value(ta, i), vb = value(tb, i);
            double r = std::abs(va - vb);
            if (opt.relative) r /= 1.0 + std::abs(va) + std::abs(vb);
            worst = std::max(worst, r);
        };
        for (const auto& [i, v] : ta) visit(i);
        for (const auto& [i, v] : tb) visit(i);
        return worst;
    });
}

VerificationReport op_equal_on(const DifferentialOperator& a, const DifferentialOperator& b,
                               std::span<const TestFunction> tests, const Sampler& sampler, const EqualOptions& opt,
                               const std::string& label)
{
    require_same_vars(a, b);
    return sweep(sampler, opt, label, [&](const Point& x) {
        EvalContext ctx(x);
        double worst = 0.0;
        for (const auto& f : tests) {
            const cplx va = op_apply(a, f, ctx);
            const cplx vb = op_apply(b, f, ctx);
            double r = std::abs(va - vb);
            if (opt.relative) r /= 1.0 + std::abs(va) + std::abs(vb);
            worst = std::max(worst, r);
        }
        return worst;
    });
}

}  // namespace gsov
