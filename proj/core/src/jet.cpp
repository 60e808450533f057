#include "gsov/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace gsov {

int total_degree(const MultiIndex& m)
{
    int d = 0;
    for (int v : m) d += v;
    return d;
}

double factorial(const MultiIndex& m)
{
    double f = 1.0;
    for (int v : m)
        for (int k = 2; k <= v; ++k) f *= k;
    return f;
}

namespace {

void enumerate_degree(int nvars, int deg, int var, MultiIndex& cur, std::vector<MultiIndex>& out)
{
    if (var == nvars - 1) {
        cur[static_cast<std::size_t>(var)] = deg;
        out.push_back(cur);
        return;
    }
    for (int k = deg; k >= 0; --k) {
        cur[static_cast<std::size_t>(var)] = k;
        enumerate_degree(nvars, deg - k, var + 1, cur, out);
    }
}

struct LayoutRegistry {
    std::mutex mutex;
    std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> layouts;
};

LayoutRegistry& registry()
{
    static LayoutRegistry r;
    return r;
}

// Dense lookup keys stay below this; beyond it we fall back to a hash map.
std::unordered_map<std::size_t, std::size_t>& sparse_lookup(const JetLayout* layout)
{
    static std::mutex m;
    static std::unordered_map<const JetLayout*, std::unordered_map<std::size_t, std::size_t>> maps;
    std::lock_guard lock(m);
    return maps[layout];
}

constexpr std::size_t kDenseLimit = 1u << 20;

}  // namespace

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order)
{
    if (nvars < 0 || order < 0) throw std::invalid_argument("JetLayout: negative size");
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto& slot = r.layouts[{nvars, order}];
    if (!slot) slot = std::make_shared<const JetLayout>(nvars, order);
    return slot;
}

std::size_t JetLayout::key(const MultiIndex& m) const
{
    std::size_t k = 0;
    for (int v = nvars_ - 1; v >= 0; --v) k = k * static_cast<std::size_t>(order_ + 1) + static_cast<std::size_t>(m[static_cast<std::size_t>(v)]);
    return k;
}

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order)
{
    if (nvars == 0) {
        monomials_.push_back({});
        degrees_.push_back(0);
    } else {
        MultiIndex cur(static_cast<std::size_t>(nvars), 0);
        for (int d = 0; d <= order; ++d) {
            const std::size_t before = monomials_.size();
            enumerate_degree(nvars, d, 0, cur, monomials_);
            degrees_.resize(monomials_.size(), d);
            (void)before;
        }
    }

    double dense = std::pow(static_cast<double>(order + 1), nvars);
    const bool use_dense = dense <= static_cast<double>(kDenseLimit);
    if (use_dense) {
        lookup_.assign(static_cast<std::size_t>(dense), -1);
        for (std::size_t i = 0; i < monomials_.size(); ++i) lookup_[key(monomials_[i])] = static_cast<std::ptrdiff_t>(i);
    } else {
        auto& sp = sparse_lookup(this);
        for (std::size_t i = 0; i < monomials_.size(); ++i) sp[key(monomials_[i])] = i;
    }

    // count of monomials with degree <= d
    std::vector<std::size_t> upto(static_cast<std::size_t>(order) + 1, 0);
    for (int d : degrees_) ++upto[static_cast<std::size_t>(d)];
    for (std::size_t d = 1; d < upto.size(); ++d) upto[d] += upto[d - 1];

    std::vector<MulEntry> raw;
    MultiIndex sum(static_cast<std::size_t>(nvars));
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        const std::size_t jmax = upto[static_cast<std::size_t>(order - degrees_[i])];
        for (std::size_t j = 0; j < jmax; ++j) {
            for (std::size_t v = 0; v < sum.size(); ++v) sum[v] = monomials_[i][v] + monomials_[j][v];
            const auto out = find(sum);
            assert(out >= 0);
            raw.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(out)});
        }
    }
    mul_offsets_.assign(monomials_.size() + 1, 0);
    for (const auto& e : raw) ++mul_offsets_[e.out + 1];
    for (std::size_t i = 1; i < mul_offsets_.size(); ++i) mul_offsets_[i] += mul_offsets_[i - 1];
    mul_.resize(raw.size());
    std::vector<std::size_t> fill(mul_offsets_.begin(), mul_offsets_.end() - 1);
    for (const auto& e : raw) mul_[fill[e.out]++] = e;

    shifts_.assign(monomials_.size() * static_cast<std::size_t>(nvars), -1);
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        if (degrees_[i] == order) continue;
        for (int v = 0; v < nvars; ++v) {
            MultiIndex m = monomials_[i];
            ++m[static_cast<std::size_t>(v)];
            shifts_[i * static_cast<std::size_t>(nvars) + static_cast<std::size_t>(v)] = find(m);
        }
    }
}

std::ptrdiff_t JetLayout::find(const MultiIndex& m) const
{
    if (static_cast<int>(m.size()) != nvars_) throw std::invalid_argument("JetLayout::find: wrong multi-index length");
    int d = 0;
    for (int v : m) {
        if (v < 0) return -1;
        d += v;
    }
    if (d > order_) return -1;
    if (nvars_ == 0) return 0;
    if (!lookup_.empty()) return lookup_[key(m)];
    auto& sp = sparse_lookup(this);
    auto it = sp.find(key(m));
    return it == sp.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Jet::Jet(int nvars, int order, cplx value) : Jet(JetLayout::get(nvars, order), value) {}

Jet::Jet(std::shared_ptr<const JetLayout> layout, cplx value)
    : layout_(std::move(layout)), coeffs_(layout_->size(), cplx{})
{
    coeffs_[0] = value;
}

Jet Jet::variable(int nvars, int order, int k, cplx x0)
{
    Jet j(nvars, order, x0);
    if (order > 0) {
        MultiIndex e(static_cast<std::size_t>(nvars), 0);
        e[static_cast<std::size_t>(k)] = 1;
        j.coeffs_[static_cast<std::size_t>(j.layout_->find(e))] = 1.0;
    }
    return j;
}

cplx Jet::coeff(const MultiIndex& m) const
{
    const auto i = layout_->find(m);
    return i < 0 ? cplx{} : coeffs_[static_cast<std::size_t>(i)];
}

cplx Jet::partial(const MultiIndex& m) const { return coeff(m) * factorial(m); }

Jet Jet::derivative(const MultiIndex& k) const
{
    const int dk = total_degree(k);
    if (dk == 0) return *this;
    if (dk > order()) throw std::logic_error("Jet::derivative: order exhausted");
    Jet r(nvars(), order() - dk);
    MultiIndex src(k.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const MultiIndex& b = r.layout_->monomial(i);
        double w = 1.0;
        for (std::size_t v = 0; v < k.size(); ++v) {
            src[v] = b[v] + k[v];
            for (int t = b[v] + 1; t <= src[v]; ++t) w *= t;
        }
        r.coeffs_[i] = coeffs_[static_cast<std::size_t>(layout_->find(src))] * w;
    }
    return r;
}

Jet Jet::truncated(int order) const
{
    if (order >= this->order()) return *this;
    Jet r(nvars(), order);
    std::copy_n(coeffs_.begin(), r.size(), r.coeffs_.begin());
    return r;
}

void Jet::match_order(const Jet& o)
{
    if (nvars() != o.nvars()) throw std::invalid_argument("Jet: variable count mismatch");
    if (o.order() < order()) *this = truncated(o.order());
}

Jet& Jet::operator+=(const Jet& o)
{
    match_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o)
{
    match_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

Jet& Jet::operator*=(const Jet& o)
{
    *this = *this * o;
    return *this;
}

Jet& Jet::operator/=(const Jet& o)
{
    *this = *this / o;
    return *this;
}

Jet& Jet::operator+=(cplx c)
{
    coeffs_[0] += c;
    return *this;
}

Jet& Jet::operator-=(cplx c)
{
    coeffs_[0] -= c;
    return *this;
}

Jet& Jet::operator*=(cplx c)
{
    for (auto& x : coeffs_) x *= c;
    return *this;
}

Jet& Jet::operator/=(cplx c)
{
    for (auto& x : coeffs_) x /= c;
    return *this;
}

Jet Jet::operator-() const
{
    Jet r = *this;
    for (auto& x : r.coeffs_) x = -x;
    return r;
}

Jet operator*(const Jet& a, const Jet& b)
{
    if (a.nvars() != b.nvars()) throw std::invalid_argument("Jet: variable count mismatch");
    if (a.order() != b.order()) {
        const int o = std::min(a.order(), b.order());
        return a.truncated(o) * b.truncated(o);
    }
    Jet r(a.layout_ptr());
    r[0] = 0.0;
    const auto& table = a.layout().mul_table();
    const auto ac = a.coefficients();
    const auto bc = b.coefficients();
    for (const auto& e : table) r[e.out] += ac[e.lhs] * bc[e.rhs];
    return r;
}

Jet Jet::reciprocal() const
{
    const cplx a0 = value();
    if (a0 == cplx{}) throw std::domain_error("Jet::reciprocal: zero constant term");
    Jet r(layout_);
    r.coeffs_[0] = 1.0 / a0;
    const auto& table = layout_->mul_table();
    for (std::size_t i = 1; i < coeffs_.size(); ++i) {
        cplx s{};
        for (std::size_t e = layout_->mul_begin(i); e < layout_->mul_begin(i + 1); ++e) {
            const auto& t = table[e];
            if (t.lhs == 0) continue;
            s += coeffs_[t.lhs] * r.coeffs_[t.rhs];
        }
        r.coeffs_[i] = -s / a0;
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b)
{
    if (a.nvars() != b.nvars()) throw std::invalid_argument("Jet: variable count mismatch");
    const int o = std::min(a.order(), b.order());
    const Jet num = a.truncated(o);
    const Jet den = b.truncated(o);
    const cplx b0 = den.value();
    if (b0 == cplx{}) throw std::domain_error("Jet division by zero");
    Jet r(num.layout_ptr());
    const auto& layout = num.layout();
    const auto& table = layout.mul_table();
    for (std::size_t i = 0; i < r.size(); ++i) {
        cplx s = num[i];
        for (std::size_t e = layout.mul_begin(i); e < layout.mul_begin(i + 1); ++e) {
            const auto& t = table[e];
            if (t.lhs == 0) continue;
            s -= den[t.lhs] * r[t.rhs];
        }
        r[i] = s / b0;
    }
    return r;
}

Jet Jet::compose_univariate(std::span<const cplx> taylor) const
{
    Jet h = *this;
    h.coeffs_[0] = 0.0;
    const int d = std::min<int>(order(), static_cast<int>(taylor.size()) - 1);
    Jet r(layout_, taylor[static_cast<std::size_t>(d)]);
    for (int k = d - 1; k >= 0; --k) {
        r = r * h;
        r.coeffs_[0] += taylor[static_cast<std::size_t>(k)];
    }
    return r;
}

Jet Jet::substitute(std::span<const Jet> h) const
{
    if (static_cast<int>(h.size()) != nvars()) throw std::invalid_argument("Jet::substitute: arity mismatch");
    if (h.empty()) return *this;
    const int o = std::min(order(), h[0].order());
    std::vector<Jet> delta;
    delta.reserve(h.size());
    for (const auto& hk : h) {
        Jet d = hk.truncated(o);
        d[0] = 0.0;
        delta.push_back(std::move(d));
    }
    // monomial values delta^I built incrementally along the layout order
    const auto& lay = *layout_;
    std::vector<Jet> mono(lay.size());
    mono[0] = Jet(delta[0].layout_ptr(), 1.0);
    Jet r = mono[0] * coeffs_[0];
    for (std::size_t i = 1; i < lay.size(); ++i) {
        if (lay.degree(i) > o) break;
        const MultiIndex& m = lay.monomial(i);
        std::size_t v = 0;
        while (m[v] == 0) ++v;
        MultiIndex prev = m;
        --prev[v];
        mono[i] = mono[static_cast<std::size_t>(lay.find(prev))] * delta[v];
        if (coeffs_[i] != cplx{}) r += mono[i] * coeffs_[i];
    }
    return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator+(Jet a, cplx c) { return a += c; }
Jet operator+(cplx c, Jet a) { return a += c; }
Jet operator-(Jet a, cplx c) { return a -= c; }
Jet operator-(cplx c, const Jet& a) { return (-a) += c; }
Jet operator*(Jet a, cplx c) { return a *= c; }
Jet operator*(cplx c, Jet a) { return a *= c; }
Jet operator/(Jet a, cplx c) { return a /= c; }
Jet operator/(cplx c, const Jet& a) { return a.reciprocal() * c; }

Jet pow(const Jet& a, cplx exponent)
{
    const int d = a.order();
    const cplx x0 = a.value();
    if (x0 == cplx{}) throw std::domain_error("Jet pow: zero base");
    // taylor of (x0 + h)^p = x0^p * sum binom(p, k) (h/x0)^k
    std::vector<cplx> t(static_cast<std::size_t>(d) + 1);
    cplx c = std::pow(x0, exponent);
    for (int k = 0; k <= d; ++k) {
        t[static_cast<std::size_t>(k)] = c;
        c *= (exponent - static_cast<double>(k)) / (static_cast<double>(k + 1) * x0);
    }
    return a.compose_univariate(t);
}

Jet pow(const Jet& a, int exponent)
{
    if (exponent < 0) return pow(a, -exponent).reciprocal();
    Jet r(a.layout_ptr(), 1.0);
    Jet base = a;
    int e = exponent;
    while (e > 0) {
        if (e & 1) r = r * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return r;
}

Jet exp(const Jet& a)
{
    const int d = a.order();
    std::vector<cplx> t(static_cast<std::size_t>(d) + 1);
    cplx c = std::exp(a.value());
    for (int k = 0; k <= d; ++k) {
        t[static_cast<std::size_t>(k)] = c;
        c /= static_cast<double>(k + 1);
    }
    return a.compose_univariate(t);
}

Jet log(const Jet& a)
{
    const int d = a.order();
    const cplx x0 = a.value();
    if (x0 == cplx{}) throw std::domain_error("Jet log: zero argument");
    std::vector<cplx> t(static_cast<std::size_t>(d) + 1);
    t[0] = std::log(x0);
    cplx p = 1.0 / x0;
    for (int k = 1; k <= d; ++k) {
        t[static_cast<std::size_t>(k)] = ((k % 2) ? 1.0 : -1.0) * p / static_cast<double>(k);
        p /= x0;
    }
    return a.compose_univariate(t);
}

Jet sqrt(const Jet& a) { return pow(a, cplx{0.5}); }

}  // namespace gsov
