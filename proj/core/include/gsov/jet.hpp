#ifndef GSOV_JET_HPP
#define GSOV_JET_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace gsov {

using cplx = std::complex<double>;

/// Exponent vector of a monomial / derivative. Length equals the number of
/// variables of whatever it indexes.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& m);
double factorial(const MultiIndex& m);

/// Monomial bookkeeping for truncated Taylor series in `nvars` variables up
/// to total degree `order`. Layouts are interned; use `JetLayout::get`.
class JetLayout {
public:
    struct MulEntry {
        std::uint32_t lhs;
        std::uint32_t rhs;
        std::uint32_t out;
    };

    static std::shared_ptr<const JetLayout> get(int nvars, int order);

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    std::size_t size() const { return monomials_.size(); }
    const MultiIndex& monomial(std::size_t i) const { return monomials_[i]; }
    int degree(std::size_t i) const { return degrees_[i]; }

    /// Position of a monomial, or -1 when its degree exceeds the order.
    std::ptrdiff_t find(const MultiIndex& m) const;

    /// All (lhs, rhs) pairs with deg(lhs)+deg(rhs) <= order, sorted by `out`.
    const std::vector<MulEntry>& mul_table() const { return mul_; }
    /// mul_table() entries for output i live in [mul_begin(i), mul_begin(i+1)).
    std::size_t mul_begin(std::size_t i) const { return mul_offsets_[i]; }

    /// Index of m + e_var, or -1 when out of range.
    std::ptrdiff_t shift(std::size_t i, int var) const { return shifts_[i * nvars_ + var]; }

    JetLayout(int nvars, int order);

private:
    std::size_t key(const MultiIndex& m) const;

    int nvars_;
    int order_;
    std::vector<MultiIndex> monomials_;
    std::vector<int> degrees_;
    std::vector<std::ptrdiff_t> lookup_;  // dense over (order+1)^nvars, small cases only
    std::vector<MulEntry> mul_;
    std::vector<std::size_t> mul_offsets_;
    std::vector<std::ptrdiff_t> shifts_;
};

/// Truncated multivariate Taylor expansion f(x0 + h) = sum_I c_I h^I,
/// |I| <= order. Arithmetic truncates to the smaller of the operand orders.
class Jet {
public:
    Jet() = default;
    Jet(int nvars, int order, cplx value = {});
    Jet(std::shared_ptr<const JetLayout> layout, cplx value = {});

    /// Seed for variable k at value x0: x0 + h_k.
    static Jet variable(int nvars, int order, int k, cplx x0);

    int nvars() const { return layout_ ? layout_->nvars() : 0; }
    int order() const { return layout_ ? layout_->order() : 0; }
    const JetLayout& layout() const { return *layout_; }
    const std::shared_ptr<const JetLayout>& layout_ptr() const { return layout_; }
    std::size_t size() const { return coeffs_.size(); }

    cplx value() const { return coeffs_.empty() ? cplx{} : coeffs_[0]; }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    cplx operator[](std::size_t i) const { return coeffs_[i]; }
    std::span<const cplx> coefficients() const { return coeffs_; }

    /// Taylor coefficient c_I (zero beyond the order).
    cplx coeff(const MultiIndex& m) const;
    /// Partial derivative value d^I f(x0) = I! c_I.
    cplx partial(const MultiIndex& m) const;

    /// Expansion of d^K f, valid to order - |K|.
    Jet derivative(const MultiIndex& k) const;
    Jet truncated(int order) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(cplx c);
    Jet& operator-=(cplx c);
    Jet& operator*=(cplx c);
    Jet& operator/=(cplx c);
    Jet operator-() const;

    Jet reciprocal() const;

    /// g(f) for univariate g given its Taylor coefficients t_k at f.value().
    Jet compose_univariate(std::span<const cplx> taylor) const;

    /// Treat *this as the expansion of g around x0 and return g(h_1..h_n),
    /// where h_k are jets (common layout) with h_k.value() == x0_k.
    Jet substitute(std::span<const Jet> h) const;

private:
    void match_order(const Jet& o);

    std::shared_ptr<const JetLayout> layout_;
    std::vector<cplx> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, cplx c);
Jet operator+(cplx c, Jet a);
Jet operator-(Jet a, cplx c);
Jet operator-(cplx c, const Jet& a);
Jet operator*(Jet a, cplx c);
Jet operator*(cplx c, Jet a);
Jet operator/(Jet a, cplx c);
Jet operator/(cplx c, const Jet& a);

Jet pow(const Jet& a, cplx exponent);
Jet pow(const Jet& a, int exponent);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);

inline cplx value_of(cplx z) { return z; }
inline cplx value_of(const Jet& z) { return z.value(); }

/// Taylor coefficients (up to `order`) of a univariate function evaluated on
/// a one-variable seed jet at z0.
template <class F>
std::vector<cplx> univariate_taylor(F&& f, cplx z0, int order)
{
    const Jet seed = Jet::variable(1, order, 0, z0);
    const Jet r = f(seed);
    std::vector<cplx> t(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order && k <= r.order(); ++k)
        t[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)];
    return t;
}

/// Evaluate a univariate function on a multivariate jet through its
/// one-variable Taylor expansion. Much cheaper than running f on `z` itself.
template <class F>
Jet lift_univariate(const Jet& z, F&& f)
{
    if (z.order() == 0) {
        Jet r(z.layout_ptr());
        r[0] = f(Jet::variable(1, 0, 0, z.value())).value();
        return r;
    }
    const auto t = univariate_taylor(f, z.value(), z.order());
    return z.compose_univariate(t);
}

}  // namespace gsov

#endif
