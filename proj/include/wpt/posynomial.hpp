// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Monomials and posynomials over a flat vector of positive variables, and
/// the weighted arithmetic-geometric mean condensation of a posynomial into
/// a single monomial lower bound.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace wpt {

struct Factor {
    std::size_t variable = 0;
    double power = 0.0;

    friend bool operator==(const Factor&, const Factor&) = default;
    friend auto operator<=>(const Factor&, const Factor&) = default;
};

namespace detail {

inline double raise(double x, double power)
{
    if (power == 1.0)
        return x;
    if (power == 2.0)
        return x * x;
    if (power == 3.0)
        return x * x * x;
    if (power == 4.0) {
        const double x2 = x * x;
        return x2 * x2;
    }
    return std::pow(x, power);
}

} // namespace detail

/// c * prod_i x_i^{a_i}. Factors are sorted by variable with nonzero powers.
class Monomial {
public:
    Monomial() = default;
    Monomial(double coefficient, std::vector<Factor> factors) : coefficient_(coefficient), factors_(std::move(factors))
    {
        require(coefficient_ > 0.0, "monomial: coefficient must be positive");
        std::sort(factors_.begin(), factors_.end());
        // Combine repeated variables and drop zero powers.
        std::vector<Factor> combined;
        combined.reserve(factors_.size());
        for (const auto& f : factors_) {
            if (!combined.empty() && combined.back().variable == f.variable)
                combined.back().power += f.power;
            else
                combined.push_back(f);
        }
        std::erase_if(combined, [](const Factor& f) { return f.power == 0.0; });
        factors_ = std::move(combined);
    }

    double coefficient() const { return coefficient_; }
    const std::vector<Factor>& factors() const { return factors_; }

    double degree() const
    {
        double sum = 0.0;
        for (const auto& f : factors_)
            sum += f.power;
        return sum;
    }

    double operator()(std::span<const double> x) const
    {
        double value = coefficient_;
        for (const auto& f : factors_)
            value *= detail::raise(x[f.variable], f.power);
        return value;
    }

    double operator()(const Eigen::VectorXd& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

    bool same_exponents(const Monomial& other) const { return factors_ == other.factors_; }

private:
    double coefficient_ = 1.0;
    std::vector<Factor> factors_;
};

/// Sum of monomials with positive coefficients.
class Posynomial {
public:
    Posynomial() = default;
    Posynomial(std::size_t variables, std::vector<Monomial> terms) : variables_(variables), terms_(std::move(terms))
    {
        for (const auto& t : terms_)
            for (const auto& f : t.factors())
                require(f.variable < variables_, "posynomial: factor refers to an unknown variable");
    }

    std::size_t variables() const { return variables_; }
    std::size_t size() const { return terms_.size(); }
    const std::vector<Monomial>& terms() const { return terms_; }

    /// Sums the coefficients of terms with identical exponents.
    Posynomial merged() const
    {
        std::vector<Monomial> sorted = terms_;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Monomial& a, const Monomial& b) { return a.factors() < b.factors(); });
        std::vector<Monomial> out;
        out.reserve(sorted.size());
        for (auto& t : sorted) {
            if (!out.empty() && out.back().same_exponents(t))
                out.back() = Monomial(out.back().coefficient() + t.coefficient(), out.back().factors());
            else
                out.push_back(std::move(t));
        }
        return {variables_, std::move(out)};
    }

private:
    std::size_t variables_ = 0;
    std::vector<Monomial> terms_;
};

inline void term_values(const Posynomial& p, std::span<const double> x, std::vector<double>& out)
{
    require(x.size() == p.variables(), "posynomial: variable vector has the wrong length");
    out.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        out[k] = p.terms()[k](x);
}

inline double evaluate_posynomial(const Posynomial& p, std::span<const double> x)
{
    require(x.size() == p.variables(), "posynomial: variable vector has the wrong length");
    double sum = 0.0;
    for (const auto& t : p.terms())
        sum += t(x);
    return sum;
}

inline double evaluate_posynomial(const Posynomial& p, const Eigen::VectorXd& x)
{
    return evaluate_posynomial(p, std::span<const double>(x.data(), x.size()));
}

/// Weighted AM-GM bound prod_k (g_k / gamma_k)^gamma_k <= sum_k g_k.
/// Terms with zero weight are left out of the product.
inline Monomial amgm_lower_bound(const Posynomial& p, std::span<const double> weights)
{
    require(weights.size() == p.size(), "amgm_lower_bound: one weight per term required");
    double total = 0.0;
    for (double g : weights) {
        require(g >= 0.0 && std::isfinite(g), "amgm_lower_bound: weights must be non-negative");
        total += g;
    }
    require(std::abs(total - 1.0) <= 1e-9, "amgm_lower_bound: weights must sum to one");

    std::vector<double> exponents(p.variables(), 0.0);
    double log_coefficient = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double g = weights[k];
        if (g == 0.0)
            continue;
        const auto& term = p.terms()[k];
        log_coefficient += g * (std::log(term.coefficient()) - std::log(g));
        for (const auto& f : term.factors())
            exponents[f.variable] += g * f.power;
    }

    std::vector<Factor> factors;
    for (std::size_t i = 0; i < exponents.size(); ++i)
        if (exponents[i] != 0.0)
            factors.push_back({i, exponents[i]});
    return {std::exp(log_coefficient), std::move(factors)};
}

inline Monomial amgm_lower_bound(const Posynomial& p, const std::vector<double>& weights)
{
    return amgm_lower_bound(p, std::span<const double>(weights));
}

} // namespace wpt
