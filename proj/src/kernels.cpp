#include "kernels.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmdmix {

Kernel Kernel::triangle(double p) {
    Kernel k;
    k.kind = Kind::Triangle;
    k.p = p;
    k.validate();
    return k;
}

Kernel Kernel::gaussian(std::vector<double> bandwidths) {
    Kernel k;
    k.kind = Kind::Gaussian;
    k.bandwidths = std::move(bandwidths);
    k.validate();
    return k;
}

void Kernel::validate() const {
    if (kind == Kind::Triangle) {
        if (!(p > 0.0 && p <= 2.0)) {
            std::ostringstream os;
            os << "kernel.p must lie in (0, 2], got " << p;
            throw ConfigError(os.str());
        }
    } else {
        if (bandwidths.empty())
            throw ConfigError("kernel.bandwidths must be nonempty");
        for (double h : bandwidths)
            if (!(h > 0.0))
                throw ConfigError("kernel.bandwidths must be strictly positive");
    }
}

double kernel_eval(const Kernel& k, double x, double y) {
    const double d = x - y;
    if (k.kind == Kernel::Kind::Triangle)
        return -std::pow(std::abs(d), k.p);
    double acc = 0.0;
    for (double h : k.bandwidths) acc += std::exp(-d * d / h);
    return acc / static_cast<double>(k.bandwidths.size());
}

double kernel_grad_x(const Kernel& k, double x, double y) {
    const double d = x - y;
    if (k.kind == Kernel::Kind::Triangle) {
        if (d == 0.0) return 0.0;
        const double s = d > 0.0 ? 1.0 : -1.0;
        return -k.p * std::pow(std::abs(d), k.p - 1.0) * s;
    }
    double acc = 0.0;
    for (double h : k.bandwidths) acc += std::exp(-d * d / h) * (-2.0 * d / h);
    return acc / static_cast<double>(k.bandwidths.size());
}

double squared_mmd(std::span<const double> x, std::span<const double> y, const Kernel& k) {
    if (x.empty() || y.empty())
        throw ContractViolation("squared_mmd: sample sets must be nonempty");
    // The estimator is symmetric in (x, y); canonicalize the argument order
    // so both call orders run the identical summation and agree bitwise.
    const bool swap = std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end());
    if (swap) std::swap(x, y);
    const std::size_t m = x.size(), n = y.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            sxx += kernel_eval(k, x[i], x[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            syy += kernel_eval(k, y[i], y[j]);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sxy += kernel_eval(k, x[i], y[j]);
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    return sxx / (dm * dm) + syy / (dn * dn) - 2.0 * (sxy / (dm * dn));
}

void squared_mmd_grad(std::span<const double> x, std::span<const double> y,
                      const Kernel& k, std::span<double> grad_x) {
    if (x.empty() || y.empty())
        throw ContractViolation("squared_mmd_grad: sample sets must be nonempty");
    if (grad_x.size() != x.size())
        throw ContractViolation("squared_mmd_grad: gradient buffer size mismatch");
    const std::size_t m = x.size(), n = y.size();
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    for (std::size_t a = 0; a < m; ++a) {
        double self = 0.0, cross = 0.0;
        for (std::size_t j = 0; j < m; ++j) self += kernel_grad_x(k, x[a], x[j]);
        for (std::size_t j = 0; j < n; ++j) cross += kernel_grad_x(k, x[a], y[j]);
        grad_x[a] = 2.0 * self / (dm * dm) - 2.0 * cross / (dm * dn);
    }
}

} // namespace mmdmix
