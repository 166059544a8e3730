#pragma once

#include <span>
#include <vector>

namespace mmdmix {

/// Scalar kernels for the squared-MMD objective. `triangle` is
/// k(x,y) = -|x-y|^p (unrectified, p in (0,2]); `gaussian` averages
/// exp(-(x-y)^2 / h) over a bandwidth mixture.
struct Kernel {
    enum class Kind { Triangle, Gaussian };

    Kind kind = Kind::Triangle;
    double p = 2.0;
    std::vector<double> bandwidths = {1, 2, 4, 8, 16};

    static Kernel triangle(double p = 2.0);
    static Kernel gaussian(std::vector<double> bandwidths);

    void validate() const; // throws ConfigError on bad parameters
};

double kernel_eval(const Kernel& k, double x, double y);

// d/dx k(x, y); subgradient 0 at the triangle kernel's kink (x == y).
double kernel_grad_x(const Kernel& k, double x, double y);

// Biased V-statistic with diagonal terms:
//   (1/M^2) sum k(x_i,x_j) + (1/N^2) sum k(y_i,y_j) - (2/MN) sum k(x_i,y_j)
double squared_mmd(std::span<const double> x, std::span<const double> y, const Kernel& k);

// Gradient of squared_mmd with respect to x, holding y fixed.
void squared_mmd_grad(std::span<const double> x, std::span<const double> y,
                      const Kernel& k, std::span<double> grad_x);

} // namespace mmdmix
