#pragma once

#include <limits>
#include <string>
#include <vector>

namespace latwave {

enum class KernelKind { dirac, gaussian, uniform, tabulated };

// Even nonnegative averaging kernel with unit mass. lambda0 is the abscissa
// beyond which the two-sided exponential moment diverges; all built-in kinds
// have lambda0 = +inf (point mass or compact/Gaussian tails), but a model
// file may declare a smaller one.
struct KernelSpec {
    KernelKind kind = KernelKind::dirac;
    double variance = 1.0;    // gaussian
    double half_width = 1.0;  // uniform
    // tabulated: sample offsets (strictly increasing, symmetric about 0) and
    // nonnegative density values, interpreted piecewise-linearly in between.
    std::vector<double> table_y;
    std::vector<double> table_h;
    double lambda0 = std::numeric_limits<double>::infinity();

    double support_radius() const;  // inf for gaussian, 0 for dirac
    bool renormalized = false;      // tabulated mass was rescaled to 1 on load
};

const char* kernel_kind_name(KernelKind k);

// Two-sided exponential moment G(lambda) = \int h(y) e^{-lambda y} dy.
// Closed forms for dirac/gaussian/uniform, adaptive Simpson per table
// segment otherwise. Even kernels make G even with G(0)=1.
double kernel_mgf(const KernelSpec& k, double lambda);
double kernel_mgf_d1(const KernelSpec& k, double lambda);  // dG/dlambda
double kernel_mgf_d2(const KernelSpec& k, double lambda);

// Symmetric quadrature weights for (h*phi) sampled at offsets j*spacing,
// j = -reach..reach. Weights are nonnegative, even in j, and renormalized so
// their sum is exactly 1; omitted tail mass is below mass_tol.
struct KernelWeights {
    double spacing = 1.0;
    long reach = 0;                // offsets span [-reach, reach]
    std::vector<double> w;         // size 2*reach+1, center at index reach
    double weight(long j) const { return w[static_cast<size_t>(j + reach)]; }
};

KernelWeights kernel_weights(const KernelSpec& k, double spacing, double mass_tol);

// Same stencil with the density translated by shift in [0, spacing): weight j
// carries the mass near offset j*spacing - shift. Lets a convolution with a
// fractionally shifted argument read plain node values with nonnegative
// weights instead of interpolating between nodes. Asymmetric; reach grows by
// one. Refused for dirac (a point mass between nodes has no node stencil).
KernelWeights kernel_weights_shifted(const KernelSpec& k, double spacing, double mass_tol,
                                     double shift);

} // namespace latwave
