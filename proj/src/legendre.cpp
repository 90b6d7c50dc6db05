#include "spheroidal/legendre.hpp"

#include <cmath>
#include <stdexcept>

namespace spheroidal {

void legendre_row(int m, int count, double x, double* out) {
    if (m < 0 || count < 1) throw std::invalid_argument("legendre_row: bad m or count");
    // P^m_m = (2m-1)!! (1-x^2)^{m/2}, then upward in degree:
    //   (l-m+1) P^m_{l+1} = (2l+1) x P^m_l - (l+m) P^m_{l-1}.
    double s2 = (1.0 - x) * (1.0 + x);
    double pmm = 1.0;
    if (m > 0) {
        double sm = std::sqrt(s2);
        for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * sm;
    }
    out[0] = pmm;
    if (count == 1) return;
    out[1] = (2.0 * m + 1.0) * x * pmm;
    for (int j = 2; j < count; ++j) {
        int l = m + j - 1;  // degree of out[j-1]
        out[j] = ((2.0 * l + 1.0) * x * out[j - 1] - (l + m) * out[j - 2]) / double(l - m + 1);
    }
}

double legendre_row_derivative(int m, int j, double x, const double* row) {
    int l = m + j;
    double below = j > 0 ? row[j - 1] : 0.0;
    return ((l + m) * below - l * x * row[j]) / ((1.0 - x) * (1.0 + x));
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // Newton on P_n from the Chebyshev-based initial guess; symmetry fills
    // the other half.
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) {
                p1 = x;
            }
            for (int l = 1; l < n; ++l) {
                double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / ((x - 1.0) * (x + 1.0));
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        // One final evaluation of P_n' at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int l = 1; l < n; ++l) {
            double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / ((x - 1.0) * (x + 1.0));
        if (n == 1) {
            x = 0.0;
            dp = 1.0;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / (((1.0 - x) * (1.0 + x)) * dp * dp);
        r.nodes[n - 1 - i] = -x;
        r.weights[n - 1 - i] = r.weights[i];
    }
    if (n % 2 == 1) {
        r.nodes[n / 2] = 0.0;
    }
    return r;
}

}  // namespace spheroidal
