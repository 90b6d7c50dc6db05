#pragma once

#include <vector>

namespace spheroidal {

// Associated Legendre functions without the Condon-Shortley phase:
//   P^m_l(x) = (1-x^2)^{m/2} (d/dx)^m P_l(x),  |x| <= 1.
// Fills out[j] = P^m_{m+j}(x) for j = 0..count-1.
void legendre_row(int m, int count, double x, double* out);

// Derivative of the row entries at |x| < 1:
//   (1-x^2) dP^m_l/dx = (l+m) P^m_{l-1} - l x P^m_l,  P^m_{m-1} := 0.
// row must hold P^m_{m+j}(x) as produced by legendre_row.
double legendre_row_derivative(int m, int j, double x, const double* row);

struct GaussLegendre {
    std::vector<double> nodes;    // ascending in (-1, 1)
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
GaussLegendre gauss_legendre(int n);

}  // namespace spheroidal
