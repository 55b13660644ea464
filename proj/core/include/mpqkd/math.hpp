#pragma once

#include <cstdint>

namespace mpqkd {

inline constexpr double pi = 3.1415926535897932384626433832795;
inline constexpr double two_pi = 6.283185307179586476925286766559;

// Binary Shannon entropy in bits, with the 0*log(0) = 0 convention.
// Valid for x in [0, 1]; throws std::domain_error outside.
double binary_entropy(double x);

// Wraps an angle to [0, 2*pi).
double wrap_two_pi(double phi);

// Wraps an angle to (-pi, pi].
double wrap_pi(double phi);

// Distance between two points on a circle of circumference `period`.
// Result is in [0, period/2].
double circular_distance(double a, double b, double period);

// Maximizes a unimodal function on [lo, hi] by golden-section search.
// Stops when the bracket width is below tol. Returns the abscissa of the
// best point seen.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

}  // namespace mpqkd
