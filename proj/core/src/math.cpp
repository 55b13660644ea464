#include <mpqkd/math.hpp>

#include <cmath>
#include <stdexcept>

namespace mpqkd {

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary_entropy: argument outside [0, 1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double wrap_two_pi(double phi) {
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

double wrap_pi(double phi) {
    double r = wrap_two_pi(phi);
    if (r > 3.14159265358979323846) r -= two_pi;
    return r;
}

double circular_distance(double a, double b, double period) {
    double d = std::fmod(std::fabs(a - b), period);
    return d > 0.5 * period ? period - d : d;
}

}  // namespace mpqkd
