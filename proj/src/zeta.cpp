#include "modsym/zeta.hpp"

#include <cmath>
#include <stdexcept>

namespace modsym {

namespace {

// B_2, B_4, ..., B_28
constexpr double kBern[] = {1.0 / 6,
                            -1.0 / 30,
                            1.0 / 42,
                            -1.0 / 30,
                            5.0 / 66,
                            -691.0 / 2730,
                            7.0 / 6,
                            -3617.0 / 510,
                            43867.0 / 798,
                            -174611.0 / 330,
                            854513.0 / 138,
                            -236364091.0 / 2730,
                            8553103.0 / 6,
                            -23749461029.0 / 870};

constexpr int kBernTerms = 12;

}  // namespace

void hurwitz_zeta_with_dz(cdouble z, double a, cdouble& value, cdouble& dz) {
    if (a <= 0) throw std::invalid_argument("hurwitz_zeta: a > 0 required");
    if (z.real() <= 1.0) throw std::invalid_argument("hurwitz_zeta: Re z > 1 required");
    // shift until the asymptotic start point is comfortably large
    const double target = 25.0 + 0.5 * std::abs(z.imag());
    cdouble sum = 0, dsum = 0;
    double A = a;
    while (A < target) {
        double lg = std::log(A);
        cdouble t = std::exp(-z * lg);
        sum += t;
        dsum += -lg * t;
        A += 1.0;
    }
    const double lgA = std::log(A);
    const cdouble Amz = std::exp(-z * lgA);  // A^{-z}
    const cdouble A1mz = Amz * A;            // A^{1-z}
    sum += A1mz / (z - 1.0) + 0.5 * Amz;
    dsum += -lgA * A1mz / (z - 1.0) - A1mz / ((z - 1.0) * (z - 1.0)) - 0.5 * lgA * Amz;
    // Euler-Maclaurin correction: sum_k B_2k/(2k)! (z)_{2k-1} A^{-z-2k+1}
    cdouble poch = z;        // (z)_{2k-1} at k = 1
    cdouble dpoch = 1.0;     // its z-derivative
    double fact = 2.0;       // (2k)!
    cdouble Apow = Amz / A;  // A^{-z-(2k-1)}
    for (int k = 1; k <= kBernTerms; ++k) {
        cdouble coeff = kBern[k - 1] / fact;
        sum += coeff * poch * Apow;
        dsum += coeff * (dpoch * Apow - lgA * poch * Apow);
        cdouble f1 = z + double(2 * k - 1), f2 = z + double(2 * k);
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
        poch = poch * f1 * f2;
        fact *= double(2 * k + 1) * double(2 * k + 2);
        Apow /= A * A;
    }
    value = sum;
    dz = dsum;
}

cdouble hurwitz_zeta(cdouble z, double a) {
    cdouble v, d;
    hurwitz_zeta_with_dz(z, a, v, d);
    return v;
}

cdouble riemann_zeta(cdouble z) { return hurwitz_zeta(z, 1.0); }

}  // namespace modsym
