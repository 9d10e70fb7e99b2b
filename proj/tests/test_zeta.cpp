#include <doctest.h>

#include <cmath>

#include "modsym/zeta.hpp"

using namespace modsym;

TEST_CASE("Riemann zeta reference values") {
    CHECK(riemann_zeta(2.0).real() == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-14));
    CHECK(riemann_zeta(4.0).real() ==
          doctest::Approx(std::pow(M_PI, 4) / 90.0).epsilon(1e-14));
    CHECK(riemann_zeta(1.5).real() == doctest::Approx(2.612375348685488).epsilon(1e-13));
    CHECK(riemann_zeta(2.5).real() == doctest::Approx(1.341487257250917).epsilon(1e-13));
}

TEST_CASE("Hurwitz zeta against brute-force summation") {
    // slow oracle: long partial sum plus an integral tail with midpoint correction
    auto brute = [](double z, double a) {
        long double s = 0;
        double j = 0;
        for (; j < 4e6; ++j) s += std::pow((long double)(a + j), (long double)-z);
        double A = a + j;
        s += std::pow((long double)A, (long double)(1.0 - z)) / (z - 1.0) +
             0.5L * std::pow((long double)A, (long double)-z);
        return double(s);
    };
    for (double z : {1.8, 2.5, 4.75}) {
        for (double a : {1.0, 2.5, 17.0, 2048.37}) {
            double ref = brute(z, a);
            CHECK(hurwitz_zeta(z, a).real() == doctest::Approx(ref).epsilon(1e-11));
        }
    }
}

TEST_CASE("Hurwitz zeta z-derivative vs finite differences") {
    for (double z : {2.2, 3.7}) {
        for (double a : {1.5, 100.0}) {
            cdouble v, d;
            hurwitz_zeta_with_dz(z, a, v, d);
            double h = 1e-6;
            cdouble fd = (hurwitz_zeta(z + h, a) - hurwitz_zeta(z - h, a)) / (2.0 * h);
            CHECK(d.real() == doctest::Approx(fd.real()).epsilon(1e-7));
        }
    }
}

TEST_CASE("complex arguments: conjugate symmetry and residue-class splitting") {
    cdouble z(2.5, 1.25);
    cdouble v = hurwitz_zeta(z, 3.0);
    cdouble vc = hurwitz_zeta(std::conj(z), 3.0);
    CHECK(std::abs(vc - std::conj(v)) < 1e-13);
    // sum over residue classes mod 3 recombines to the full zeta
    cdouble total = 0;
    for (int t = 0; t < 3; ++t)
        total += std::pow(cdouble(3.0), -z) * hurwitz_zeta(z, (1.0 + t) / 3.0);
    CHECK(std::abs(total - hurwitz_zeta(z, 1.0)) < 1e-12);
}
