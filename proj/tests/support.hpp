// Shared fixtures for the test suites.
#ifndef CPH_TESTS_SUPPORT_HPP
#define CPH_TESTS_SUPPORT_HPP

#include "cph/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace cph::test {

// Edge order and orientation of the running example (5 nodes, 8 edges).
inline const char* kRunningExample = R"(# running example
edge V  V 1 3 {10*t*sin(200*pi*t)}
edge C1 C 1 4 5e-6
edge C2 C 3 4 5e-6
edge G  G 1 2 1
edge R  R 2 3 1
edge L1 L 4 5 0.1
edge L2 L 5 2 0.1
edge I  I 1 5 {10*sin(10*t)}
)";

// Same topology with symbolic-friendly parameters for closed-form checks.
inline std::string running_example(double C1, double C2, double G, double R, double L1, double L2) {
    auto num = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    return "edge V V 1 3 {10*t*sin(200*pi*t)}\n"
           "edge C1 C 1 4 " + num(C1) + "\n" +
           "edge C2 C 3 4 " + num(C2) + "\n" +
           "edge G G 1 2 " + num(G) + "\n" +
           "edge R R 2 3 " + num(R) + "\n" +
           "edge L1 L 4 5 " + num(L1) + "\n" +
           "edge L2 L 5 2 " + num(L2) + "\n" +
           "edge I I 1 5 {10*sin(10*t)}\n";
}

// Capacitor twig discharging through a resistor link: x = (q_C, i_R),
// residual (q' - i, i + q), solution q = exp(-t) from q(0) = 1.
inline const char* kRcLoop = "edge C C 1 2 1\nedge R R 2 1 1\n";

inline const char* kLcLoop = "edge C C 1 2 1\nedge L L 1 2 1\n";

inline const char* kVrLoop = "edge V V 1 2 {sin(t)}\nedge R R 1 2 1000\n";

inline const char* kDiodeClipper = R"(# source, series resistor, antiparallel diodes, voltmeter
edge V  V 2 1 {(2*t/0.03)*sin(2*pi*1000*t)}
edge R  R 2 3 1000
edge D1 G 1 3 {1e-13*(exp(v/0.025)-1)}
edge D2 G 3 1 {1e-13*(exp(v/0.025)-1)}
edge I  I 3 1 0
)";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    RealMatrix matrix(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
        RealMatrix M(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) M(i, j) = uniform(lo, hi);
        return M;
    }
    // PD but generally non-symmetric.
    RealMatrix pd_matrix(Eigen::Index n) {
        const RealMatrix S = matrix(n, n);
        const RealMatrix K = matrix(n, n);
        return S * S.transpose() + 0.1 * RealMatrix::Identity(n, n) + (K - K.transpose());
    }
    RealMatrix orthogonal(Eigen::Index n) {
        Eigen::HouseholderQR<RealMatrix> qr(matrix(n, n));
        return qr.householderQ();
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace cph::test

#endif
