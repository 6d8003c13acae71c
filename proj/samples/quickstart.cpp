// Bound ||e^{tA}|| for a 3x3 Jordan block from r(omega) alone, then compare
// with the exact norm.

#include <iostream>

#include "semibound/semibound.hpp"

using namespace semibound;

int main() {
    const auto a = build_jordan(3, Complex(-1.0, 0.0));
    const LineSweeper sweeper(a);
    const double mu = sweeper.numerical_abscissa(); // ||e^{tA}|| <= e^{mu t}
    const double omega = -0.5;
    const auto r = sweeper.sweep(omega);
    std::cout << "spectral abscissa " << sweeper.abscissa() << ", numerical abscissa " << mu << "\n"
              << "r(" << omega << ") in [" << r.r_lo << ", " << r.r_hi << "]\n";

    const std::vector<double> ts{0.5, 1, 2, 4, 8, 16};
    const auto gps = gps_curve(r.r_lo, Exponential{1.0, mu}, omega, ts, SplitRule::Optimal);
    const auto propa = propa_curve(1.0, mu, omega, r.r_lo, ts);
    const auto truth = semigroup_norms(a, ts);
    std::cout << "t,truth,gps,propa\n";
    for (std::size_t i = 0; i < ts.size(); ++i)
        std::cout << ts[i] << "," << truth[i] << "," << gps.values[i] << "," << propa.values[i] << "\n";
}
