// Thermodynamics of a single harmonic oscillator at T = 2: Monte Carlo
// estimates next to the Cameron-Martin and spectral-sum columns.

#include <cstdio>

#include "gfk/stats.hpp"
#include "gfk/thermo.hpp"

int main() {
    gfk::PathParams paths;
    paths.stepsize = 1.0 / 30.0;
    paths.n_paths = 10000;
    paths.seed = 7;

    gfk::ThermoParams tp = gfk::make_thermo_params(2.0, 1, paths);
    gfk::ThermoReport rep = gfk::thermo_report(tp);

    std::printf("harmonic oscillator, T = %g (beta = %g), %lld paths, h = 1/30\n",
                rep.temperature, rep.beta, static_cast<long long>(paths.n_paths));
    std::printf("%-4s %-16s %-14s %-14s %-14s\n", "", "monte carlo", "cameron-martin",
                "spectral", "gauss-moment");
    for (const auto& q : rep.quantities) {
        std::string mc = gfk::format_parenthetical(q.mc_value, q.mc_stderr);
        std::printf("%-4s %-16s ", q.name.c_str(), mc.c_str());
        if (q.cameron_martin) std::printf("%-14.6f ", *q.cameron_martin);
        else std::printf("%-14s ", "-");
        if (q.spectral) std::printf("%-14.6f ", *q.spectral);
        else std::printf("%-14s ", "-");
        if (q.gaussian_moment) std::printf("%-14.6f", *q.gaussian_moment);
        else std::printf("%-14s", "-");
        std::printf("\n");
    }
    return 0;
}
