#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gfk/configuration.hpp"
#include "gfk/error.hpp"

namespace gfk {

/// Value and Laplacian ratio of a trial function at one configuration.
struct Derivs {
    double value = 0.0;
    double lap_ratio = 0.0; // (Delta phi0)/phi0
};

// A trial function type T provides:
//   double e0() const
//   double value(const Configuration&) const
//   Derivs derivs(const Configuration&, double* drift_out) const
// where drift_out receives grad(phi0)/phi0 for every coordinate. Evaluators
// are immutable and safe to share across workers.

/// Product of 1-D Gaussians: phi0 = prod_i exp(-omega x_i^2 / 2).
/// Exact ground state of n independent unit-mass oscillators when omega
/// matches the potential frequency; detuned omegas exercise the weighting.
class GaussianTrial {
public:
    GaussianTrial(double omega, int n_osc) : omega_(omega), n_osc_(n_osc) {
        if (omega <= 0.0 || n_osc < 1)
            throw Error(ErrorCode::InvalidParams, "gaussian trial needs omega > 0, n_osc >= 1");
    }

    double e0() const { return 0.5 * omega_ * static_cast<double>(n_osc_); }
    double omega() const { return omega_; }

    double value(const Configuration& c) const {
        double s = 0.0;
        for (double x : c.coords) s += x * x;
        return std::exp(-0.5 * omega_ * s);
    }

    Derivs derivs(const Configuration& c, double* drift_out) const {
        double lap = 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < c.coords.size(); ++i) {
            double x = c.coords[i];
            drift_out[i] = -omega_ * x;
            lap += omega_ * omega_ * x * x - omega_;
            s += x * x;
        }
        return {std::exp(-0.5 * omega_ * s), lap};
    }

private:
    double omega_;
    int n_osc_;
};

/// phi0 = exp(-z r) for a single 3-D particle; exact hydrogenic ground state
/// with V = -z/r, so V_p vanishes identically.
class HydrogenicTrial {
public:
    explicit HydrogenicTrial(double z, double r_min = 1e-10) : z_(z), r_min_(r_min) {
        if (z <= 0.0) throw Error(ErrorCode::InvalidParams, "hydrogenic trial needs z > 0");
    }

    double e0() const { return -0.5 * z_ * z_; }
    double z() const { return z_; }

    double value(const Configuration& c) const {
        return std::exp(-z_ * radius_checked(c));
    }

    Derivs derivs(const Configuration& c, double* drift_out) const {
        double r = radius_checked(c);
        for (int d = 0; d < 3; ++d) drift_out[d] = -z_ * c.coords[d] / r;
        double lap = z_ * z_ - 2.0 * (z_ / r);
        return {std::exp(-z_ * r), lap};
    }

private:
    double radius_checked(const Configuration& c) const {
        double r = c.radius(0);
        if (r < r_min_)
            throw Error(ErrorCode::EvaluationAtNucleus, "configuration within r_min of nucleus");
        return r;
    }

    double z_;
    double r_min_;
};

/// phi0 = 1: no drift, no reference energy. Paths become plain Brownian motion
/// and the Feynman-Kac weight carries the bare potential.
struct UnitTrial {
    double e0() const { return 0.0; }
    double value(const Configuration&) const { return 1.0; }
    Derivs derivs(const Configuration& c, double* drift_out) const {
        for (std::size_t i = 0; i < c.coords.size(); ++i) drift_out[i] = 0.0;
        return {1.0, 0.0};
    }
};

/// Type-erased evaluator bundle for user-defined trials.
class TrialFunction {
public:
    std::function<double(const Configuration&)> value_fn;
    std::function<std::vector<double>(const Configuration&)> drift_fn;
    std::function<double(const Configuration&)> lap_ratio_fn;
    double reference_energy = 0.0;

    double e0() const { return reference_energy; }
    double value(const Configuration& c) const { return value_fn(c); }
    Derivs derivs(const Configuration& c, double* drift_out) const {
        std::vector<double> d = drift_fn(c);
        for (std::size_t i = 0; i < d.size(); ++i) drift_out[i] = d[i];
        return {value_fn(c), lap_ratio_fn(c)};
    }

    template <class Trial>
    static TrialFunction from(Trial t) {
        TrialFunction f;
        f.reference_energy = t.e0();
        f.value_fn = [t](const Configuration& c) { return t.value(c); };
        f.drift_fn = [t](const Configuration& c) {
            std::vector<double> out(c.coords.size());
            t.derivs(c, out.data());
            return out;
        };
        f.lap_ratio_fn = [t](const Configuration& c) {
            std::vector<double> scratch(c.coords.size());
            return t.derivs(c, scratch.data()).lap_ratio;
        };
        return f;
    }
};

template <class Trial>
std::vector<double> trial_drift(const Trial& t, const Configuration& c) {
    std::vector<double> out(c.coords.size());
    t.derivs(c, out.data());
    return out;
}

template <class Trial>
double trial_lap_ratio(const Trial& t, const Configuration& c) {
    std::vector<double> scratch(c.coords.size());
    return t.derivs(c, scratch.data()).lap_ratio;
}

/// V = sum_i omega_i^2 x_i^2 / 2 for independent 1-D oscillators.
class HarmonicPotential {
public:
    explicit HarmonicPotential(std::vector<double> omegas) : omegas_(std::move(omegas)) {
        for (double w : omegas_)
            if (w <= 0.0) throw Error(ErrorCode::InvalidParams, "frequencies must be positive");
    }
    explicit HarmonicPotential(int n) : omegas_(n, 1.0) {}

    double operator()(const Configuration& c) const {
        double v = 0.0;
        for (std::size_t i = 0; i < c.coords.size(); ++i) {
            double w = omegas_[i % omegas_.size()];
            v += 0.5 * w * w * c.coords[i] * c.coords[i];
        }
        return v;
    }

    const std::vector<double>& omegas() const { return omegas_; }

private:
    std::vector<double> omegas_;
};

/// Atomic potential, infinite nuclear mass, nucleus at the origin:
/// V = -sum_i z/r_i + sum_{i<j} 1/r_ij.
class CoulombPotential {
public:
    CoulombPotential(double z, int n_electrons, double r_min = 1e-10)
        : z_(z), n_(n_electrons), r_min_(r_min) {
        if (z <= 0.0 || n_electrons < 1)
            throw Error(ErrorCode::InvalidParams, "coulomb potential needs z > 0, n >= 1");
    }

    double operator()(const Configuration& c) const {
        double v = 0.0;
        for (int i = 0; i < n_; ++i) {
            double r = c.radius(i);
            if (r < r_min_)
                throw Error(ErrorCode::EvaluationAtNucleus, "electron within r_min of nucleus");
            v -= z_ / r;
        }
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                double rij = c.distance(i, j);
                if (rij < r_min_)
                    throw Error(ErrorCode::CoalescencePoint, "electrons within r_min of each other");
                v += 1.0 / rij;
            }
        return v;
    }

    double z() const { return z_; }
    int n_electrons() const { return n_; }

private:
    double z_;
    int n_;
    double r_min_;
};

inline CoulombPotential coulomb_potential(double z, int n_electrons) {
    return CoulombPotential(z, n_electrons);
}

/// Physical potential paired with the drift-perturbed potential
/// V_p = V - e0 - (1/2) (Delta phi0)/phi0; V_p == 0 iff phi0 is exact.
struct PerturbedPotential {
    std::function<double(const Configuration&)> v;
    std::function<double(const Configuration&)> v_p;
    double e0 = 0.0;
};

template <class Trial, class V>
PerturbedPotential make_perturbed(const Trial& trial, V potential) {
    PerturbedPotential p;
    p.e0 = trial.e0();
    p.v = potential;
    p.v_p = [trial, potential, e0 = trial.e0()](const Configuration& c) {
        return potential(c) - e0 - 0.5 * trial_lap_ratio(trial, c);
    };
    return p;
}

/// Potential for which `trial` is exact: V = e0 + (1/2) lap_ratio, so every
/// path weight is identically 1 (variational / stationary sampling mode).
template <class Trial>
auto exact_potential_for(const Trial& trial) {
    return [trial, e0 = trial.e0()](const Configuration& c) {
        return e0 + 0.5 * trial_lap_ratio(trial, c);
    };
}

} // namespace gfk
