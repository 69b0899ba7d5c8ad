#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gfk/configuration.hpp"

namespace gfk {

enum class ObservableFamily {
    PowerOfRi,        // sum_i r_i^n
    PowerOfRij,       // sum_{i<j} r_ij^n
    InversePowerOfRi, // sum_i r_i^-n
    InversePowerOfRij,
    Custom,
};

/// Scalar function of one configuration, tagged with the table family it
/// reproduces. The r_i / r_ij families sum over electrons as in the usual
/// <r_i^n>, <r_ij^n> columns.
struct Observable {
    std::string name;
    ObservableFamily family = ObservableFamily::Custom;
    int power = 0;
    std::function<double(const Configuration&)> eval;

    static Observable power_of_ri(int n) {
        Observable o;
        o.name = "r_i^" + std::to_string(n);
        o.family = ObservableFamily::PowerOfRi;
        o.power = n;
        o.eval = [n](const Configuration& c) {
            double s = 0.0;
            for (int i = 0; i < c.n_particles; ++i) s += std::pow(c.radius(i), n);
            return s;
        };
        return o;
    }

    static Observable power_of_rij(int n) {
        Observable o;
        o.name = "r_ij^" + std::to_string(n);
        o.family = ObservableFamily::PowerOfRij;
        o.power = n;
        o.eval = [n](const Configuration& c) {
            double s = 0.0;
            for (int i = 0; i < c.n_particles; ++i)
                for (int j = i + 1; j < c.n_particles; ++j) s += std::pow(c.distance(i, j), n);
            return s;
        };
        return o;
    }

    static Observable inverse_power_of_ri(int n) {
        Observable o = power_of_ri(-n);
        o.name = "r_i^-" + std::to_string(n);
        o.family = ObservableFamily::InversePowerOfRi;
        o.power = n;
        return o;
    }

    static Observable inverse_power_of_rij(int n) {
        Observable o = power_of_rij(-n);
        o.name = "r_ij^-" + std::to_string(n);
        o.family = ObservableFamily::InversePowerOfRij;
        o.power = n;
        return o;
    }

    static Observable custom(std::string name, std::function<double(const Configuration&)> f) {
        Observable o;
        o.name = std::move(name);
        o.family = ObservableFamily::Custom;
        o.eval = std::move(f);
        return o;
    }

    static Observable unity() {
        return custom("1", [](const Configuration&) { return 1.0; });
    }
};

} // namespace gfk
