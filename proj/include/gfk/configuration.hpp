#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gfk/error.hpp"

namespace gfk {

/// Positions of n_particles particles in `dim` dimensions at one time slice,
/// stored flat as [p0_x, p0_y, ..., p1_x, ...] in atomic units.
struct Configuration {
    std::vector<double> coords;
    int dim = 0;
    int n_particles = 0;

    Configuration() = default;

    Configuration(int n_particles_, int dim_)
        : coords(static_cast<std::size_t>(n_particles_) * dim_, 0.0),
          dim(dim_), n_particles(n_particles_) {
        if (n_particles_ <= 0 || dim_ <= 0)
            throw Error(ErrorCode::InvalidParams, "particle count and dimension must be positive");
    }

    Configuration(std::vector<double> coords_, int n_particles_, int dim_)
        : coords(std::move(coords_)), dim(dim_), n_particles(n_particles_) {
        if (n_particles_ <= 0 || dim_ <= 0)
            throw Error(ErrorCode::InvalidParams, "particle count and dimension must be positive");
        if (coords.size() != static_cast<std::size_t>(n_particles_) * dim_)
            throw Error(ErrorCode::InvalidParams, "coords length must equal n_particles*dim");
    }

    std::size_t size() const { return coords.size(); }

    double* particle(int i) { return coords.data() + static_cast<std::size_t>(i) * dim; }
    const double* particle(int i) const { return coords.data() + static_cast<std::size_t>(i) * dim; }

    /// Euclidean distance of particle i from the origin.
    double radius(int i) const {
        const double* p = particle(i);
        double s = 0.0;
        for (int d = 0; d < dim; ++d) s += p[d] * p[d];
        return std::sqrt(s);
    }

    /// Distance between particles i and j.
    double distance(int i, int j) const {
        const double* a = particle(i);
        const double* b = particle(j);
        double s = 0.0;
        for (int d = 0; d < dim; ++d) {
            double diff = a[d] - b[d];
            s += diff * diff;
        }
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (double c : coords)
            if (!std::isfinite(c)) return false;
        return true;
    }
};

} // namespace gfk
