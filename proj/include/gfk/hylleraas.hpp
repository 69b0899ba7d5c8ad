#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gfk/configuration.hpp"
#include "gfk/error.hpp"
#include "gfk/trial.hpp"

namespace gfk {

/// Bounded electron-electron / electron-nucleus coordinate transform
/// q = r / (1 + b r), monotone from [0,inf) onto [0, 1/b).
inline double q_transform(double r, double b) { return r / (1.0 + b * r); }

struct HylleraasTerm {
    double a = 0.0;
    std::vector<int> powers; // 6 entries (q1 q2 q3 q12 q13 q23) or 10 for 4 electrons
};

/// Hylleraas-exponential trial specification. Three-electron form:
///   psi = A[ (r3 - c) exp(hyll - alpha r1 - beta r2 - gamma r3) ]
/// four-electron form:
///   psi = A[ ((r3-d)(r4-d) + c x3.x4) exp(hyll - alpha r1 - beta r2 - gamma r3 - delta r4) ]
/// with hyll = sum_k a_k prod q^powers and A the signed sum over same-spin
/// electron permutations.
struct HylleraasSpec {
    int n_electrons = 3;
    double z = 0.0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
    double b = 1.0;
    double c = 0.0;
    double d = 0.0; // 4-electron prefactor constant
    double e0 = 0.0;
    std::vector<HylleraasTerm> terms;
    std::vector<std::string> spins; // same label = same spin

    int n_pairs() const { return n_electrons * (n_electrons - 1) / 2; }
    int n_factors() const { return n_electrons + n_pairs(); }

    void validate() const {
        if (n_electrons != 3 && n_electrons != 4)
            throw Error(ErrorCode::SpecShapeMismatch, "3 or 4 electrons supported");
        if (b <= 0.0) throw Error(ErrorCode::InvalidParams, "b must be positive");
        if (terms.empty()) throw Error(ErrorCode::InvalidParams, "term list empty");
        for (const auto& t : terms) {
            if (static_cast<int>(t.powers.size()) != n_factors())
                throw Error(ErrorCode::SpecShapeMismatch,
                            "term power count disagrees with particle count");
            for (int p : t.powers)
                if (p < 0) throw Error(ErrorCode::InvalidParams, "powers must be nonnegative");
        }
        if (!spins.empty() && static_cast<int>(spins.size()) != n_electrons)
            throw Error(ErrorCode::SpecShapeMismatch, "spin pattern length != electron count");
    }

    std::vector<std::string> effective_spins() const {
        if (!spins.empty()) return spins;
        return n_electrons == 3 ? std::vector<std::string>{"u", "u", "d"}
                                : std::vector<std::string>{"u", "u", "d", "d"};
    }
};

namespace hylleraas_detail {

struct Permutation {
    std::array<int, 4> map{}; // slot -> electron
    int sign = 1;
};

inline int parity(const std::vector<int>& perm) {
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) ++inversions;
    return (inversions % 2 == 0) ? 1 : -1;
}

/// Signed permutations over each same-spin group, combined across groups.
inline std::vector<Permutation> spin_permutations(const HylleraasSpec& spec) {
    auto spins = spec.effective_spins();
    const int n = spec.n_electrons;

    std::vector<std::vector<int>> groups;
    std::vector<std::string> seen;
    for (int e = 0; e < n; ++e) {
        bool found = false;
        for (std::size_t g = 0; g < seen.size(); ++g)
            if (seen[g] == spins[e]) { groups[g].push_back(e); found = true; break; }
        if (!found) {
            seen.push_back(spins[e]);
            groups.push_back({e});
        }
    }

    std::vector<Permutation> out;
    Permutation identity;
    for (int i = 0; i < n; ++i) identity.map[i] = i;
    out.push_back(identity);
    for (const auto& group : groups) {
        std::vector<int> order(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) order[i] = static_cast<int>(i);
        std::vector<std::vector<int>> arrangements;
        std::vector<int> cur = order;
        do { arrangements.push_back(cur); } while (std::next_permutation(cur.begin(), cur.end()));
        std::vector<Permutation> expanded;
        for (const auto& base : out)
            for (const auto& arr : arrangements) {
                Permutation p = base;
                for (std::size_t i = 0; i < group.size(); ++i) p.map[group[i]] = group[arr[i]];
                p.sign = base.sign * parity(arr);
                expanded.push_back(p);
            }
        out = std::move(expanded);
    }
    return out;
}

} // namespace hylleraas_detail

/// Antisymmetrized Hylleraas-exponential trial with analytic drift and
/// Laplacian ratio (per-permutation log derivatives combined with a common
/// exponential scale). A finite-difference mode cross-checks the analytics.
class HylleraasTrial {
public:
    explicit HylleraasTrial(HylleraasSpec spec, double r_min = 1e-10)
        : spec_(std::move(spec)), r_min_(r_min) {
        spec_.validate();
        perms_ = hylleraas_detail::spin_permutations(spec_);
        exps_ = {spec_.alpha, spec_.beta, spec_.gamma, spec_.delta};
    }

    const HylleraasSpec& spec() const { return spec_; }
    double e0() const { return spec_.e0; }
    bool use_finite_difference = false;
    double fd_step = 1e-5;

    double value(const Configuration& c) const {
        double scale;
        double v = scaled_value(c, scale);
        return v * std::exp(scale);
    }

    Derivs derivs(const Configuration& c, double* drift_out) const {
        if (use_finite_difference) return fd_derivs(c, drift_out);
        return analytic_derivs(c, drift_out);
    }

    Derivs fd_derivs(const Configuration& c, double* drift_out) const {
        const double h = fd_step;
        double scale0;
        double v0 = scaled_value(c, scale0);
        check_nodal(v0, c, scale0);
        Configuration w = c;
        double lap = 0.0;
        for (std::size_t i = 0; i < c.coords.size(); ++i) {
            double x = c.coords[i];
            w.coords[i] = x + h;
            double sp;
            double vp = scaled_value(w, sp) * std::exp(sp - scale0);
            w.coords[i] = x - h;
            double sm;
            double vm = scaled_value(w, sm) * std::exp(sm - scale0);
            w.coords[i] = x;
            drift_out[i] = (vp - vm) / (2.0 * h * v0);
            lap += (vp + vm - 2.0 * v0) / (h * h * v0);
        }
        return {v0 * std::exp(scale0), lap};
    }

private:
    static constexpr double kNodalRelative = 1e-30;

    struct Geometry {
        double r[4];
        double ur[4][3];
        double rij[4][4];
        double uij[4][4][3]; // unit vector from j toward i
    };

    void fill_geometry(const Configuration& c, Geometry& g) const {
        const int n = spec_.n_electrons;
        if (c.n_particles != n || c.dim != 3)
            throw Error(ErrorCode::SpecShapeMismatch, "configuration shape mismatch");
        for (int i = 0; i < n; ++i) {
            const double* p = c.particle(i);
            double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            if (r < r_min_)
                throw Error(ErrorCode::EvaluationAtNucleus, "electron at nucleus");
            g.r[i] = r;
            for (int k = 0; k < 3; ++k) g.ur[i][k] = p[k] / r;
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double* a = c.particle(i);
                const double* bpt = c.particle(j);
                double d0 = a[0] - bpt[0], d1 = a[1] - bpt[1], d2 = a[2] - bpt[2];
                double r = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
                if (r < r_min_)
                    throw Error(ErrorCode::CoalescencePoint, "electrons coalesce");
                g.rij[i][j] = g.rij[j][i] = r;
                g.uij[i][j][0] = d0 / r;
                g.uij[i][j][1] = d1 / r;
                g.uij[i][j][2] = d2 / r;
                for (int k = 0; k < 3; ++k) g.uij[j][i][k] = -g.uij[i][j][k];
            }
    }

    /// Per-permutation pieces of T = P exp(G) relative to a common scale.
    struct TermPieces {
        double pref = 0.0;            // P
        double expo = 0.0;            // G
        double grad_pref[4][3] = {};  // dP/dx per slot
        double grad_expo[4][3] = {};  // dG/dx per slot
        double lap_pref = 0.0;        // Delta P
        double lap_expo = 0.0;        // Delta G
    };

    void eval_perm(const Configuration& c, const Geometry& g,
                   const hylleraas_detail::Permutation& perm, TermPieces& t) const {
        const int n = spec_.n_electrons;
        const int npair = spec_.n_pairs();

        // slot-indexed geometry through the permutation
        double r[4], fr[10], q[10], qp[10], qpp[10];
        const double* dir[10][2]; // per pair factor: direction seen by each member slot
        int pair_slots[10][2];
        for (int s = 0; s < n; ++s) {
            r[s] = g.r[perm.map[s]];
            fr[s] = r[s];
        }
        int f = n;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++f) {
                fr[f] = g.rij[perm.map[i]][perm.map[j]];
                pair_slots[f][0] = i;
                pair_slots[f][1] = j;
                dir[f][0] = g.uij[perm.map[i]][perm.map[j]];
                dir[f][1] = g.uij[perm.map[j]][perm.map[i]];
            }
        for (int fac = 0; fac < n + npair; ++fac) {
            double denom = 1.0 + spec_.b * fr[fac];
            q[fac] = fr[fac] / denom;
            qp[fac] = 1.0 / (denom * denom);
            qpp[fac] = -2.0 * spec_.b / (denom * denom * denom);
        }

        // hyll = sum_k tau_k, tau_k = a_k prod q^p
        double hyll = 0.0, lap_hyll = 0.0;
        double grad_hyll[4][3] = {};
        for (const auto& term : spec_.terms) {
            double tau = term.a;
            double dlog = 0.0; // sum_f p_f (Delta q_f / q_f - |grad q_f|^2 / q_f^2)
            double w[4][3] = {};
            for (int fac = 0; fac < n + npair; ++fac) {
                int p = term.powers[fac];
                if (p == 0) continue;
                for (int rep = 0; rep < p; ++rep) tau *= q[fac];
                double s = p * qp[fac] / q[fac];
                if (fac < n) {
                    int slot = fac;
                    for (int k = 0; k < 3; ++k) w[slot][k] += s * g.ur[perm.map[slot]][k];
                    double lapq = qpp[fac] + 2.0 * qp[fac] / fr[fac];
                    dlog += p * (lapq / q[fac] - (qp[fac] * qp[fac]) / (q[fac] * q[fac]));
                } else {
                    double lapq = 2.0 * (qpp[fac] + 2.0 * qp[fac] / fr[fac]);
                    dlog += p * (lapq / q[fac] - 2.0 * (qp[fac] * qp[fac]) / (q[fac] * q[fac]));
                    for (int m = 0; m < 2; ++m) {
                        int slot = pair_slots[fac][m];
                        for (int k = 0; k < 3; ++k) w[slot][k] += s * dir[fac][m][k];
                    }
                }
            }
            hyll += tau;
            double w2 = 0.0;
            for (int s = 0; s < n; ++s) {
                for (int k = 0; k < 3; ++k) grad_hyll[s][k] += tau * w[s][k];
                w2 += w[s][0] * w[s][0] + w[s][1] * w[s][1] + w[s][2] * w[s][2];
            }
            lap_hyll += tau * (w2 + dlog);
        }

        // G = hyll - sum_s exps[s] r_s
        t.expo = hyll;
        t.lap_expo = lap_hyll;
        for (int s = 0; s < n; ++s) {
            t.expo -= exps_[s] * r[s];
            t.lap_expo -= exps_[s] * 2.0 / r[s];
            for (int k = 0; k < 3; ++k)
                t.grad_expo[s][k] = grad_hyll[s][k] - exps_[s] * g.ur[perm.map[s]][k];
        }

        // prefactor
        for (int s = 0; s < n; ++s)
            for (int k = 0; k < 3; ++k) t.grad_pref[s][k] = 0.0;
        if (n == 3) {
            t.pref = r[2] - spec_.c;
            for (int k = 0; k < 3; ++k) t.grad_pref[2][k] = g.ur[perm.map[2]][k];
            t.lap_pref = 2.0 / r[2];
        } else {
            const double* x3 = c.particle(perm.map[2]);
            const double* x4 = c.particle(perm.map[3]);
            double dot = x3[0] * x4[0] + x3[1] * x4[1] + x3[2] * x4[2];
            t.pref = (r[2] - spec_.d) * (r[3] - spec_.d) + spec_.c * dot;
            for (int k = 0; k < 3; ++k) {
                t.grad_pref[2][k] = g.ur[perm.map[2]][k] * (r[3] - spec_.d) + spec_.c * x4[k];
                t.grad_pref[3][k] = g.ur[perm.map[3]][k] * (r[2] - spec_.d) + spec_.c * x3[k];
            }
            t.lap_pref = (2.0 / r[2]) * (r[3] - spec_.d) + (2.0 / r[3]) * (r[2] - spec_.d);
        }
    }

    /// psi scaled by exp(-scale); scale is the max exponent across permutations.
    double scaled_value(const Configuration& c, double& scale) const {
        Geometry g;
        fill_geometry(c, g);
        double expos[24] = {}, prefs[24] = {};
        int signs[24] = {};
        int np = 0;
        TermPieces t;
        for (const auto& perm : perms_) {
            eval_perm(c, g, perm, t);
            expos[np] = t.expo;
            prefs[np] = t.pref;
            signs[np] = perm.sign;
            ++np;
        }
        scale = expos[0];
        for (int i = 1; i < np; ++i) scale = std::max(scale, expos[i]);
        double v = 0.0;
        for (int i = 0; i < np; ++i) v += signs[i] * prefs[i] * std::exp(expos[i] - scale);
        return v;
    }

    void check_nodal(double psi_scaled, const Configuration& c, double scale) const {
        Geometry g;
        fill_geometry(c, g);
        double max_term = 0.0;
        TermPieces t;
        for (const auto& perm : perms_) {
            eval_perm(c, g, perm, t);
            max_term = std::max(max_term, std::abs(t.pref) * std::exp(t.expo - scale));
        }
        if (std::abs(psi_scaled) < kNodalRelative * max_term)
            throw Error(ErrorCode::NodalRegion, "sign cancellation at nodal surface");
    }

    Derivs analytic_derivs(const Configuration& c, double* drift_out) const {
        Geometry g;
        fill_geometry(c, g);
        const int n = spec_.n_electrons;

        TermPieces pieces[24];
        int np = 0;
        for (const auto& perm : perms_) eval_perm(c, g, perm, pieces[np++]);
        double scale = pieces[0].expo;
        for (int i = 1; i < np; ++i) scale = std::max(scale, pieces[i].expo);

        double psi = 0.0, lap = 0.0, max_term = 0.0;
        double grad[4][3] = {};
        for (int i = 0; i < np; ++i) {
            const TermPieces& t = pieces[i];
            const auto& perm = perms_[static_cast<std::size_t>(i)];
            double e = std::exp(t.expo - scale);
            double tv = t.pref * e;
            psi += perm.sign * tv;
            max_term = std::max(max_term, std::abs(tv));

            double cross = 0.0, g2 = 0.0;
            for (int s = 0; s < n; ++s)
                for (int k = 0; k < 3; ++k) {
                    double gt = (t.grad_pref[s][k] + t.pref * t.grad_expo[s][k]) * e;
                    grad[perm.map[s]][k] += perm.sign * gt;
                    cross += t.grad_pref[s][k] * t.grad_expo[s][k];
                    g2 += t.grad_expo[s][k] * t.grad_expo[s][k];
                }
            lap += perm.sign * (t.lap_pref + 2.0 * cross + t.pref * (t.lap_expo + g2)) * e;
        }

        if (std::abs(psi) < kNodalRelative * max_term)
            throw Error(ErrorCode::NodalRegion, "sign cancellation at nodal surface");

        for (int e = 0; e < n; ++e)
            for (int k = 0; k < 3; ++k) drift_out[e * 3 + k] = grad[e][k] / psi;
        return {psi * std::exp(scale), lap / psi};
    }

    HylleraasSpec spec_;
    double r_min_;
    std::vector<hylleraas_detail::Permutation> perms_;
    std::array<double, 4> exps_{};
};

/// Parses the line-oriented parameter format:
///   header: z alpha beta gamma [delta] b c [d] e0   (7 fields = 3e, 9 = 4e)
///   optional: spins <label per electron>
///   terms:  a_k c d e f g h [m n o p]
/// '#' starts a comment.
inline HylleraasSpec parse_hylleraas(std::istream& in) {
    HylleraasSpec spec;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;

        if (!have_header) {
            std::vector<double> vals;
            for (const auto& s : tokens) {
                try {
                    vals.push_back(std::stod(s));
                } catch (...) {
                    throw Error(ErrorCode::ConfigInvalid, "bad header token '" + s + "'");
                }
            }
            if (vals.size() == 7) {
                spec.n_electrons = 3;
                spec.z = vals[0];
                spec.alpha = vals[1];
                spec.beta = vals[2];
                spec.gamma = vals[3];
                spec.b = vals[4];
                spec.c = vals[5];
                spec.e0 = vals[6];
            } else if (vals.size() == 9) {
                spec.n_electrons = 4;
                spec.z = vals[0];
                spec.alpha = vals[1];
                spec.beta = vals[2];
                spec.gamma = vals[3];
                spec.delta = vals[4];
                spec.b = vals[5];
                spec.c = vals[6];
                spec.d = vals[7];
                spec.e0 = vals[8];
            } else {
                throw Error(ErrorCode::ConfigInvalid,
                            "header needs 7 (3-electron) or 9 (4-electron) fields");
            }
            have_header = true;
            continue;
        }
        if (tokens[0] == "spins") {
            spec.spins.assign(tokens.begin() + 1, tokens.end());
            continue;
        }
        HylleraasTerm term;
        std::vector<double> vals;
        for (const auto& s : tokens) {
            try {
                vals.push_back(std::stod(s));
            } catch (...) {
                throw Error(ErrorCode::ConfigInvalid, "bad term token '" + s + "'");
            }
        }
        if (static_cast<int>(vals.size()) != 1 + spec.n_factors())
            throw Error(ErrorCode::ConfigInvalid, "term line needs a_k plus " +
                                                      std::to_string(spec.n_factors()) +
                                                      " integer powers");
        term.a = vals[0];
        for (std::size_t i = 1; i < vals.size(); ++i) {
            double p = vals[i];
            if (p < 0.0 || p != std::floor(p))
                throw Error(ErrorCode::ConfigInvalid, "powers must be nonnegative integers");
            term.powers.push_back(static_cast<int>(p));
        }
        spec.terms.push_back(std::move(term));
    }
    if (!have_header) throw Error(ErrorCode::ConfigInvalid, "empty parameter file");
    spec.validate();
    return spec;
}

inline HylleraasSpec load_hylleraas_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::TrialFileMissing, path);
    return parse_hylleraas(in);
}

inline HylleraasTrial hylleraas_trial(const HylleraasSpec& spec) { return HylleraasTrial(spec); }

} // namespace gfk
