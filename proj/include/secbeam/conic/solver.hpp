#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "secbeam/conic/program.hpp"

namespace secbeam {

struct SolveOptions {
    double tol = 1e-8;
    int max_iterations = 400;
};

struct ConicSolution {
    enum class Status { optimal, infeasible, numerical_failure, iteration_limit };
    Status status = Status::numerical_failure;
    bool dual_certificate = false;  // infeasibility concluded from the primal ray
    rvec x;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

inline const char* status_name(ConicSolution::Status s) {
    switch (s) {
        case ConicSolution::Status::optimal: return "optimal";
        case ConicSolution::Status::infeasible: return "infeasible";
        case ConicSolution::Status::numerical_failure: return "numerical_failure";
        case ConicSolution::Status::iteration_limit: return "iteration_limit";
    }
    return "?";
}

namespace detail {

constexpr double kSqrt2 = 1.4142135623730951;

inline void svec_to_mat(const double* s, rmat& S) {
    const int d = static_cast<int>(S.rows());
    int k = 0;
    for (int j = 0; j < d; ++j)
        for (int i = j; i < d; ++i, ++k) {
            const double v = (i == j) ? s[k] : s[k] / kSqrt2;
            S(i, j) = v;
            S(j, i) = v;
        }
}

inline void mat_to_svec(const rmat& S, double* out) {
    const int d = static_cast<int>(S.rows());
    int k = 0;
    for (int j = 0; j < d; ++j)
        for (int i = j; i < d; ++i, ++k)
            out[k] = (i == j) ? S(i, j) : kSqrt2 * S(i, j);
}

// One cone block of the homogeneous model, carrying its slice of the data
// matrix restricted to the variables that actually appear in it.
struct Block {
    ConeTag tag = ConeTag::nonneg;
    int rows = 0;
    int offset = 0;   // first row in the stacked slack vector
    int side = 0;     // psd matrix side
    double degree = 0.0;
    std::vector<int> active;  // global variable indices
    rmat A;                   // rows x active.size()
    rvec b;

    // iteration scratch
    rmat Sinv;
};

inline double barrier_degree(const Block& blk) {
    switch (blk.tag) {
        case ConeTag::nonneg: return blk.rows;
        case ConeTag::soc: return 2.0;
        case ConeTag::rsoc: return 2.0;
        case ConeTag::psd: return blk.side;
        case ConeTag::expcone: return 3.0;
        case ConeTag::zero: return 0.0;
    }
    return 0.0;
}

inline bool in_cone(const Block& blk, const double* s) {
    switch (blk.tag) {
        case ConeTag::nonneg:
            for (int i = 0; i < blk.rows; ++i)
                if (!(s[i] > 0)) return false;
            return true;
        case ConeTag::soc: {
            if (!(s[0] > 0)) return false;
            double nn = 0;
            for (int i = 1; i < blk.rows; ++i) nn += s[i] * s[i];
            return s[0] * s[0] - nn > 0;
        }
        case ConeTag::rsoc: {
            if (!(s[0] > 0) || !(s[1] > 0)) return false;
            double nn = 0;
            for (int i = 2; i < blk.rows; ++i) nn += s[i] * s[i];
            return 2.0 * s[0] * s[1] - nn > 0;
        }
        case ConeTag::psd: {
            rmat S(blk.side, blk.side);
            svec_to_mat(s, S);
            Eigen::LLT<rmat> llt(S);
            return llt.info() == Eigen::Success;
        }
        case ConeTag::expcone: {
            const double u = s[0], v = s[1], w = s[2];
            return u > 0 && v > 0 && v * std::log(u / v) - w > 0;
        }
        case ConeTag::zero:
            return true;
    }
    return false;
}

inline bool in_dual(const Block& blk, const double* z) {
    if (blk.tag == ConeTag::expcone) {
        const double p = z[0], q = z[1], r = z[2];
        return p > 0 && r < 0 && q - r + r * std::log(-r / p) > 0;
    }
    return in_cone(blk, z);  // remaining supported cones are self-dual
}

inline void barrier_grad(const Block& blk, const double* s, double* g) {
    switch (blk.tag) {
        case ConeTag::nonneg:
            for (int i = 0; i < blk.rows; ++i) g[i] = -1.0 / s[i];
            return;
        case ConeTag::soc: {
            double nn = 0;
            for (int i = 1; i < blk.rows; ++i) nn += s[i] * s[i];
            const double q = s[0] * s[0] - nn;
            g[0] = -2.0 * s[0] / q;
            for (int i = 1; i < blk.rows; ++i) g[i] = 2.0 * s[i] / q;
            return;
        }
        case ConeTag::rsoc: {
            double nn = 0;
            for (int i = 2; i < blk.rows; ++i) nn += s[i] * s[i];
            const double q = 2.0 * s[0] * s[1] - nn;
            g[0] = -2.0 * s[1] / q;
            g[1] = -2.0 * s[0] / q;
            for (int i = 2; i < blk.rows; ++i) g[i] = 2.0 * s[i] / q;
            return;
        }
        case ConeTag::psd: {
            rmat S(blk.side, blk.side);
            svec_to_mat(s, S);
            const rmat Si = S.llt().solve(rmat::Identity(blk.side, blk.side));
            rvec gs(blk.rows);
            mat_to_svec(Si, gs.data());
            for (int i = 0; i < blk.rows; ++i) g[i] = -gs[i];
            return;
        }
        case ConeTag::expcone: {
            const double u = s[0], v = s[1], w = s[2];
            const double psi = v * std::log(u / v) - w;
            g[0] = -(v / u) / psi - 1.0 / u;
            g[1] = -(std::log(u / v) - 1.0) / psi - 1.0 / v;
            g[2] = 1.0 / psi;
            return;
        }
        case ConeTag::zero:
            return;
    }
}

// out = Hessian(s) * y, using the cached psd inverse when applicable
inline void hess_apply(const Block& blk, const double* s, const double* y,
                       double* out) {
    switch (blk.tag) {
        case ConeTag::nonneg:
            for (int i = 0; i < blk.rows; ++i) out[i] = y[i] / (s[i] * s[i]);
            return;
        case ConeTag::soc: {
            double nn = 0;
            for (int i = 1; i < blk.rows; ++i) nn += s[i] * s[i];
            const double q = s[0] * s[0] - nn;
            // Js = (s0, -sbar); H = -2J/q + 4(Js)(Js)^T/q^2
            double js_y = s[0] * y[0];
            for (int i = 1; i < blk.rows; ++i) js_y -= s[i] * y[i];
            const double c = 4.0 * js_y / (q * q);
            out[0] = -2.0 * y[0] / q + c * s[0];
            for (int i = 1; i < blk.rows; ++i)
                out[i] = 2.0 * y[i] / q - c * s[i];
            return;
        }
        case ConeTag::rsoc: {
            double nn = 0;
            for (int i = 2; i < blk.rows; ++i) nn += s[i] * s[i];
            const double q = 2.0 * s[0] * s[1] - nn;
            // grad q = (2 s1, 2 s0, -2 sbar); H = -Hq/q + (grad q)(grad q)^T/q^2
            double gq_y = 2.0 * s[1] * y[0] + 2.0 * s[0] * y[1];
            for (int i = 2; i < blk.rows; ++i) gq_y -= 2.0 * s[i] * y[i];
            const double c = gq_y / (q * q);
            out[0] = -2.0 * y[1] / q + c * 2.0 * s[1];
            out[1] = -2.0 * y[0] / q + c * 2.0 * s[0];
            for (int i = 2; i < blk.rows; ++i)
                out[i] = 2.0 * y[i] / q - c * 2.0 * s[i];
            return;
        }
        case ConeTag::psd: {
            rmat Y(blk.side, blk.side);
            svec_to_mat(y, Y);
            const rmat R = blk.Sinv * Y * blk.Sinv;
            mat_to_svec(R, out);
            return;
        }
        case ConeTag::expcone: {
            const double u = s[0], v = s[1], w = s[2];
            const double psi = v * std::log(u / v) - w;
            const double pu = v / u, pv = std::log(u / v) - 1.0, pw = -1.0;
            // H = (grad psi)(grad psi)^T/psi^2 - Hess(psi)/psi + diag(1/u^2,1/v^2,0)
            Eigen::Matrix3d H;
            const Eigen::Vector3d gp(pu, pv, pw);
            H = gp * gp.transpose() / (psi * psi);
            H(0, 0) += (v / (u * u)) / psi + 1.0 / (u * u);
            H(0, 1) += -(1.0 / u) / psi;
            H(1, 0) += -(1.0 / u) / psi;
            H(1, 1) += (1.0 / v) / psi + 1.0 / (v * v);
            const Eigen::Vector3d r = H * Eigen::Vector3d(y[0], y[1], y[2]);
            out[0] = r[0];
            out[1] = r[1];
            out[2] = r[2];
            return;
        }
        case ConeTag::zero:
            return;
    }
}

inline void init_slack(const Block& blk, double* s) {
    switch (blk.tag) {
        case ConeTag::nonneg:
            for (int i = 0; i < blk.rows; ++i) s[i] = 1.0;
            return;
        case ConeTag::soc:
            s[0] = 1.0;
            for (int i = 1; i < blk.rows; ++i) s[i] = 0.0;
            return;
        case ConeTag::rsoc:
            s[0] = 1.0;
            s[1] = 1.0;
            for (int i = 2; i < blk.rows; ++i) s[i] = 0.0;
            return;
        case ConeTag::psd: {
            rvec id(blk.rows);
            mat_to_svec(rmat::Identity(blk.side, blk.side), id.data());
            for (int i = 0; i < blk.rows; ++i) s[i] = id[i];
            return;
        }
        case ConeTag::expcone:
            s[0] = std::exp(1.0);
            s[1] = 1.0;
            s[2] = 0.0;
            return;
        case ConeTag::zero:
            return;
    }
}

struct Hsde {
    std::vector<Block> blocks;
    int n = 0;
    int m = 0;
    rvec c;
    double degree = 0.0;
    double norm_b = 0.0, norm_c = 0.0;

    rvec mul_A(const rvec& x) const {
        rvec out = rvec::Zero(m);
        for (const auto& blk : blocks) {
            rvec xa(blk.active.size());
            for (size_t k = 0; k < blk.active.size(); ++k) xa[k] = x[blk.active[k]];
            out.segment(blk.offset, blk.rows) = blk.A * xa;
        }
        return out;
    }

    rvec mul_At(const rvec& y) const {
        rvec out = rvec::Zero(n);
        for (const auto& blk : blocks) {
            const rvec ya = blk.A.transpose() * y.segment(blk.offset, blk.rows);
            for (size_t k = 0; k < blk.active.size(); ++k)
                out[blk.active[k]] += ya[k];
        }
        return out;
    }

    rvec full_b() const {
        rvec out = rvec::Zero(m);
        for (const auto& blk : blocks) out.segment(blk.offset, blk.rows) = blk.b;
        return out;
    }

    rvec hess_full(const rvec& s, const rvec& y) const {
        rvec out = rvec::Zero(m);
        for (const auto& blk : blocks)
            hess_apply(blk, s.data() + blk.offset, y.data() + blk.offset,
                       out.data() + blk.offset);
        return out;
    }

    rvec grad_full(const rvec& s) const {
        rvec out = rvec::Zero(m);
        for (const auto& blk : blocks)
            barrier_grad(blk, s.data() + blk.offset, out.data() + blk.offset);
        return out;
    }

    bool interior(const rvec& s, const rvec& z) const {
        for (const auto& blk : blocks) {
            if (!in_cone(blk, s.data() + blk.offset)) return false;
            if (!in_dual(blk, z.data() + blk.offset)) return false;
        }
        return true;
    }

    void refresh_psd_cache(const rvec& s) {
        for (auto& blk : blocks) {
            if (blk.tag != ConeTag::psd) continue;
            rmat S(blk.side, blk.side);
            svec_to_mat(s.data() + blk.offset, S);
            blk.Sinv = S.llt().solve(rmat::Identity(blk.side, blk.side));
        }
    }

    rmat normal_matrix(const rvec& s, double mu) const {
        rmat M = rmat::Zero(n, n);
        for (const auto& blk : blocks) {
            const int na = static_cast<int>(blk.active.size());
            if (na == 0) continue;
            rmat HA(blk.rows, na);
            for (int k = 0; k < na; ++k)
                hess_apply(blk, s.data() + blk.offset, blk.A.col(k).data(),
                           HA.col(k).data());
            const rmat W = blk.A.transpose() * HA;
            for (int i = 0; i < na; ++i)
                for (int j = 0; j < na; ++j)
                    M(blk.active[i], blk.active[j]) += mu * W(i, j);
        }
        return M;
    }
};

// Distance from the central path at barrier weight mu, measured as the
// H(s)^{-1} norm of z + mu g(s) (with the tau/kappa pair included), scaled
// by 1/mu.  Values below one certify that z is strictly dual-interior.
inline double proximity(const Hsde& h, const rvec& s, const rvec& z, double tau,
                        double kappa) {
    const double nu = h.degree + 1.0;
    const double mu = (s.dot(z) + tau * kappa) / nu;
    if (!(mu > 0)) return std::numeric_limits<double>::infinity();
    double total = (tau * kappa - mu) * (tau * kappa - mu);
    for (const auto& blk : h.blocks) {
        if (blk.tag == ConeTag::zero || blk.rows == 0) continue;
        const double* sp = s.data() + blk.offset;
        rvec r(blk.rows);
        barrier_grad(blk, sp, r.data());
        for (int i = 0; i < blk.rows; ++i) r[i] = z[blk.offset + i] + mu * r[i];
        switch (blk.tag) {
            case ConeTag::nonneg:
                for (int i = 0; i < blk.rows; ++i)
                    total += r[i] * r[i] * sp[i] * sp[i];
                break;
            case ConeTag::psd: {
                rmat S(blk.side, blk.side), R(blk.side, blk.side);
                svec_to_mat(sp, S);
                svec_to_mat(r.data(), R);
                const rmat SR = S * R;
                total += (SR * SR).trace();
                break;
            }
            default: {
                rmat H(blk.rows, blk.rows);
                rvec e = rvec::Zero(blk.rows);
                for (int j = 0; j < blk.rows; ++j) {
                    e[j] = 1.0;
                    hess_apply(blk, sp, e.data(), H.col(j).data());
                    e[j] = 0.0;
                }
                Eigen::LDLT<rmat> ld(H);
                if (ld.info() != Eigen::Success)
                    return std::numeric_limits<double>::infinity();
                total += r.dot(ld.solve(r));
                break;
            }
        }
    }
    return std::sqrt(std::max(total, 0.0)) / mu;
}

// Largest step in (0, 1] keeping every block strictly interior on both sides
// plus tau, kappa positive; coarse backtracking refined by bisection.
inline double max_step(const Hsde& h, const rvec& s, const rvec& z, double tau,
                       double kappa, const rvec& ds, const rvec& dz, double dtau,
                       double dkappa) {
    auto feasible = [&](double a) {
        if (tau + a * dtau <= 0 || kappa + a * dkappa <= 0) return false;
        const rvec s2 = s + a * ds;
        const rvec z2 = z + a * dz;
        return h.interior(s2, z2);
    };
    double hi = 1.0;
    if (feasible(hi)) return hi;
    double lo = 0.0;
    double probe = 0.8;
    while (probe > 1e-12 && !feasible(probe)) probe *= 0.8;
    if (probe <= 1e-12) return 0.0;
    lo = probe;
    hi = probe / 0.8;
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

}  // namespace detail

inline ConicSolution solve(const ConicProgram& prog, const SolveOptions& opt = {}) {
    using detail::Block;
    using detail::Hsde;
    ConicSolution sol;
    try {
        validate(prog);
        const int n = prog.n_vars();

        // objective scaling; the solver minimizes
        double cmax = prog.objective.cwiseAbs().maxCoeff();
        if (prog.vars.empty() || n == 0) throw config_error("program has no variables");
        const double cscale =
            cmax > 0 ? std::clamp(1.0 / cmax, 1e-3, 1e3) : 1.0;

        Hsde h;
        h.n = n;
        h.c = -cscale * prog.objective;

        // zero cones become equalities handled by a nullspace change of
        // variables; everything else feeds the barrier machinery
        std::vector<const ConstraintBlock*> eqs, cones;
        for (const auto& b : prog.blocks)
            (b.cone == ConeTag::zero ? eqs : cones).push_back(&b);

        rmat E;
        rvec d;
        rvec x0 = rvec::Zero(n);
        rmat N;  // columns span the feasible subspace
        int nred = n;
        if (!eqs.empty()) {
            int erows = 0;
            for (const auto* b : eqs) erows += b->row_count();
            E = rmat::Zero(erows, n);
            d = rvec::Zero(erows);
            int at = 0;
            for (const auto* b : eqs) {
                for (const auto& co : b->coeffs) E(at + co.row, co.col) += co.value;
                for (int r = 0; r < b->row_count(); ++r) d[at + r] = b->rhs[r];
                at += b->row_count();
            }
            Eigen::ColPivHouseholderQR<rmat> qr(E);
            x0 = qr.solve(d);
            if ((E * x0 - d).cwiseAbs().maxCoeff() >
                1e-9 * (1.0 + d.cwiseAbs().maxCoeff())) {
                sol.status = ConicSolution::Status::infeasible;
                return sol;
            }
            Eigen::ColPivHouseholderQR<rmat> qrt(E.transpose());
            const int rank = static_cast<int>(qrt.rank());
            nred = n - rank;
            const rmat Q = qrt.householderQ();
            N = Q.rightCols(nred);
        }

        // assemble blocks with per-block uniform scaling and, for psd, the
        // sqrt(2) off-diagonal weights that make the slack an isometric
        // vectorization of the matrix
        int mrows = 0;
        for (const auto* cb : cones) {
            Block blk;
            blk.tag = cb->cone;
            blk.side = cb->cone == ConeTag::psd ? cb->dim : 0;
            blk.rows = cb->row_count();
            blk.offset = mrows;
            mrows += blk.rows;

            double mx = 0.0;
            for (const auto& co : cb->coeffs) mx = std::max(mx, std::abs(co.value));
            for (double v : cb->rhs) mx = std::max(mx, std::abs(v));
            const double scale = mx > 0 ? std::clamp(1.0 / mx, 1e-3, 1e3) : 1.0;

            std::vector<double> rowscale(blk.rows, scale);
            if (blk.tag == ConeTag::psd) {
                for (int j = 0; j < blk.side; ++j)
                    for (int i = j + 1; i < blk.side; ++i)
                        rowscale[psd_row_index(i, j, blk.side)] *= detail::kSqrt2;
            }

            std::vector<int> colmap(n, -1);
            for (const auto& co : cb->coeffs)
                if (co.value != 0.0 && colmap[co.col] < 0) {
                    colmap[co.col] = static_cast<int>(blk.active.size());
                    blk.active.push_back(co.col);
                }
            blk.A = rmat::Zero(blk.rows, blk.active.size());
            blk.b = rvec::Zero(blk.rows);
            for (const auto& co : cb->coeffs)
                blk.A(co.row, colmap[co.col]) += rowscale[co.row] * co.value;
            for (int r = 0; r < blk.rows; ++r) blk.b[r] = rowscale[r] * cb->rhs[r];
            blk.degree = detail::barrier_degree(blk);
            h.degree += blk.degree;
            h.blocks.push_back(std::move(blk));
        }
        h.m = mrows;

        if (nred < n) {
            // substitute x = x0 + N y in every block and in the objective
            for (auto& blk : h.blocks) {
                rmat Afull = rmat::Zero(blk.rows, n);
                for (size_t k = 0; k < blk.active.size(); ++k)
                    Afull.col(blk.active[k]) = blk.A.col(k);
                blk.b -= Afull * x0;
                rmat Ared = Afull * N;
                blk.active.clear();
                std::vector<int> keep;
                for (int j = 0; j < nred; ++j)
                    if (Ared.col(j).cwiseAbs().maxCoeff() > 0) keep.push_back(j);
                blk.A = rmat::Zero(blk.rows, keep.size());
                for (size_t k = 0; k < keep.size(); ++k) {
                    blk.A.col(k) = Ared.col(keep[k]);
                    blk.active.push_back(keep[k]);
                }
            }
            h.c = (N.transpose() * h.c).eval();
            h.n = nred;
        }

        const rvec b = h.full_b();
        h.norm_b = 1.0 + b.norm();
        h.norm_c = 1.0 + h.c.norm();

        auto finish_x = [&](const rvec& xr) {
            return nred < n ? rvec(x0 + N * xr) : xr;
        };

        if (h.m == 0) {
            if (h.c.cwiseAbs().maxCoeff() == 0.0) {
                sol.status = ConicSolution::Status::optimal;
                sol.x = finish_x(rvec::Zero(h.n));
                sol.objective = prog.objective.dot(sol.x);
            } else {
                sol.status = ConicSolution::Status::infeasible;
                sol.dual_certificate = true;
            }
            return sol;
        }

        const double nu = h.degree + 1.0;
        ConicSolution::Status verdict = ConicSolution::Status::iteration_limit;
        rvec x, s(h.m), z(h.m);
        double tau = 1.0, kappa = 1.0;
        int iter = 0;
        sol.iterations = 0;

        // two passes of the same path following loop: a generous proximity
        // leash takes long steps and finishes quickly on most instances, a
        // strict rerun mops up the drift prone ones
        for (const double eta_keep : {1.8, 0.9}) {
        x = rvec::Zero(h.n);
        s.setZero();
        tau = 1.0;
        kappa = 1.0;
        for (const auto& blk : h.blocks)
            detail::init_slack(blk, s.data() + blk.offset);
        z = -h.grad_full(s);
        verdict = ConicSolution::Status::iteration_limit;

        for (iter = 0; iter < opt.max_iterations; ++iter) {
            const rvec rd = h.mul_At(z) + h.c * tau;
            const rvec rp = -h.mul_A(x) + b * tau - s;
            const double rg = -h.c.dot(x) - b.dot(z) - kappa;
            const double mu = (s.dot(z) + tau * kappa) / nu;
            if (!std::isfinite(mu) || !std::isfinite(rg)) break;

            const double pobj = h.c.dot(x) / tau;
            const double dobj = -b.dot(z) / tau;
            sol.primal_residual =
                (h.mul_A(x) / tau + s / tau - b).norm() / h.norm_b;
            sol.dual_residual = (h.mul_At(z) / tau + h.c).norm() / h.norm_c;
            sol.gap = std::abs(pobj - dobj) /
                      (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
            if (sol.primal_residual <= opt.tol && sol.dual_residual <= opt.tol &&
                sol.gap <= opt.tol) {
                verdict = ConicSolution::Status::optimal;
                break;
            }

            // certificate checks
            const double hz = -b.dot(z);
            if (hz > 1e-10 && h.mul_At(z).norm() <= 1e-7 * hz * h.norm_c) {
                verdict = ConicSolution::Status::infeasible;
                sol.dual_certificate = false;
                break;
            }
            const double hx = -h.c.dot(x);
            if (hx > 1e-10 && (h.mul_A(x) + s).norm() <= 1e-7 * hx * h.norm_b) {
                verdict = ConicSolution::Status::infeasible;
                sol.dual_certificate = true;
                break;
            }

            h.refresh_psd_cache(s);
            rmat M = h.normal_matrix(s, mu);
            const double reg = 1e-12 * (1.0 + M.trace() / h.n);
            M.diagonal().array() += reg;
            Eigen::LLT<rmat> llt(M);
            if (llt.info() != Eigen::Success) {
                M.diagonal().array() += 1e6 * reg;
                llt.compute(M);
                if (llt.info() != Eigen::Success) break;
            }

            const rvec hb = h.hess_full(s, b);
            const rvec At_hb = h.mul_At(hb);
            const rvec x2 = llt.solve(mu * At_hb - h.c);

            auto newton = [&](double sigma, rvec& dxo, rvec& dso, rvec& dzo,
                              double& dtauo, double& dkappao) {
                const double rs = 1.0 - sigma;
                const rvec R1 = -rs * rd;
                const rvec R2 = -rs * rp;
                const double R3 = -rs * rg;
                const rvec R4 = -(z + sigma * mu * h.grad_full(s));
                const double R5 = sigma * mu - tau * kappa;

                const rvec hr2 = h.hess_full(s, R2);
                const rvec x1 = llt.solve(R1 - h.mul_At(R4) - mu * h.mul_At(hr2));
                const double denom = -h.c.dot(x2) - mu * hb.dot(h.mul_A(x2)) +
                                     mu * b.dot(hb) + kappa / tau;
                const double numer = R3 + h.c.dot(x1) + mu * hb.dot(h.mul_A(x1)) +
                                     b.dot(R4) + mu * b.dot(hr2) + R5 / tau;
                dtauo = numer / denom;
                dxo = x1 + dtauo * x2;
                dso = -h.mul_A(dxo) + b * dtauo - R2;
                dzo = R4 - mu * h.hess_full(s, dso);
                dkappao = (R5 - kappa * dtauo) / tau;
            };

            rvec dx, ds, dz;
            double dtau = 0, dkappa = 0;
            newton(0.0, dx, ds, dz, dtau, dkappa);
            const double a_aff =
                detail::max_step(h, s, z, tau, kappa, ds, dz, dtau, dkappa);
            const double sigma =
                std::clamp(std::pow(1.0 - a_aff, 3.0), 1e-3, 0.9);

            newton(sigma, dx, ds, dz, dtau, dkappa);
            double a = 0.99 * detail::max_step(h, s, z, tau, kappa, ds, dz, dtau,
                                               dkappa);

            // keep every iterate close to the central path; far outside that
            // neighborhood the search directions degrade and the dual iterate
            // can grind into a cone boundary
            auto eta_at = [&](double step) {
                return detail::proximity(h, s + step * ds, z + step * dz,
                                         tau + step * dtau,
                                         kappa + step * dkappa);
            };
            while (a > 1e-9 && eta_at(a) > eta_keep) a *= 0.7;
            if (a < 1e-4) {
                const double eta_now = detail::proximity(h, s, z, tau, kappa);
                rvec cx, cs, cz;
                double ctau = 0, ckappa = 0;
                newton(1.0, cx, cs, cz, ctau, ckappa);
                double ac = 0.99 * detail::max_step(h, s, z, tau, kappa, cs, cz,
                                                    ctau, ckappa);
                auto ceta_at = [&](double step) {
                    return detail::proximity(h, s + step * cs, z + step * cz,
                                             tau + step * ctau,
                                             kappa + step * ckappa);
                };
                const double bound = std::max(eta_keep, 0.99 * eta_now);
                while (ac > 1e-9 && ceta_at(ac) > bound) ac *= 0.7;
                if (ac > a) {
                    dx = cx;
                    ds = cs;
                    dz = cz;
                    dtau = ctau;
                    dkappa = ckappa;
                    a = ac;
                }
            }
            if (a < 1e-9) break;
            x += a * dx;
            s += a * ds;
            z += a * dz;
            tau += a * dtau;
            kappa += a * dkappa;
        }
        sol.iterations += iter;

        if (verdict == ConicSolution::Status::iteration_limit &&
            sol.primal_residual <= 1e-7 && sol.dual_residual <= 1e-7 &&
            sol.gap <= 1e-7)
            verdict = ConicSolution::Status::optimal;
        if (verdict == ConicSolution::Status::optimal ||
            verdict == ConicSolution::Status::infeasible)
            break;
        }

        if (verdict == ConicSolution::Status::optimal) {
            sol.x = finish_x(x / tau);
            sol.objective = prog.objective.dot(sol.x);
        } else if (verdict == ConicSolution::Status::iteration_limit &&
                   iter < opt.max_iterations) {
            verdict = ConicSolution::Status::numerical_failure;
        }
        sol.status = verdict;
        return sol;
    } catch (const std::exception&) {
        sol.status = ConicSolution::Status::numerical_failure;
        return sol;
    }
}

}  // namespace secbeam
