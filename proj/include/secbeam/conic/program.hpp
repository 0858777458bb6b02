#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "secbeam/common.hpp"

namespace secbeam {

enum class ConeTag { zero, nonneg, soc, rsoc, psd, expcone };

inline const char* cone_name(ConeTag t) {
    switch (t) {
        case ConeTag::zero: return "zero";
        case ConeTag::nonneg: return "nonneg";
        case ConeTag::soc: return "soc";
        case ConeTag::rsoc: return "rsoc";
        case ConeTag::psd: return "psd";
        case ConeTag::expcone: return "expcone";
    }
    return "?";
}

inline ConeTag cone_from_name(const std::string& s) {
    if (s == "zero") return ConeTag::zero;
    if (s == "nonneg") return ConeTag::nonneg;
    if (s == "soc") return ConeTag::soc;
    if (s == "rsoc") return ConeTag::rsoc;
    if (s == "psd") return ConeTag::psd;
    if (s == "expcone") return ConeTag::expcone;
    throw config_error("unknown cone tag: " + s);
}

struct Coeff {
    int row = 0;  // local to the block
    int col = 0;  // global variable index
    double value = 0.0;
};

// One cone membership requirement: slack = rhs - coeffs * x must lie in the
// tagged cone. For psd the block holds the lower triangle (column-major,
// diagonal included) of a symmetric dim x dim matrix; for every other tag
// the row count equals dim. Semantics of the slack vector per tag:
//   zero     slack = 0
//   nonneg   slack >= 0 elementwise
//   soc      slack[0] >= norm(slack[1:])
//   rsoc     2 slack[0] slack[1] >= norm(slack[2:])^2, slack[0,1] >= 0
//   psd      sym(slack) positive semidefinite
//   expcone  slack = (u,v,w) with u >= v exp(w/v), v > 0 (closure included)
struct ConstraintBlock {
    std::string label;  // which model constraint produced this block
    ConeTag cone = ConeTag::nonneg;
    int dim = 1;
    int complex_side = 0;  // nonzero when the block embeds a complex LMI
    std::vector<Coeff> coeffs;
    std::vector<double> rhs;

    int row_count() const {
        return cone == ConeTag::psd ? dim * (dim + 1) / 2 : dim;
    }
};

struct VarBlock {
    std::string name;
    int offset = 0;
    int size = 1;
};

struct ConicProgram {
    std::vector<VarBlock> vars;
    rvec objective;  // sense is always maximize
    std::vector<ConstraintBlock> blocks;

    int n_vars() const { return objective.size(); }

    int add_var(const std::string& name, int size = 1) {
        for (const auto& v : vars)
            if (v.name == name) throw config_error("duplicate variable: " + name);
        const int off = n_vars();
        vars.push_back({name, off, size});
        rvec obj = rvec::Zero(off + size);
        obj.head(off) = objective;
        objective = obj;
        return off;
    }

    const VarBlock& var(const std::string& name) const {
        for (const auto& v : vars)
            if (v.name == name) return v;
        throw config_error("unknown variable: " + name);
    }

    Eigen::VectorBlock<const rvec> value_of(const rvec& x,
                                            const std::string& name) const {
        const VarBlock& v = var(name);
        return x.segment(v.offset, v.size);
    }
};

inline int psd_row_index(int i, int j, int dim) {
    // lower triangle, column-major: column j holds dim - j entries
    if (i < j) std::swap(i, j);
    return j * dim - j * (j - 1) / 2 + (i - j);
}

inline void validate(const ConicProgram& p) {
    const int n = p.n_vars();
    for (const auto& b : p.blocks) {
        if (b.label.empty()) throw config_error("constraint without label");
        if (b.dim < 1) throw config_error("bad cone dimension: " + b.label);
        if (b.cone == ConeTag::soc && b.dim < 2)
            throw config_error("soc needs dim >= 2: " + b.label);
        if (b.cone == ConeTag::rsoc && b.dim < 3)
            throw config_error("rsoc needs dim >= 3: " + b.label);
        if (b.cone == ConeTag::expcone && b.dim != 3)
            throw config_error("expcone needs dim 3: " + b.label);
        const int rows = b.row_count();
        if (static_cast<int>(b.rhs.size()) != rows)
            throw config_error("rhs length mismatch: " + b.label);
        for (const auto& c : b.coeffs) {
            if (c.row < 0 || c.row >= rows)
                throw config_error("row out of range: " + b.label);
            if (c.col < 0 || c.col >= n)
                throw config_error("unresolved variable reference: " + b.label);
        }
    }
}

struct DimensionSummary {
    struct Entry {
        std::string label;
        ConeTag cone;
        int dim;
        int complex_side;
    };
    std::vector<Entry> entries;
    int total_rows = 0;
    int n_vars = 0;

    int count(ConeTag t, int complex_side) const {
        int k = 0;
        for (const auto& e : entries)
            if (e.cone == t && e.complex_side == complex_side) ++k;
        return k;
    }
};

inline DimensionSummary dimension_summary(const ConicProgram& p) {
    DimensionSummary s;
    s.n_vars = p.n_vars();
    for (const auto& b : p.blocks) {
        s.entries.push_back({b.label, b.cone, b.dim, b.complex_side});
        s.total_rows += b.row_count();
    }
    return s;
}

inline rmat embed_hermitian(const cmat& M) {
    const int n = static_cast<int>(M.rows());
    if (M.cols() != n) throw dimension_error("matrix not square");
    if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw dimension_error("matrix not Hermitian");
    rmat E(2 * n, 2 * n);
    E.topLeftCorner(n, n) = M.real();
    E.topRightCorner(n, n) = -M.imag();
    E.bottomLeftCorner(n, n) = M.imag();
    E.bottomRightCorner(n, n) = M.real();
    return E;
}

// Appends one embedded-Hermitian PSD requirement: M0 + sum_j x_j * Mj >= 0
// given as the constant term and per-variable coefficient matrices.
inline void add_hermitian_lmi(ConicProgram& p, const std::string& label,
                              const cmat& M0,
                              const std::vector<std::pair<int, cmat>>& terms) {
    const int side = static_cast<int>(M0.rows());
    ConstraintBlock b;
    b.label = label;
    b.cone = ConeTag::psd;
    b.dim = 2 * side;
    b.complex_side = side;
    const rmat E0 = embed_hermitian(M0);
    b.rhs.resize(b.row_count());
    for (int j = 0; j < b.dim; ++j)
        for (int i = j; i < b.dim; ++i)
            b.rhs[psd_row_index(i, j, b.dim)] = E0(i, j);
    for (const auto& [col, Mj] : terms) {
        const rmat Ej = embed_hermitian(Mj);
        for (int j = 0; j < b.dim; ++j)
            for (int i = j; i < b.dim; ++i) {
                const double v = Ej(i, j);
                if (v != 0.0)
                    b.coeffs.push_back({psd_row_index(i, j, b.dim), col, -v});
            }
    }
    p.blocks.push_back(std::move(b));
}

// ---------------------------------------------------------------------------
// Structured-text serialization

inline void dump_program(const ConicProgram& p, std::ostream& out) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "secbeam-conic 1\n";
    out << "VARS " << p.vars.size() << "\n";
    for (const auto& v : p.vars)
        out << v.name << " " << v.offset << " " << v.size << "\n";
    out << "MAXIMIZE " << p.n_vars() << "\n";
    for (int j = 0; j < p.n_vars(); ++j)
        if (p.objective[j] != 0.0) out << j << " " << num(p.objective[j]) << "\n";
    out << "CONSTRAINTS " << p.blocks.size() << "\n";
    for (const auto& b : p.blocks) {
        int nz_rhs = 0;
        for (double v : b.rhs)
            if (v != 0.0) ++nz_rhs;
        out << "BLOCK " << b.label << "|" << cone_name(b.cone) << " " << b.dim
            << " " << b.complex_side << " " << b.coeffs.size() << " " << nz_rhs
            << "\n";
        for (const auto& c : b.coeffs)
            out << "A " << c.row << " " << c.col << " " << num(c.value) << "\n";
        for (size_t r = 0; r < b.rhs.size(); ++r)
            if (b.rhs[r] != 0.0)
                out << "b " << r << " " << num(b.rhs[r]) << "\n";
    }
    out << "END\n";
}

inline void dump_program(const ConicProgram& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write program file: " + path);
    dump_program(p, out);
}

inline ConicProgram parse_program(std::istream& in) {
    ConicProgram p;
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "secbeam-conic" || version != 1)
        throw config_error("unrecognized program file header");
    size_t n_vars = 0;
    in >> word >> n_vars;
    if (word != "VARS") throw config_error("expected VARS section");
    int total = 0;
    for (size_t i = 0; i < n_vars; ++i) {
        VarBlock v;
        in >> v.name >> v.offset >> v.size;
        p.vars.push_back(v);
        total = std::max(total, v.offset + v.size);
    }
    int n_obj = 0;
    in >> word >> n_obj;
    if (word != "MAXIMIZE") throw config_error("expected MAXIMIZE section");
    if (n_obj != total) throw config_error("objective length mismatch");
    p.objective = rvec::Zero(total);
    size_t n_blocks = 0;
    while (in >> word) {
        if (word == "CONSTRAINTS") {
            in >> n_blocks;
            break;
        }
        const int col = std::stoi(word);
        in >> p.objective[col];
    }
    for (size_t i = 0; i < n_blocks; ++i) {
        std::string head;
        in >> word >> head;
        if (word != "BLOCK") throw config_error("expected BLOCK");
        const size_t bar = head.rfind('|');
        if (bar == std::string::npos) throw config_error("bad block header");
        ConstraintBlock b;
        b.label = head.substr(0, bar);
        b.cone = cone_from_name(head.substr(bar + 1));
        size_t nc = 0, nb = 0;
        in >> b.dim >> b.complex_side >> nc >> nb;
        b.rhs.assign(b.row_count(), 0.0);
        for (size_t k = 0; k < nc; ++k) {
            Coeff c;
            in >> word >> c.row >> c.col >> c.value;
            b.coeffs.push_back(c);
        }
        for (size_t k = 0; k < nb; ++k) {
            int r = 0;
            in >> word >> r;
            in >> b.rhs[r];
        }
        p.blocks.push_back(std::move(b));
    }
    in >> word;
    if (word != "END") throw config_error("missing END marker");
    validate(p);
    return p;
}

inline ConicProgram parse_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open program file: " + path);
    return parse_program(in);
}

// ---------------------------------------------------------------------------
// Independent constraint-residual audit

struct CheckReport {
    struct Item {
        std::string label;
        double violation = 0.0;
    };
    std::vector<Item> flagged;
    double worst = 0.0;

    bool ok() const { return flagged.empty(); }
};

inline rvec block_slack(const ConstraintBlock& b, const rvec& x) {
    rvec s = Eigen::Map<const rvec>(b.rhs.data(), b.rhs.size());
    for (const auto& c : b.coeffs) s[c.row] -= c.value * x[c.col];
    return s;
}

inline double cone_violation(const ConstraintBlock& b, const rvec& s) {
    switch (b.cone) {
        case ConeTag::zero:
            return s.cwiseAbs().maxCoeff();
        case ConeTag::nonneg:
            return clip_nonneg(-s.minCoeff());
        case ConeTag::soc:
            return clip_nonneg(s.tail(s.size() - 1).norm() - s[0]);
        case ConeTag::rsoc: {
            const double q = 2.0 * s[0] * s[1] - s.tail(s.size() - 2).squaredNorm();
            return std::max({clip_nonneg(-s[0]), clip_nonneg(-s[1]),
                             clip_nonneg(-q)});
        }
        case ConeTag::psd: {
            rmat S(b.dim, b.dim);
            for (int j = 0; j < b.dim; ++j)
                for (int i = j; i < b.dim; ++i) {
                    S(i, j) = s[psd_row_index(i, j, b.dim)];
                    S(j, i) = S(i, j);
                }
            Eigen::SelfAdjointEigenSolver<rmat> es(S);
            return clip_nonneg(-es.eigenvalues().minCoeff());
        }
        case ConeTag::expcone: {
            const double u = s[0], v = s[1], w = s[2];
            if (v > 0)
                return clip_nonneg(w - v * std::log(u / v));  // u <= 0 gives +inf
            return std::max(clip_nonneg(-u), clip_nonneg(w)) +
                   clip_nonneg(-v);
        }
    }
    return 0.0;
}

struct ConicSolutionView;  // forward declaration for solver header

inline CheckReport check_solution(const ConicProgram& p, const rvec& x,
                                  double tol) {
    CheckReport rep;
    for (const auto& b : p.blocks) {
        const double v = cone_violation(b, block_slack(b, x));
        rep.worst = std::max(rep.worst, v);
        if (v > tol) rep.flagged.push_back({b.label, v});
    }
    return rep;
}

}  // namespace secbeam
