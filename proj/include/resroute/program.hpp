#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "resroute/core.hpp"

namespace resroute {

/// Column ranges for every decision-variable family. Time index t is 1-based;
/// families over [T+1] carry one extra slot per entity.
struct VariableAtlas {
    int T = 0;
    int num_buses = 0, num_branches = 0, num_gens = 0, num_loads = 0, num_ess = 0,
        num_slots = 0;

    int off_v = -1, off_p = -1, off_q = -1;           // per bus, [T]
    int off_l = -1, off_flow_p = -1, off_flow_q = -1; // per branch, [T]
    int off_pgen = -1;                                // per generator, [T]
    int off_fuel = -1;                                // per generator, [T+1]
    int off_r = -1;                                   // per load, [T]
    int off_pch = -1, off_pdis = -1, off_d = -1;      // per ESS bus, [T]
    int off_s = -1, off_s_ub = -1, off_s_lb = -1, off_phi = -1;  // per ESS bus, [T+1]
    int off_ship_soc = -1, off_ship_ub = -1, off_ship_lb = -1, off_count = -1;  // per slot
    int num_vars = 0;

    int v(int bus, int t) const { return off_v + bus * T + (t - 1); }
    int p(int bus, int t) const { return off_p + bus * T + (t - 1); }
    int q(int bus, int t) const { return off_q + bus * T + (t - 1); }
    int l(int br, int t) const { return off_l + br * T + (t - 1); }
    int flow_p(int br, int t) const { return off_flow_p + br * T + (t - 1); }
    int flow_q(int br, int t) const { return off_flow_q + br * T + (t - 1); }
    int pgen(int g, int t) const { return off_pgen + g * T + (t - 1); }
    int fuel(int g, int t) const { return off_fuel + g * (T + 1) + (t - 1); }
    int r(int ld, int t) const { return off_r + ld * T + (t - 1); }
    int pch(int e, int t) const { return off_pch + e * T + (t - 1); }
    int pdis(int e, int t) const { return off_pdis + e * T + (t - 1); }
    int d(int e, int t) const { return off_d + e * T + (t - 1); }
    int s(int e, int t) const { return off_s + e * (T + 1) + (t - 1); }
    int s_ub(int e, int t) const { return off_s_ub + e * (T + 1) + (t - 1); }
    int s_lb(int e, int t) const { return off_s_lb + e * (T + 1) + (t - 1); }
    int phi(int e, int t) const { return off_phi + e * (T + 1) + (t - 1); }
    int ship_soc(int slot) const { return off_ship_soc + slot; }
    int ship_ub(int slot) const { return off_ship_ub + slot; }
    int ship_lb(int slot) const { return off_ship_lb + slot; }
    int count(int slot) const { return off_count + slot; }
};

/// Sparse rows stored as (column, coefficient) lists plus a right-hand side.
struct SparseRows {
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<double> rhs;

    int size() const { return static_cast<int>(rows.size()); }
    int add(std::vector<std::pair<int, double>> row, double b) {
        rows.push_back(std::move(row));
        rhs.push_back(b);
        return size() - 1;
    }
};

/// v_col * l_col >= p_col^2 + q_col^2 with v_col, l_col >= 0.
struct RotatedConeRef {
    int v_col, l_col, p_col, q_col;
};

/// Standard-form program: maximize objective' x subject to eq rows, ineq rows
/// (<=), variable boxes, rotated cones, and integrality marks.
struct ConicProgram {
    int num_vars = 0;
    std::vector<double> objective;  // maximize
    SparseRows eq;
    SparseRows ineq;
    std::vector<RotatedConeRef> cones;
    std::vector<double> lb, ub;
    std::vector<int> binary_cols;
    std::vector<int> integer_cols;
    std::map<std::string, int> meta;  // expected row/cone counts per builder

    void resize(int n) {
        num_vars = n;
        objective.assign(n, 0.0);
        lb.assign(n, -kInf);
        ub.assign(n, kInf);
    }

    bool is_integral_col(int c) const {
        for (int b : binary_cols)
            if (b == c) return true;
        for (int k : integer_cols)
            if (k == c) return true;
        return false;
    }
};

/// Debug dump: sorted triplets per constraint block plus the cone list, for
/// cross-checking against an external solver.
inline void dump_program(const ConicProgram& pr, std::ostream& os) {
    os << "vars " << pr.num_vars << "\n";
    os << "objective maximize\n";
    for (int i = 0; i < pr.num_vars; ++i)
        if (pr.objective[i] != 0.0) os << i << " " << pr.objective[i] << "\n";
    auto dump_rows = [&](const char* name, const SparseRows& rows) {
        os << name << " " << rows.size() << "\n";
        for (int r = 0; r < rows.size(); ++r) {
            os << "row " << r << " rhs " << rows.rhs[r] << "\n";
            for (const auto& [c, a] : rows.rows[r]) os << c << " " << a << "\n";
        }
    };
    dump_rows("eq", pr.eq);
    dump_rows("ineq", pr.ineq);
    os << "bounds\n";
    for (int i = 0; i < pr.num_vars; ++i)
        if (pr.lb[i] != -kInf || pr.ub[i] != kInf)
            os << i << " " << pr.lb[i] << " " << pr.ub[i] << "\n";
    os << "cones " << pr.cones.size() << "\n";
    for (const auto& c : pr.cones)
        os << c.v_col << " " << c.l_col << " " << c.p_col << " " << c.q_col << "\n";
    os << "binary";
    for (int c : pr.binary_cols) os << " " << c;
    os << "\ninteger";
    for (int c : pr.integer_cols) os << " " << c;
    os << "\n";
}

}  // namespace resroute
