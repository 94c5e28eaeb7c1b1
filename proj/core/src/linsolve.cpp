#include "bbench/linsolve.hpp"

#include "bbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bbench {

void LinearSystem::validate() const {
    const std::size_t n = b.size();
    if (n == 0) throw ContractViolation("linear system is empty");
    if (a.size() != n) throw ContractViolation("matrix row count does not match rhs length");
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) throw ContractViolation("matrix is not square");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i][i] == 0.0) {
            throw ContractViolation("zero diagonal entry at row " + std::to_string(i));
        }
    }
    if (known_solution) {
        if (known_solution->size() != n) {
            throw ContractViolation("known solution length does not match system size");
        }
        if (residual_inf_norm(*this, *known_solution) > 1e-9) {
            throw ContractViolation("known solution does not satisfy A x = b within 1e-9");
        }
    }
}

DominanceReport check_dominance(const LinearSystem& system) {
    system.validate();
    DominanceReport report;
    const std::size_t n = system.size();
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) off += std::abs(system.a[i][j]);
        }
        const double diag = std::abs(system.a[i][i]);
        if (diag <= off) {
            report.violating_rows.push_back({i, diag, off});
        }
    }
    report.strictly_dominant = report.violating_rows.empty();
    return report;
}

namespace {

// In-place forward-substitution sweep; plain left-to-right summation so each
// sweep costs exactly the same.
void sweep_in_place(const LinearSystem& system, Vec& x) {
    const std::size_t n = system.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& row = system.a[i];
        double s = system.b[i];
        for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
        for (std::size_t j = i + 1; j < n; ++j) s -= row[j] * x[j];
        x[i] = s / row[i];
    }
}

bool all_finite(const Vec& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

void check_guess(const LinearSystem& system, const Vec& x) {
    if (x.size() != system.size()) {
        throw ContractViolation("guess length " + std::to_string(x.size()) +
                                " does not match system size " + std::to_string(system.size()));
    }
}

} // namespace

Vec gauss_seidel_sweep(const LinearSystem& system, const Vec& x) {
    system.validate();
    check_guess(system, x);
    Vec next = x;
    sweep_in_place(system, next);
    return next;
}

SolveOutcome gauss_seidel_solve(const LinearSystem& system, const Vec& x0, std::size_t iterations) {
    system.validate();
    check_guess(system, x0);
    SolveOutcome out;
    out.solution = x0;
    for (std::size_t k = 0; k < iterations; ++k) {
        sweep_in_place(system, out.solution);
        if (!all_finite(out.solution)) {
            throw DivergenceError("non-finite component after iteration " + std::to_string(k + 1),
                                  k + 1);
        }
    }
    out.iterations_performed = iterations;
    out.final_residual_inf_norm = residual_inf_norm(system, out.solution);
    return out;
}

SolveOutcome gauss_seidel_solve_to_tolerance(const LinearSystem& system, const Vec& x0,
                                             double tolerance, std::size_t max_iterations) {
    system.validate();
    check_guess(system, x0);
    if (tolerance < 0.0) throw ContractViolation("tolerance must be >= 0");
    SolveOutcome out;
    out.solution = x0;
    out.final_residual_inf_norm = residual_inf_norm(system, out.solution);
    for (std::size_t k = 0; k < max_iterations && out.final_residual_inf_norm > tolerance; ++k) {
        sweep_in_place(system, out.solution);
        if (!all_finite(out.solution)) {
            throw DivergenceError("non-finite component after iteration " + std::to_string(k + 1),
                                  k + 1);
        }
        out.iterations_performed = k + 1;
        out.final_residual_inf_norm = residual_inf_norm(system, out.solution);
    }
    return out;
}

double residual_inf_norm(const LinearSystem& system, const Vec& x) {
    const std::size_t n = system.size();
    if (x.size() != n) throw ContractViolation("vector length does not match system size");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += system.a[i][j] * x[j];
        worst = std::max(worst, std::abs(s - system.b[i]));
    }
    return worst;
}

Vec direct_solve_oracle(const LinearSystem& system) {
    system.validate();
    const std::size_t n = system.size();
    Mat a = system.a;
    Vec b = system.b;

    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw SingularMatrixError("zero matrix");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) <= 1e-12 * scale) {
            throw SingularMatrixError("matrix is singular or near-singular at column " +
                                      std::to_string(col));
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            b[r] -= f * b[col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }

    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

const LinearSystem& bench5_system() {
    static const LinearSystem system{
        {{4, 1, 2, 1, 1}, {3, 5, 1, 1, 1}, {1, 1, 3, 1, 1}, {1, 1, 1, 5, 1}, {1, 1, 1, 1, 9}},
        {4, 7, 3, 9, 2},
        Vec{39.0 / 106.0, 46.0 / 53.0, 11.0 / 106.0, 329.0 / 212.0, -21.0 / 212.0}};
    return system;
}

const std::map<std::string, LinearSystem>& builtin_systems() {
    static const std::map<std::string, LinearSystem> systems = {{"bench5", bench5_system()}};
    return systems;
}

} // namespace bbench
