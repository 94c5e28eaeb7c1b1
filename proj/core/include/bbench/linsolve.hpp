#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bbench {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// Dense square system A x = b with an optional known ground-truth solution.
struct LinearSystem {
    Mat a;
    Vec b;
    std::optional<Vec> known_solution;

    std::size_t size() const { return b.size(); }

    /// Throws ContractViolation unless: A is square, dimensions agree, every
    /// diagonal entry is nonzero, and (when present) the known solution
    /// satisfies ||A x* - b||_inf <= 1e-9.
    void validate() const;
};

struct DominanceViolation {
    std::size_t row = 0; // 0-based
    double diag_abs = 0.0;
    double off_diag_abs_sum = 0.0;
};

struct DominanceReport {
    bool strictly_dominant = true;
    std::vector<DominanceViolation> violating_rows;
};

struct SolveOutcome {
    Vec solution;
    std::size_t iterations_performed = 0;
    double final_residual_inf_norm = 0.0;
};

/// Row i is violating iff |a_ii| <= sum_{j != i} |a_ij|. Pure classification;
/// a violation is a warning, not an error: the solver still runs.
DominanceReport check_dominance(const LinearSystem& system);

/// One forward-substitution sweep: components updated in ascending order,
/// already-updated values used within the pass.
Vec gauss_seidel_sweep(const LinearSystem& system, const Vec& x);

/// Applies exactly `iterations` sweeps starting from x0 -- no early exit, so
/// every call does identical work. Throws DivergenceError on the first sweep
/// that produces a non-finite component.
SolveOutcome gauss_seidel_solve(const LinearSystem& system, const Vec& x0, std::size_t iterations);

/// Convergence-based variant. Not used on any benchmark path (variable work
/// per call would corrupt the timing statistics); provided for diagnostics.
SolveOutcome gauss_seidel_solve_to_tolerance(const LinearSystem& system, const Vec& x0,
                                             double tolerance, std::size_t max_iterations);

/// max_i |(A x - b)_i|
double residual_inf_norm(const LinearSystem& system, const Vec& x);

/// Gaussian elimination with partial pivoting. Test oracle for the iterative
/// solver; deliberately a different algorithm so the two routes stay
/// independent. Throws SingularMatrixError.
Vec direct_solve_oracle(const LinearSystem& system);

/// The built-in 5x5 benchmark system with its exact rational solution.
/// Note: this matrix is NOT strictly diagonally dominant (rows 0..2 violate),
/// yet Gauss-Seidel converges on it well within 2500 iterations.
const LinearSystem& bench5_system();

/// Systems addressable by wire-level `system_id`.
const std::map<std::string, LinearSystem>& builtin_systems();

} // namespace bbench
