// Dense bounded-variable simplex used by the dispatch scheduler.
//
// Every row is stored as `a . x - s = 0` with the row activity `s` as an
// explicit slack variable carrying the row bounds, so the all-slack basis is
// always available and all bounds live on variables. Both a dual simplex
// (for bound changes and added rows, as in branch and bound) and a primal
// simplex (for objective changes) run on the same tableau.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace microgrid::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(Status s);

struct Term {
    int var;
    double coef;
};

class Simplex {
public:
    struct Tolerances {
        double primal = 1e-9;
        double dual = 1e-9;
        double pivot = 1e-9;
        double refactor_residual = 1e-8;
    };

    Simplex() = default;
    explicit Simplex(Tolerances tol) : tol_(tol) {}

    /// Adds a structural column. Must be called before the first solve.
    /// Free variables (both bounds infinite) are not supported.
    int add_variable(double lb, double ub, double cost);

    /// Adds `lo <= sum(terms) <= hi` and returns the index of its slack
    /// variable (whose value is the row activity). Allowed after solving; the
    /// new row enters with its slack basic.
    int add_row(std::span<const Term> terms, double lo, double hi);

    void set_bounds(int var, double lb, double ub);

    /// Replaces the objective. Follow with solve_primal(): the basis stays
    /// primal feasible but loses dual feasibility.
    void set_objective(std::span<const double> costs);

    /// Dual simplex from the current basis. Valid whenever the basis is dual
    /// feasible, which holds after construction (nonnegative costs or finite
    /// bounds on the favourable side) and after any bound change or add_row.
    Status solve_dual();

    /// Primal simplex from a primal feasible basis.
    Status solve_primal();

    double value(int var) const { return x_[static_cast<std::size_t>(var)]; }
    std::vector<double> values() const { return x_; }
    double objective() const;
    double lower(int var) const { return lb_[static_cast<std::size_t>(var)]; }
    double upper(int var) const { return ub_[static_cast<std::size_t>(var)]; }
    std::size_t variable_count() const { return lb_.size(); }
    std::size_t row_count() const { return rows_.size(); }
    std::size_t iterations() const { return iterations_; }

    void set_iteration_limit(std::size_t limit) { iteration_limit_ = limit; }

    /// Largest |a . x - s| over the original rows.
    double max_row_residual() const;

private:
    enum class VarState : std::uint8_t { basic, at_lower, at_upper };

    double& tab(std::size_t row, std::size_t col) { return tableau_[row * cols_ + col]; }
    double tab(std::size_t row, std::size_t col) const { return tableau_[row * cols_ + col]; }

    void build();
    void refactor();
    void pivot(std::size_t row, std::size_t col);
    void place_nonbasic(std::size_t var);
    void move_nonbasic(std::size_t var, double new_value);
    void recompute_basics();
    void recompute_reduced_costs();
    Status dual_loop();
    Status primal_loop();
    Status finish(Status s, bool primal);

    Tolerances tol_;
    bool built_ = false;

    std::vector<double> lb_, ub_, cost_, x_;
    std::vector<VarState> state_;
    std::vector<int> row_of_;  // tableau row of a basic variable, -1 otherwise

    struct Row {
        std::vector<Term> terms;
        int slack;
    };
    std::vector<Row> rows_;

    std::size_t cols_ = 0;
    std::vector<double> tableau_;  // rows_.size() x cols_
    std::vector<int> basis_;       // variable basic in each tableau row
    std::vector<double> d_;        // reduced costs

    std::size_t iterations_ = 0;
    std::size_t iteration_limit_ = 1'000'000;
};

}  // namespace microgrid::lp
