#include "microgrid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace microgrid::lp {

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration limit";
    }
    return "?";
}

int Simplex::add_variable(double lb, double ub, double cost) {
    if (built_) throw std::logic_error("Simplex: columns must be added before the first solve");
    if (std::isinf(lb) && std::isinf(ub)) throw std::invalid_argument("Simplex: free variables are not supported");
    if (lb > ub) throw std::invalid_argument("Simplex: lower bound above upper bound");
    lb_.push_back(lb);
    ub_.push_back(ub);
    cost_.push_back(cost);
    x_.push_back(std::isfinite(lb) ? lb : ub);
    state_.push_back(std::isfinite(lb) ? VarState::at_lower : VarState::at_upper);
    row_of_.push_back(-1);
    return static_cast<int>(lb_.size() - 1);
}

int Simplex::add_row(std::span<const Term> terms, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("Simplex: row lower bound above upper bound");
    const int slack = static_cast<int>(lb_.size());
    lb_.push_back(lo);
    ub_.push_back(hi);
    cost_.push_back(0.0);
    double activity = 0.0;
    for (const auto& t : terms) activity += t.coef * x_[static_cast<std::size_t>(t.var)];
    x_.push_back(activity);
    state_.push_back(VarState::basic);
    row_of_.push_back(-1);
    rows_.push_back({std::vector<Term>(terms.begin(), terms.end()), slack});
    if (!built_) return slack;

    // Grow the tableau by one column (the new slack) and one row.
    const std::size_t old_cols = cols_;
    const std::size_t m_old = basis_.size();
    cols_ = old_cols + 1;
    std::vector<double> grown(cols_ * (m_old + 1), 0.0);
    for (std::size_t i = 0; i < m_old; ++i)
        std::copy_n(tableau_.begin() + static_cast<std::ptrdiff_t>(i * old_cols), old_cols,
                    grown.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    tableau_.swap(grown);

    const std::size_t r = m_old;
    tab(r, static_cast<std::size_t>(slack)) = 1.0;
    for (const auto& t : terms) tab(r, static_cast<std::size_t>(t.var)) -= t.coef;
    // Eliminate the current basic columns from the new row.
    for (const auto& t : terms) {
        const int br = row_of_[static_cast<std::size_t>(t.var)];
        if (br < 0) continue;
        const double f = tab(r, static_cast<std::size_t>(t.var));
        if (f == 0.0) continue;
        const double* src = &tableau_[static_cast<std::size_t>(br) * cols_];
        double* dst = &tableau_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) dst[j] -= f * src[j];
    }
    basis_.push_back(slack);
    row_of_[static_cast<std::size_t>(slack)] = static_cast<int>(r);
    d_.push_back(0.0);
    return slack;
}

void Simplex::set_bounds(int var, double lb, double ub) {
    if (lb > ub) throw std::invalid_argument("Simplex: lower bound above upper bound");
    const auto j = static_cast<std::size_t>(var);
    lb_[j] = lb;
    ub_[j] = ub;
    if (!built_) {
        x_[j] = std::isfinite(lb) ? lb : ub;
        return;
    }
    if (state_[j] != VarState::basic) place_nonbasic(j);
}

void Simplex::set_objective(std::span<const double> costs) {
    if (costs.size() > cost_.size()) throw std::invalid_argument("Simplex: too many objective coefficients");
    std::fill(cost_.begin(), cost_.end(), 0.0);
    std::copy(costs.begin(), costs.end(), cost_.begin());
    if (built_) recompute_reduced_costs();
}

double Simplex::objective() const {
    double z = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) z += cost_[j] * x_[j];
    return z;
}

double Simplex::max_row_residual() const {
    double worst = 0.0;
    for (const auto& row : rows_) {
        double a = 0.0;
        for (const auto& t : row.terms) a += t.coef * x_[static_cast<std::size_t>(t.var)];
        worst = std::max(worst, std::abs(a - x_[static_cast<std::size_t>(row.slack)]));
    }
    return worst;
}

void Simplex::build() {
    cols_ = lb_.size();
    const std::size_t m = rows_.size();
    tableau_.assign(m * cols_, 0.0);
    basis_.assign(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        const auto s = static_cast<std::size_t>(rows_[i].slack);
        tab(i, s) = 1.0;
        for (const auto& t : rows_[i].terms) tab(i, static_cast<std::size_t>(t.var)) -= t.coef;
        basis_[i] = rows_[i].slack;
        row_of_[s] = static_cast<int>(i);
        state_[s] = VarState::basic;
    }
    built_ = true;
    recompute_reduced_costs();
    for (std::size_t j = 0; j < cols_; ++j)
        if (state_[j] != VarState::basic) place_nonbasic(j);
    recompute_basics();
}

void Simplex::refactor() {
    const std::size_t m = rows_.size();
    std::vector<int> old_basis = basis_;
    tableau_.assign(m * cols_, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        tab(i, static_cast<std::size_t>(rows_[i].slack)) = 1.0;
        for (const auto& t : rows_[i].terms) tab(i, static_cast<std::size_t>(t.var)) -= t.coef;
    }
    std::vector<bool> assigned(m, false);
    for (int var : old_basis) {
        const auto j = static_cast<std::size_t>(var);
        std::size_t best = m;
        double best_abs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (assigned[i]) continue;
            const double a = std::abs(tab(i, j));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        if (best == m || best_abs < 1e-12) throw std::runtime_error("Simplex: singular basis during refactorization");
        assigned[best] = true;
        const double p = tab(best, j);
        double* prow = &tableau_[best * cols_];
        for (std::size_t c = 0; c < cols_; ++c) prow[c] /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == best) continue;
            const double f = tab(i, j);
            if (f == 0.0) continue;
            double* row = &tableau_[i * cols_];
            for (std::size_t c = 0; c < cols_; ++c) row[c] -= f * prow[c];
        }
        basis_[best] = var;
        row_of_[j] = static_cast<int>(best);
    }
    recompute_basics();
    recompute_reduced_costs();
}

void Simplex::recompute_basics() {
    const std::size_t m = basis_.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = &tableau_[i * cols_];
        double v = 0.0;
        for (std::size_t j = 0; j < cols_; ++j)
            if (state_[j] != VarState::basic && row[j] != 0.0) v -= row[j] * x_[j];
        x_[static_cast<std::size_t>(basis_[i])] = v;
    }
}

void Simplex::recompute_reduced_costs() {
    d_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) d_[j] = cost_[j];
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double cb = cost_[static_cast<std::size_t>(basis_[i])];
        if (cb == 0.0) continue;
        const double* row = &tableau_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (int b : basis_) d_[static_cast<std::size_t>(b)] = 0.0;
}

void Simplex::move_nonbasic(std::size_t var, double new_value) {
    const double delta = new_value - x_[var];
    x_[var] = new_value;
    if (delta == 0.0) return;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double a = tab(i, var);
        if (a != 0.0) x_[static_cast<std::size_t>(basis_[i])] -= a * delta;
    }
}

// Puts a nonbasic variable on the bound that keeps its reduced cost dual feasible.
void Simplex::place_nonbasic(std::size_t j) {
    const bool lo_ok = std::isfinite(lb_[j]);
    const bool hi_ok = std::isfinite(ub_[j]);
    VarState s;
    if (lo_ok && hi_ok)
        s = d_[j] >= 0.0 ? VarState::at_lower : VarState::at_upper;
    else
        s = lo_ok ? VarState::at_lower : VarState::at_upper;
    state_[j] = s;
    move_nonbasic(j, s == VarState::at_lower ? lb_[j] : ub_[j]);
}

void Simplex::pivot(std::size_t r, std::size_t q) {
    const std::size_t m = basis_.size();
    double* prow = &tableau_[r * cols_];
    const double p = prow[q];
    std::vector<std::size_t> nz;
    nz.reserve(cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
        if (prow[j] == 0.0) continue;
        prow[j] /= p;
        nz.push_back(j);
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == r) continue;
        double* row = &tableau_[i * cols_];
        const double f = row[q];
        if (f == 0.0) continue;
        for (std::size_t j : nz) row[j] -= f * prow[j];
        row[q] = 0.0;
    }
    const double dq = d_[q];
    if (dq != 0.0)
        for (std::size_t j : nz) d_[j] -= dq * prow[j];
    d_[q] = 0.0;

    const auto leaving = static_cast<std::size_t>(basis_[r]);
    row_of_[leaving] = -1;
    basis_[r] = static_cast<int>(q);
    row_of_[q] = static_cast<int>(r);
    state_[q] = VarState::basic;
    ++iterations_;
}

Status Simplex::solve_dual() {
    if (!built_) build();
    // Flip boxed variables whose reduced cost sign disagrees with their bound.
    for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] == VarState::basic || lb_[j] == ub_[j]) continue;
        const bool wrong = (state_[j] == VarState::at_lower && d_[j] < -tol_.dual) ||
                           (state_[j] == VarState::at_upper && d_[j] > tol_.dual);
        if (!wrong) continue;
        if (!std::isfinite(lb_[j]) || !std::isfinite(ub_[j]))
            throw std::logic_error("Simplex: basis is not dual feasible; use solve_primal");
        place_nonbasic(j);
    }
    return finish(dual_loop(), false);
}

Status Simplex::solve_primal() {
    if (!built_) build();
    return finish(primal_loop(), true);
}

Status Simplex::finish(Status s, bool primal) {
    for (int attempt = 0; attempt < 3 && s == Status::optimal; ++attempt) {
        if (max_row_residual() <= tol_.refactor_residual) break;
        refactor();
        s = primal ? primal_loop() : dual_loop();
    }
    return s;
}

Status Simplex::dual_loop() {
    const std::size_t m = basis_.size();
    while (true) {
        if (iterations_ >= iteration_limit_) return Status::iteration_limit;

        std::size_t r = m;
        double worst = 0.0;
        bool to_lower = false;
        for (std::size_t i = 0; i < m; ++i) {
            const auto b = static_cast<std::size_t>(basis_[i]);
            const double v = x_[b];
            const double below = lb_[b] - v;
            const double above = v - ub_[b];
            if (below > tol_.primal * (1.0 + std::abs(lb_[b])) && below > worst) {
                worst = below;
                r = i;
                to_lower = true;
            } else if (above > tol_.primal * (1.0 + std::abs(ub_[b])) && above > worst) {
                worst = above;
                r = i;
                to_lower = false;
            }
        }
        if (r == m) return Status::optimal;

        const double* row = &tableau_[r * cols_];
        std::size_t q = cols_;
        double best_ratio = kInf;
        double best_piv = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] == VarState::basic || lb_[j] == ub_[j]) continue;
            const double a = row[j];
            if (std::abs(a) <= tol_.pivot) continue;
            const bool at_lower = state_[j] == VarState::at_lower;
            double ratio;
            if (to_lower) {
                if (at_lower ? a >= 0.0 : a <= 0.0) continue;
                ratio = (at_lower ? std::max(d_[j], 0.0) : std::min(d_[j], 0.0)) / -a;
            } else {
                if (at_lower ? a <= 0.0 : a >= 0.0) continue;
                ratio = (at_lower ? std::max(d_[j], 0.0) : std::min(d_[j], 0.0)) / a;
            }
            if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_piv)) {
                best_ratio = ratio;
                best_piv = std::abs(a);
                q = j;
            }
        }
        if (q == cols_) return Status::infeasible;

        const auto leaving = static_cast<std::size_t>(basis_[r]);
        const double target = to_lower ? lb_[leaving] : ub_[leaving];
        const double t = -(target - x_[leaving]) / row[q];
        move_nonbasic(q, x_[q] + t);
        x_[leaving] = target;
        pivot(r, q);
        state_[leaving] = to_lower ? VarState::at_lower : VarState::at_upper;
        if (lb_[leaving] == ub_[leaving]) state_[leaving] = VarState::at_lower;
    }
}

Status Simplex::primal_loop() {
    const std::size_t m = basis_.size();
    std::size_t stalled = 0;
    double last_obj = objective();
    while (true) {
        if (iterations_ >= iteration_limit_) return Status::iteration_limit;
        const bool bland = stalled > 50;

        std::size_t q = cols_;
        double best = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] == VarState::basic || lb_[j] == ub_[j]) continue;
            const double dj = d_[j];
            const bool improving = (state_[j] == VarState::at_lower && dj < -tol_.dual) ||
                                   (state_[j] == VarState::at_upper && dj > tol_.dual);
            if (!improving) continue;
            if (bland) {
                q = j;
                break;
            }
            if (std::abs(dj) > best) {
                best = std::abs(dj);
                q = j;
            }
        }
        if (q == cols_) return Status::optimal;

        const double dir = state_[q] == VarState::at_lower ? 1.0 : -1.0;
        double step = ub_[q] - lb_[q];  // bound flip
        std::size_t r = m;
        bool r_to_lower = false;
        double best_piv = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = -tab(i, q) * dir;  // d x_B[i] / d step
            if (std::abs(a) <= tol_.pivot) continue;
            const auto b = static_cast<std::size_t>(basis_[i]);
            double limit;
            bool hits_lower;
            if (a > 0.0) {
                if (!std::isfinite(ub_[b])) continue;
                limit = std::max(0.0, (ub_[b] - x_[b]) / a);
                hits_lower = false;
            } else {
                if (!std::isfinite(lb_[b])) continue;
                limit = std::max(0.0, (lb_[b] - x_[b]) / a);
                hits_lower = true;
            }
            bool take = limit < step - 1e-12;
            if (!take && r != m && limit <= step + 1e-12)
                take = bland ? b < static_cast<std::size_t>(basis_[r]) : std::abs(a) > best_piv;
            if (take) {
                step = limit;
                r = i;
                r_to_lower = hits_lower;
                best_piv = std::abs(a);
            }
        }
        if (r == m && !std::isfinite(step)) return Status::unbounded;

        if (r == m) {
            // bound flip
            state_[q] = state_[q] == VarState::at_lower ? VarState::at_upper : VarState::at_lower;
            move_nonbasic(q, state_[q] == VarState::at_lower ? lb_[q] : ub_[q]);
            ++iterations_;
        } else {
            const auto leaving = static_cast<std::size_t>(basis_[r]);
            move_nonbasic(q, x_[q] + dir * step);
            x_[leaving] = r_to_lower ? lb_[leaving] : ub_[leaving];
            pivot(r, q);
            state_[leaving] = r_to_lower ? VarState::at_lower : VarState::at_upper;
        }
        const double obj = objective();
        stalled = obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj)) ? 0 : stalled + 1;
        last_obj = obj;
    }
}

}  // namespace microgrid::lp
