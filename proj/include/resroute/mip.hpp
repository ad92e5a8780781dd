#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <thread>
#include <vector>

#include "resroute/program.hpp"
#include "resroute/socp.hpp"

namespace resroute {

struct MipSettings {
    double gap = 1e-4;
    long max_nodes = 10000;
    double time_limit_s = 300.0;
    int workers = 1;
    double int_tol = 1e-5;
    SolverSettings relax;       // node relaxations
    SolverSettings polish;      // incumbent refinement with integers fixed
    SolverSettings dive;        // fast, loose solves inside the diving heuristic
    std::ostream* log = nullptr;

    MipSettings() {
        polish.eps_primal = polish.eps_dual = polish.eps_gap = 1e-8;
        polish.max_iters = 400000;
        dive.eps_primal = dive.eps_dual = dive.eps_gap = 1e-4;
        dive.max_iters = 60000;
    }
};

struct Incumbent {
    std::vector<double> x;
    double objective = -kInf;   // maximize sense
    std::string source;         // "rounding heuristic" or "node integrality"
};

struct MipResult {
    std::optional<Incumbent> incumbent;
    double best_bound = kInf;   // valid upper bound (maximize)
    double gap = kInf;          // relative
    long nodes = 0;
    bool root_infeasible = false;
    bool hit_limit = false;
};

/// Most-fractional branching column: binaries first, then integers, ties by
/// lowest column index. Returns -1 when the point is integral.
inline int branch_select(const ConicProgram& pr, const std::vector<double>& x, double int_tol) {
    auto pick = [&](const std::vector<int>& cols) {
        int best = -1;
        double best_frac = int_tol;
        for (int c : cols) {
            double frac = std::abs(x[c] - std::lround(x[c]));
            if (frac > best_frac + 1e-15) {
                best_frac = frac;
                best = c;
            }
        }
        return best;
    };
    int c = pick(pr.binary_cols);
    if (c >= 0) return c;
    return pick(pr.integer_cols);
}

namespace detail {

struct BnBNode {
    std::map<int, std::pair<double, double>> overrides;  // col -> [lo, hi]
    double parent_bound = kInf;
    int depth = 0;
    long id = 0;
    std::shared_ptr<WarmStart> warm;
};

struct NodeOrder {
    bool operator()(const BnBNode& a, const BnBNode& b) const {
        if (a.parent_bound != b.parent_bound) return a.parent_bound < b.parent_bound;
        return a.id > b.id;  // lower id first
    }
};

}  // namespace detail

/// Best-first branch-and-bound over the program's binary and integer columns.
class BranchAndBound {
  public:
    BranchAndBound(const ConicProgram& pr, MipSettings settings = {})
        : pr_(pr), settings_(std::move(settings)), sf_(to_standard(pr)),
          solver_(sf_.A, sf_.n_eq, sf_.n_ineq, sf_.soc_dims, settings_.relax),
          polisher_(sf_.A, sf_.n_eq, sf_.n_ineq, sf_.soc_dims, settings_.polish),
          diver_(sf_.A, sf_.n_eq, sf_.n_ineq, sf_.soc_dims, settings_.dive) {
        int_cols_ = pr.binary_cols;
        int_cols_.insert(int_cols_.end(), pr.integer_cols.begin(), pr.integer_cols.end());
    }

    MipResult optimize() {
        start_ = std::chrono::steady_clock::now();
        detail::BnBNode root;
        root.id = next_id_++;
        open_.push(root);
        int workers = std::max(1, settings_.workers);
        if (workers == 1) {
            worker_loop();
        } else {
            std::vector<std::thread> pool;
            for (int i = 0; i < workers; ++i) pool.emplace_back([this] { worker_loop(); });
            for (auto& t : pool) t.join();
        }
        finalize();
        return result_;
    }

  private:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    void worker_loop() {
        std::unique_lock<std::mutex> lock(mu_);
        for (;;) {
            while (open_.empty() && active_ > 0 && !stop_) cv_.wait(lock);
            if (open_.empty() && active_ == 0) break;
            if (stop_) break;
            if (open_.empty()) continue;
            if (result_.nodes >= settings_.max_nodes || elapsed() > settings_.time_limit_s) {
                result_.hit_limit = true;
                stop_ = true;
                cv_.notify_all();
                break;
            }
            detail::BnBNode node = open_.top();
            open_.pop();
            double inc = incumbent_obj();
            if (node.parent_bound <= inc + prune_slack(inc)) continue;  // bound pruning
            ++active_;
            ++result_.nodes;
            lock.unlock();
            process_node(node);
            lock.lock();
            --active_;
            cv_.notify_all();
        }
        cv_.notify_all();
    }

    double incumbent_obj() const {
        return result_.incumbent ? result_.incumbent->objective : -kInf;
    }

    double prune_slack(double inc) const {
        return settings_.gap * std::max(1.0, std::abs(inc));
    }

    void process_node(const detail::BnBNode& node) {
        Eigen::VectorXd b = sf_.b;
        for (const auto& [col, bounds] : node.overrides) {
            b[sf_.bounds.lb_row[col]] = -bounds.first;
            b[sf_.bounds.ub_row[col]] = bounds.second;
        }
        SolveResult res = solver_.solve(b, sf_.c, node.warm.get());
        if (res.status == SolveStatus::Infeasible) {
            if (node.depth == 0) {
                std::lock_guard<std::mutex> g(mu_);
                result_.root_infeasible = true;
            }
            return;
        }
        double bound = std::min(node.parent_bound, -res.objective);
        {
            std::lock_guard<std::mutex> g(mu_);
            double inc = incumbent_obj();
            if (bound <= inc + prune_slack(inc)) return;
        }

        int branch_col = res.x.empty() ? -1 : branch_select(pr_, res.x, settings_.int_tol);
        if (branch_col < 0 && !res.x.empty()) {
            try_incumbent(res.x, node.overrides, "node integrality");
            return;
        }

        bool have_inc;
        {
            std::lock_guard<std::mutex> g(mu_);
            have_inc = result_.incumbent.has_value();
        }
        if (!res.x.empty() && (!have_inc || node.depth == 0)) {
            bool usable = try_incumbent(res.x, node.overrides, "rounding heuristic");
            if (!usable) {
                // rounding a coupled fractional point is often infeasible; the
                // zero-shipment point (all integer columns at zero) is a safe
                // fallback that enables pruning, tried once per search
                bool do_zero = false;
                {
                    std::lock_guard<std::mutex> g(mu_);
                    if (!zero_tried_ && !result_.incumbent) {
                        zero_tried_ = true;
                        do_zero = true;
                    }
                }
                if (do_zero)
                    try_incumbent(std::vector<double>(pr_.num_vars, 0.0), {},
                                  "zero-shipment fallback");
            }
            if (node.depth == 0) dive(res, node.overrides);
        }

        if (branch_col < 0) return;

        double xval = res.x[branch_col];
        auto warm = std::make_shared<WarmStart>();
        warm->x = Eigen::Map<const Eigen::VectorXd>(res.x.data(), (long)res.x.size());
        warm->y = res.y;
        warm->s = res.s;

        bool is_binary =
            std::find(pr_.binary_cols.begin(), pr_.binary_cols.end(), branch_col) !=
            pr_.binary_cols.end();
        detail::BnBNode lo = node, hi = node;
        lo.parent_bound = hi.parent_bound = bound;
        lo.depth = hi.depth = node.depth + 1;
        lo.warm = hi.warm = warm;
        if (is_binary) {
            lo.overrides[branch_col] = {0.0, 0.0};
            hi.overrides[branch_col] = {1.0, 1.0};
        } else {
            double floor_ub = std::floor(xval);
            double ceil_lb = std::ceil(xval);
            auto cur = current_bounds(node, branch_col);
            lo.overrides[branch_col] = {cur.first, floor_ub};
            hi.overrides[branch_col] = {ceil_lb, cur.second};
        }
        std::lock_guard<std::mutex> g(mu_);
        lo.id = next_id_++;  // low branch explored first on ties
        hi.id = next_id_++;
        open_.push(lo);
        open_.push(hi);
        log_line(bound);
        cv_.notify_all();
    }

    /// Diving heuristic: starting from a fractional relaxation point, fix one
    /// fractional column at a time to a rounded value and re-solve with a warm
    /// start. Unlike simultaneous rounding this honors the coupling between
    /// trip counts and the capacity books, so the leaf is usually feasible.
    void dive(SolveResult res, std::map<int, std::pair<double, double>> ov) {
        // the loose dive solves leave ~1e-5 noise on fixed columns, so only
        // unfixed columns count as branching candidates, at a loose tolerance
        const double dive_tol = 1e-3;
        auto select_unfixed = [&](const std::vector<double>& x) {
            int best = -1;
            double best_frac = dive_tol;
            for (int c : int_cols_) {
                if (ov.count(c)) continue;
                double frac = std::abs(x[c] - std::lround(x[c]));
                if (frac > best_frac + 1e-15) {
                    best_frac = frac;
                    best = c;
                }
            }
            return best;
        };
        // the dive gets a slice of the budget, not all of it: on large
        // instances a full dive would starve the tree search
        double deadline = std::min(settings_.time_limit_s,
                                   elapsed() + std::max(30.0, 0.1 * settings_.time_limit_s));
        for (size_t step = 0; step < int_cols_.size() + 8; ++step) {
            if (elapsed() > deadline) return;
            int col = select_unfixed(res.x);
            if (col < 0) {
                try_incumbent(res.x, ov, "diving heuristic");
                return;
            }
            double lo = pr_.lb[col], hi = pr_.ub[col];
            double v = std::clamp((double)std::lround(res.x[col]), lo, hi);
            WarmStart w;
            w.x = Eigen::Map<const Eigen::VectorXd>(res.x.data(), (long)res.x.size());
            w.y = res.y;
            w.s = res.s;
            auto attempt = [&](double val) {
                Eigen::VectorXd b = sf_.b;
                auto trial = ov;
                trial[col] = {val, val};
                for (const auto& [c, bounds] : trial) {
                    b[sf_.bounds.lb_row[c]] = -bounds.first;
                    b[sf_.bounds.ub_row[c]] = bounds.second;
                }
                return std::pair<SolveResult, std::map<int, std::pair<double, double>>>(
                    diver_.solve(b, sf_.c, &w), std::move(trial));
            };
            auto usable = [](const SolveResult& r) {
                return !r.x.empty() &&
                       (r.status == SolveStatus::Optimal ||
                        (r.status == SolveStatus::IterLimit && r.res_primal < 1e-3));
            };
            auto [nxt, trial] = attempt(v);
            if (nxt.status == SolveStatus::Infeasible) {
                double alt = res.x[col] > v ? v + 1.0 : v - 1.0;
                if (alt < lo || alt > hi) return;
                std::tie(nxt, trial) = attempt(alt);
            }
            if (!usable(nxt)) return;
            res = std::move(nxt);
            ov = std::move(trial);
        }
    }

    std::pair<double, double> current_bounds(const detail::BnBNode& node, int col) const {
        auto it = node.overrides.find(col);
        if (it != node.overrides.end()) return it->second;
        return {pr_.lb[col], pr_.ub[col]};
    }

    /// Rounds integer columns, re-solves with them fixed, and stores the
    /// incumbent when the fixed problem is solvable and improving. Returns
    /// whether the fixed problem was solvable at all.
    bool try_incumbent(const std::vector<double>& x,
                       const std::map<int, std::pair<double, double>>& overrides,
                       const std::string& source) {
        Eigen::VectorXd b = sf_.b;
        for (const auto& [col, bounds] : overrides) {
            b[sf_.bounds.lb_row[col]] = -bounds.first;
            b[sf_.bounds.ub_row[col]] = bounds.second;
        }
        for (int c : int_cols_) {
            double v = std::clamp((double)std::lround(x[c]), pr_.lb[c], pr_.ub[c]);
            b[sf_.bounds.lb_row[c]] = -v;
            b[sf_.bounds.ub_row[c]] = v;
        }
        SolveResult res = polisher_.solve(b, sf_.c);
        bool usable = res.status == SolveStatus::Optimal ||
                      (res.status == SolveStatus::IterLimit && res.res_primal < 1e-7 &&
                       res.res_gap < 1e-6);
        if (!usable) return false;
        double obj = -res.objective;
        std::lock_guard<std::mutex> g(mu_);
        if (!result_.incumbent || obj > result_.incumbent->objective + 1e-12) {
            result_.incumbent = Incumbent{res.x, obj, source};
            log_line(kInf);
        }
        return true;
    }

    void log_line(double bound) {
        if (!settings_.log) return;
        double best = global_bound_locked(bound);
        double inc = incumbent_obj();
        (*settings_.log) << result_.nodes << "\t" << best << "\t"
                         << (result_.incumbent ? std::to_string(inc) : "-") << "\t"
                         << rel_gap(best, inc) << "\n";
    }

    double global_bound_locked(double current) const {
        double best = current;
        if (!open_.empty()) best = std::max(best, open_.top().parent_bound);
        return best;
    }

    static double rel_gap(double bound, double inc) {
        if (inc == -kInf) return kInf;
        if (bound == kInf) return kInf;
        return std::max(0.0, bound - inc) / std::max(1.0, std::abs(inc));
    }

    void finalize() {
        std::lock_guard<std::mutex> g(mu_);
        double inc = incumbent_obj();
        if (!result_.hit_limit && open_.empty()) {
            result_.best_bound = result_.incumbent ? inc : -kInf;
            result_.gap = result_.incumbent ? 0.0 : kInf;
        } else {
            double bound = result_.incumbent ? inc : -kInf;
            // remaining open nodes cap the bound
            std::priority_queue<detail::BnBNode, std::vector<detail::BnBNode>, detail::NodeOrder>
                copy = open_;
            while (!copy.empty()) {
                bound = std::max(bound, copy.top().parent_bound);
                copy.pop();
            }
            result_.best_bound = bound;
            result_.gap = rel_gap(bound, inc);
        }
    }

    const ConicProgram& pr_;
    MipSettings settings_;
    StandardForm sf_;
    ConeSolver solver_, polisher_, diver_;
    std::vector<int> int_cols_;

    std::mutex mu_;
    std::condition_variable cv_;
    std::priority_queue<detail::BnBNode, std::vector<detail::BnBNode>, detail::NodeOrder> open_;
    long next_id_ = 0;
    int active_ = 0;
    bool stop_ = false;
    bool zero_tried_ = false;
    MipResult result_;
    std::chrono::steady_clock::time_point start_;
};

inline MipResult optimize(const ConicProgram& pr, MipSettings settings = {}) {
    BranchAndBound bnb(pr, std::move(settings));
    return bnb.optimize();
}

}  // namespace resroute
