#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace nucav {

using Objective = std::function<double(const std::vector<double>&)>;

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    void validate() const;
    std::vector<double> clamp(std::vector<double> x) const;
};

struct EvaluationRecord {
    std::vector<double> x;
    double value = 0.0;  // +inf for rejected points
};

struct OptimizeOutcome {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t rejected = 0;  // non-finite objective values
    std::vector<EvaluationRecord> trace;
};

struct OptimizerOptions {
    std::size_t budget = 5000;
    std::uint64_t seed = 1;
    double global_fraction = 0.8;
    std::size_t population = 0;  // 0 picks 10 * dim, clamped to [20, 80]
    double mutation = 0.6;
    double crossover = 0.9;
    bool keep_trace = true;
};

// Minimizes f over the box: differential evolution (rand/1/bin) for the global
// share of the budget, then Nelder-Mead from the best point. Deterministic for
// a given seed; population members are evaluated in parallel into fixed slots.
OptimizeOutcome minimize(const Objective& f, const Box& box, const OptimizerOptions& options);

// Bounded Nelder-Mead (points projected into the box) with restarts until the
// budget is used or the simplex collapses below xtol.
OptimizeOutcome nelder_mead(const Objective& f, const Box& box, std::vector<double> x0,
                            std::size_t budget, double initial_step = 0.05, double xtol = 1e-12,
                            bool keep_trace = true);

}  // namespace nucav
