#include "autoinv/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "autoinv/errors.hpp"
#include "autoinv/nfp.hpp"

namespace autoinv {

bool dominates(const Individual& a, const Individual& b) {
    const bool no_worse = a.mse <= b.mse && a.uncertainty_score <= b.uncertainty_score;
    const bool better = a.mse < b.mse || a.uncertainty_score < b.uncertainty_score;
    return no_worse && better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Individual> pop) {
    if (pop.empty()) throw std::invalid_argument("non_dominated_sort: empty population");
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dominated_by(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
            } else if (dominates(pop[j], pop[i])) {
                ++dominated_by[i];
            }
        }
        if (dominated_by[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t i : fronts.back()) {
            for (std::size_t j : dominated[i]) {
                if (--dominated_by[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

void Nsga2Config::validate() const {
    if (population < 4 || population % 2 != 0) {
        throw std::invalid_argument("Nsga2Config: population must be even and >= 4");
    }
    if (generations < 1) throw std::invalid_argument("Nsga2Config: generations must be >= 1");
    if (bounds_lo.size() != bounds_hi.size() || bounds_lo.empty()) {
        throw std::invalid_argument("Nsga2Config: bounds missing");
    }
    for (std::size_t d = 0; d < bounds_lo.size(); ++d) {
        if (!(bounds_lo[d] < bounds_hi[d])) {
            throw std::invalid_argument("Nsga2Config: degenerate bounds");
        }
    }
}

namespace {

void assign_crowding(std::vector<Individual>& pop, std::span<const std::size_t> front) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i : front) pop[i].crowding = 0.0;
    if (front.size() <= 2) {
        for (std::size_t i : front) pop[i].crowding = inf;
        return;
    }
    std::vector<std::size_t> order(front.begin(), front.end());
    for (int obj = 0; obj < 2; ++obj) {
        auto value = [&](std::size_t i) {
            return obj == 0 ? pop[i].mse : pop[i].uncertainty_score;
        };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (value(a) != value(b)) return value(a) < value(b);
            return a < b;
        });
        const double span = value(order.back()) - value(order.front());
        pop[order.front()].crowding = inf;
        pop[order.back()].crowding = inf;
        if (span <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < order.size(); ++k) {
            pop[order[k]].crowding += (value(order[k + 1]) - value(order[k - 1])) / span;
        }
    }
}

std::size_t tournament(const std::vector<Individual>& pop, Rng& rng) {
    const std::size_t a = rng.index(pop.size());
    const std::size_t b = rng.index(pop.size());
    if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
    if (pop[a].crowding != pop[b].crowding) return pop[a].crowding > pop[b].crowding ? a : b;
    return std::min(a, b);
}

// simulated binary crossover, bounded
void sbx(const Nsga2Config& cfg, Rng& rng, const std::vector<double>& p1,
         const std::vector<double>& p2, std::vector<double>& c1, std::vector<double>& c2) {
    c1 = p1;
    c2 = p2;
    if (rng.uniform() > cfg.crossover_rate) return;
    for (std::size_t d = 0; d < p1.size(); ++d) {
        if (rng.uniform() > 0.5) continue;
        const double x1 = std::min(p1[d], p2[d]);
        const double x2 = std::max(p1[d], p2[d]);
        if (x2 - x1 < 1e-14) continue;
        const double u = rng.uniform();
        const double beta =
            u <= 0.5 ? std::pow(2.0 * u, 1.0 / (cfg.sbx_eta + 1.0))
                     : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (cfg.sbx_eta + 1.0));
        const double mean = 0.5 * (x1 + x2);
        const double half = 0.5 * beta * (x2 - x1);
        c1[d] = std::clamp(mean - half, cfg.bounds_lo[d], cfg.bounds_hi[d]);
        c2[d] = std::clamp(mean + half, cfg.bounds_lo[d], cfg.bounds_hi[d]);
    }
}

void polynomial_mutation(const Nsga2Config& cfg, Rng& rng, std::vector<double>& x) {
    const double rate = cfg.mutation_rate < 0.0
                            ? 1.0 / static_cast<double>(x.size())
                            : cfg.mutation_rate;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (rng.uniform() > rate) continue;
        const double lo = cfg.bounds_lo[d];
        const double hi = cfg.bounds_hi[d];
        const double span = hi - lo;
        const double u = rng.uniform();
        double delta;
        if (u < 0.5) {
            delta = std::pow(2.0 * u, 1.0 / (cfg.mutation_eta + 1.0)) - 1.0;
        } else {
            delta = 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (cfg.mutation_eta + 1.0));
        }
        x[d] = std::clamp(x[d] + delta * span, lo, hi);
    }
}

}  // namespace

std::vector<Individual> nsga2_run(const DeepEnsemble& ens, std::span<const double> y_target_norm,
                                  const UncertaintyWeights& weights, const Nsga2Config& cfg,
                                  Nsga2Stats* stats) {
    ens.validate();
    cfg.validate();
    require_dim("nsga2_run bounds", ens.input_dim(), cfg.bounds_lo.size());
    require_dim("nsga2_run target", ens.output_dim(), y_target_norm.size());

    auto evaluate = [&](Individual& ind) {
        const Prediction pred = predict(ens, ind.design);
        ind.mse = performance_mse(pred.mu, y_target_norm);
        ind.uncertainty_score = combined_uncertainty(pred, weights);
    };

    Rng rng(derive_seed(cfg.seed, 0x6e736761ULL));
    std::vector<Individual> pop(cfg.population);
    for (auto& ind : pop) {
        ind.design.resize(ens.input_dim());
        for (std::size_t d = 0; d < ind.design.size(); ++d) {
            ind.design[d] = rng.uniform(cfg.bounds_lo[d], cfg.bounds_hi[d]);
        }
        evaluate(ind);
    }

    auto rank_and_crowd = [&](std::vector<Individual>& p) {
        const auto fronts = non_dominated_sort(p);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            for (std::size_t i : fronts[f]) p[i].rank = static_cast<int>(f);
            assign_crowding(p, fronts[f]);
        }
        return fronts;
    };
    rank_and_crowd(pop);

    std::vector<double> child1;
    std::vector<double> child2;
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<Individual> combined = pop;
        combined.reserve(2 * cfg.population);
        for (std::size_t pair = 0; pair < cfg.population / 2; ++pair) {
            const auto& p1 = pop[tournament(pop, rng)];
            const auto& p2 = pop[tournament(pop, rng)];
            sbx(cfg, rng, p1.design, p2.design, child1, child2);
            polynomial_mutation(cfg, rng, child1);
            polynomial_mutation(cfg, rng, child2);
            Individual ind1;
            ind1.design = child1;
            evaluate(ind1);
            Individual ind2;
            ind2.design = child2;
            evaluate(ind2);
            combined.push_back(std::move(ind1));
            combined.push_back(std::move(ind2));
        }

        const auto fronts = rank_and_crowd(combined);
        std::vector<Individual> next;
        next.reserve(cfg.population);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= cfg.population) {
                for (std::size_t i : front) next.push_back(combined[i]);
            } else {
                std::vector<std::size_t> order(front.begin(), front.end());
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (combined[a].crowding != combined[b].crowding) {
                        return combined[a].crowding > combined[b].crowding;
                    }
                    return a < b;
                });
                for (std::size_t k = 0; next.size() < cfg.population; ++k) {
                    next.push_back(combined[order[k]]);
                }
            }
            if (next.size() == cfg.population) break;
        }
        pop = std::move(next);
        rank_and_crowd(pop);

        if (stats) {
            double best_mse = std::numeric_limits<double>::infinity();
            double best_unc = std::numeric_limits<double>::infinity();
            for (const auto& ind : pop) {
                best_mse = std::min(best_mse, ind.mse);
                best_unc = std::min(best_unc, ind.uncertainty_score);
            }
            stats->best_mse.push_back(best_mse);
            stats->best_uncertainty.push_back(best_unc);
        }
    }

    const auto fronts = non_dominated_sort(pop);
    std::vector<Individual> front;
    front.reserve(fronts.front().size());
    for (std::size_t i : fronts.front()) front.push_back(pop[i]);
    return front;
}

}  // namespace autoinv
