#include "csubag/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "csubag/diagnostics.hpp"
#include "csubag/parallel.hpp"
#include "csubag/partition.hpp"
#include "csubag/rng.hpp"
#include "csubag/weighting.hpp"

namespace csubag {

namespace {

enum SeedStream : std::uint64_t {
    kPartitionStream = 1,
    kWeightStream = 2,
    kCalibrationStream = 3,
    kPairStream = 4,
};

// Above this the shifted multinomial is indistinguishable from n/N in double precision.
constexpr double kMaxExactTotal = 4.0e18;

}  // namespace

double reference_lambda(double n, std::size_t p) {
    return std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(p, 2)))) / n;
}

double pi_lower(std::size_t b) {
    return 1.0 / (2.0 * (1.0 + std::sqrt(static_cast<double>(b))));
}

double pi_upper(std::size_t b) {
    const double rb = std::sqrt(static_cast<double>(b));
    return (2.0 * rb + 1.0) / (2.0 * (1.0 + rb));
}

LambdaMode parse_lambda_mode(const std::string& text) {
    if (text == "fixed") return LambdaMode::Fixed;
    if (text == "reference") return LambdaMode::Reference;
    if (text == "grid") return LambdaMode::Grid;
    if (text == "adaptive") return LambdaMode::Adaptive;
    throw Error(ErrorCode::InvalidArgument, "unknown lambda mode '" + text + "'");
}

WeightScheme parse_weight_scheme(const std::string& text) {
    if (text == "multinomial") return WeightScheme::Multinomial;
    if (text == "optimal") return WeightScheme::Optimal;
    throw Error(ErrorCode::InvalidArgument, "unknown weight scheme '" + text + "'");
}

void validate(const RunConfig& config, std::size_t n_rows, std::size_t p) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (config.subsample_size < 1 || config.b < 1 || config.m < 1 || config.K < 1 ||
        config.B < 1) {
        fail("N, b, m, K and B must all be positive");
    }
    if (!(config.tau > 0.0 && config.tau <= 1.0)) fail("tau must lie in (0, 1]");
    if (!(config.tau > pi_lower(config.b))) {
        fail("tau must exceed 1/(2(1+sqrt(b))) = " + std::to_string(pi_lower(config.b)));
    }
    if (config.d() * config.subsample_size > n_rows) {
        throw Error(ErrorCode::InsufficientSamples,
                    "b*m*N = " + std::to_string(config.d() * config.subsample_size) +
                        " exceeds n = " + std::to_string(n_rows));
    }
    if (config.nominal_n != 0.0 && config.nominal_n < static_cast<double>(n_rows)) {
        fail("nominal n cannot be smaller than the number of rows");
    }
    switch (config.lambda_mode) {
        case LambdaMode::Fixed:
            if (!(config.lambda > 0.0)) fail("fixed lambda must be positive");
            break;
        case LambdaMode::Grid:
            if (config.lambda_grid.empty()) fail("lambda grid is empty");
            for (double v : config.lambda_grid) {
                if (!(v > 0.0)) fail("lambda grid values must be positive");
            }
            break;
        case LambdaMode::Adaptive:
            if (config.calibration_size < 1) fail("calibration size must be positive");
            break;
        case LambdaMode::Reference:
            break;
    }
    if (config.solver_max_iters < 1 || !(config.solver_tol > 0.0)) fail("bad solver settings");
    (void)p;
}

IndexSet sub_support(const LassoFit& fit) { return support_of(fit.beta); }

IndexSet union_over_weights(std::span<const IndexSet> supports) {
    if (supports.empty()) throw Error(ErrorCode::InvalidArgument, "union needs K >= 1 supports");
    std::vector<std::size_t> all;
    for (const auto& s : supports) all.insert(all.end(), s.begin(), s.end());
    return make_index_set(std::move(all));
}

Vector compute_pi(std::span<const IndexSet> subset_supports, std::size_t b, std::size_t m,
                  std::size_t p) {
    if (b < 1 || m < 1 || subset_supports.size() != b * m) {
        throw Error(ErrorCode::BadGrouping, "expected b*m = " + std::to_string(b * m) +
                                                " supports, got " +
                                                std::to_string(subset_supports.size()));
    }
    std::vector<std::size_t> hits(p, 0);
    std::vector<std::size_t> seen(p, 0);
    for (std::size_t q = 0; q < b; ++q) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t l = 0; l < m; ++l) {
            for (auto j : subset_supports[q * m + l]) {
                if (j >= p) throw Error(ErrorCode::IndexOutOfRange, "support index out of range");
                ++seen[j];
            }
        }
        for (std::size_t j = 0; j < p; ++j) {
            if (seen[j] == m) ++hits[j];
        }
    }
    const double rb = std::sqrt(static_cast<double>(b));
    const double denom = rb * (rb + 1.0);
    const double offset = 1.0 / (2.0 * (rb + 1.0));
    Vector pi(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        pi[static_cast<Eigen::Index>(j)] = static_cast<double>(hits[j]) / denom + offset;
    }
    return pi;
}

Vector aggregate_beta(std::span<const Vector> fits, const IndexSet& selected, std::size_t p) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(p));
    if (fits.empty()) return out;
    for (auto j : selected) {
        if (j >= p) throw Error(ErrorCode::IndexOutOfRange, "selected index out of range");
        double sum = 0.0;
        for (const auto& f : fits) sum += f[static_cast<Eigen::Index>(j)];
        out[static_cast<Eigen::Index>(j)] = sum / static_cast<double>(fits.size());
    }
    return out;
}

std::vector<double> lambda_grid_from_kappas(double kappa_out, double kappa_in,
                                            std::size_t active_size, std::size_t p, double n) {
    const double unit = kappa_in * static_cast<double>(active_size) *
                        std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(p, 2))) / n) /
                        (2.0 + kappa_out);
    std::vector<double> grid(8);
    for (std::size_t z = 1; z <= 8; ++z) grid[z - 1] = static_cast<double>(z) * unit;
    return grid;
}

std::vector<double> adaptive_lambda_grid(const Matrix& x, const PartitionPlan& plan,
                                         std::size_t i, const IndexSet& active, double n,
                                         std::size_t calibration_size, std::uint64_t seed) {
    if (active.empty()) throw Error(ErrorCode::InvalidArgument, "adaptive grid needs a nonempty active set");
    if (i >= plan.d()) throw Error(ErrorCode::IndexOutOfRange, "subset index out of range");
    constexpr double kCap = 1e6;
    const IndexSet calibration = complement_block(plan, i, calibration_size, seed);
    Matrix x_out(static_cast<Eigen::Index>(calibration.size()), x.cols());
    for (std::size_t r = 0; r < calibration.size(); ++r) {
        x_out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(calibration[r]));
    }
    Matrix x_in(static_cast<Eigen::Index>(plan.subsets[i].size()), x.cols());
    for (std::size_t r = 0; r < plan.subsets[i].size(); ++r) {
        x_in.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(plan.subsets[i][r]));
    }
    const double kappa_out = gram_inverse_min_eig(x_out, active, kCap);
    const double kappa_in = gram_condition(x_in, active, kCap);
    return lambda_grid_from_kappas(kappa_out, kappa_in, active.size(),
                                   static_cast<std::size_t>(x.cols()), n);
}

std::vector<CvPair> contrast_pairs(std::size_t d, std::size_t K, std::size_t max_pairs,
                                   std::uint64_t seed) {
    const std::size_t cells = d * K;
    const std::size_t total = cells * cells;
    auto decode = [&](std::size_t code) {
        const std::size_t a = code / cells;
        const std::size_t c = code % cells;
        return CvPair{a / K, a % K, c / K, c % K};
    };
    std::vector<CvPair> pairs;
    if (total <= max_pairs) {
        for (std::size_t code = 0; code < total; ++code) pairs.push_back(decode(code));
        return pairs;
    }
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> draw(0, total - 1);
    std::set<std::size_t> chosen;
    while (chosen.size() < max_pairs) chosen.insert(draw(rng));
    for (auto code : chosen) pairs.push_back(decode(code));
    return pairs;
}

double contrast_statistic(std::span<const CvBlock> blocks,
                          const std::vector<std::vector<LassoFit>>& fits,
                          std::span<const CvPair> pairs, double n) {
    auto term = [&](std::size_t data, std::size_t replicate, const LassoFit& fit) {
        const CvBlock& block = blocks[data];
        const Vector r = block.y - block.x * fit.beta;
        const auto& w = block.weights[replicate];
        double sum = 0.0;
        for (Eigen::Index l = 0; l < r.size(); ++l) {
            sum += w[static_cast<std::size_t>(l)] * r[l] * r[l];
        }
        const double shrink = 1.0 - static_cast<double>(fit.active_set.size()) / n;
        if (!(shrink > 0.0)) return std::numeric_limits<double>::infinity();
        return sum / (shrink * shrink);
    };
    double stat = 0.0;
    for (const auto& pr : pairs) {
        stat += term(pr.i, pr.k, fits[pr.i2][pr.k2]) - term(pr.i2, pr.k2, fits[pr.i][pr.k]);
    }
    return stat;
}

CvChoice max_contrast_cv(std::span<const double> candidates, std::span<const CvBlock> blocks,
                         const std::vector<std::vector<std::vector<LassoFit>>>& fits, double n,
                         std::size_t max_pairs, std::uint64_t seed) {
    CvChoice choice;
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no lambda candidates");
    if (fits.size() != candidates.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one fit table per candidate expected");
    }
    if (candidates.size() == 1) {
        choice.statistics.push_back(0.0);
        return choice;
    }
    if (blocks.size() < 2) throw Error(ErrorCode::InvalidArgument, "contrast CV needs >= 2 subsamples");
    const std::size_t K = blocks.front().weights.size();
    const auto pairs = contrast_pairs(blocks.size(), K, max_pairs, seed);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        choice.statistics.push_back(contrast_statistic(blocks, fits[c], pairs, n));
        if (choice.statistics[c] < choice.statistics[choice.index]) choice.index = c;
    }
    return choice;
}

namespace {

struct Subsample {
    Matrix x;
    Vector y;
    std::vector<std::vector<double>> weights;  // K replicates
};

Subsample prepare_subsample(const Dataset& data, const PartitionPlan& plan, std::size_t rep,
                            std::size_t i, const RunConfig& config, double n_total) {
    Subsample s;
    s.x = data.rows_x(plan.subsets[i]);
    s.y = data.rows_y(plan.subsets[i]);
    const std::size_t N = plan.subsets[i].size();
    const bool exact = n_total <= kMaxExactTotal && std::floor(n_total) == n_total;
    if (config.weights == WeightScheme::Optimal) {
        auto opt = optimal_weights(s.x, n_total, config.optimal_iters);
        std::vector<double> w = opt.weights;
        if (exact) w = round_weights(opt.weights, static_cast<std::int64_t>(n_total)).as_real();
        s.weights.assign(config.K, w);
        return s;
    }
    for (std::size_t k = 0; k < config.K; ++k) {
        if (exact) {
            Rng rng = make_rng(config.seed, {kWeightStream, rep, i, k});
            s.weights.push_back(
                draw_multinomial_weights(static_cast<std::int64_t>(n_total), N, rng).as_real());
        } else {
            s.weights.emplace_back(N, n_total / static_cast<double>(N));
        }
    }
    return s;
}

SolverConfig solver_for(const RunConfig& config, double n_total) {
    SolverConfig solver;
    solver.tol = config.solver_tol;
    solver.max_iters = config.solver_max_iters;
    solver.objective_scale = n_total;
    return solver;
}

std::vector<double> sequential_adaptive_grid(const Dataset& data, const PartitionPlan& plan,
                                             const std::vector<Subsample>& subs,
                                             const RunConfig& config, double n_total) {
    IndexSet active(data.p());
    for (std::size_t j = 0; j < data.p(); ++j) active[j] = j;
    const std::size_t calibration =
        std::min(config.calibration_size, data.n() - config.subsample_size);
    const SolverConfig solver = solver_for(config, n_total);
    std::vector<double> grid;
    const std::size_t passes = std::max<std::size_t>(1, std::min(config.adaptive_iters, plan.d()));
    for (std::size_t i = 0; i < passes; ++i) {
        grid = adaptive_lambda_grid(data.x(), plan, i, active, n_total, calibration,
                                    derive_seed(config.seed, {kCalibrationStream, i}));
        const auto fit =
            fit_weighted_lasso(subs[i].x, subs[i].y, subs[i].weights.front(), grid.front(), solver);
        if (!fit.active_set.empty()) active = fit.active_set;
    }
    return grid;
}

}  // namespace

SelectionRun run_selection(const Dataset& dataset, const RunConfig& config) {
    validate(config, dataset.n(), dataset.p());
    const std::size_t p = dataset.p();
    const std::size_t d = config.d();
    const double n_total =
        config.nominal_n > 0.0 ? config.nominal_n : static_cast<double>(dataset.n());
    const SolverConfig solver = solver_for(config, n_total);

    SelectionRun run;
    run.subsample_supports.resize(config.B);
    std::vector<std::vector<std::vector<Vector>>> betas(
        config.B, std::vector<std::vector<Vector>>(d, std::vector<Vector>(config.K)));
    std::vector<std::size_t> unconverged(config.B * d, 0);

    auto plan_for = [&](std::size_t rep) {
        return make_partition(dataset.n(), config.subsample_size, config.b, config.m,
                              derive_seed(config.seed, {kPartitionStream, rep}));
    };
    auto record = [&](std::size_t rep, std::size_t i, std::vector<LassoFit>& fits) {
        std::vector<IndexSet> supports;
        for (std::size_t k = 0; k < fits.size(); ++k) {
            supports.push_back(sub_support(fits[k]));
            if (!fits[k].converged) ++unconverged[rep * d + i];
            betas[rep][i][k] = std::move(fits[k].beta);
        }
        run.subsample_supports[rep][i] = union_over_weights(supports);
    };

    double lambda = 0.0;
    std::size_t first_rep = 0;
    switch (config.lambda_mode) {
        case LambdaMode::Fixed: lambda = config.lambda; break;
        case LambdaMode::Reference: lambda = reference_lambda(n_total, p); break;
        case LambdaMode::Grid:
        case LambdaMode::Adaptive: {
            const PartitionPlan plan = plan_for(0);
            std::vector<Subsample> subs(d);
            parallel_for(d, config.threads, [&](std::size_t i) {
                subs[i] = prepare_subsample(dataset, plan, 0, i, config, n_total);
            });
            std::vector<double> candidates =
                config.lambda_mode == LambdaMode::Grid
                    ? config.lambda_grid
                    : sequential_adaptive_grid(dataset, plan, subs, config, n_total);
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
            const std::vector<double> descending(candidates.rbegin(), candidates.rend());

            // fits[c][i][k], c indexing ascending candidates
            std::vector<std::vector<std::vector<LassoFit>>> fits(
                candidates.size(),
                std::vector<std::vector<LassoFit>>(d, std::vector<LassoFit>(config.K)));
            parallel_for(d * config.K, config.threads, [&](std::size_t task) {
                const std::size_t i = task / config.K;
                const std::size_t k = task % config.K;
                auto path = lasso_path(subs[i].x, subs[i].y, subs[i].weights[k], descending, solver);
                for (std::size_t c = 0; c < path.size(); ++c) {
                    fits[candidates.size() - 1 - c][i][k] = std::move(path[c]);
                }
            });
            std::vector<CvBlock> blocks;
            blocks.reserve(d);
            for (auto& s : subs) blocks.push_back(CvBlock{s.x, s.y, s.weights});
            const auto choice =
                max_contrast_cv(candidates, blocks, fits, n_total, config.max_pairs,
                                derive_seed(config.seed, {kPairStream}));
            lambda = candidates[choice.index];
            run.lambda_candidates = candidates;
            run.cv_statistics = choice.statistics;
            run.subsample_supports[0].resize(d);
            for (std::size_t i = 0; i < d; ++i) record(0, i, fits[choice.index][i]);
            first_rep = 1;
            break;
        }
    }

    for (std::size_t rep = first_rep; rep < config.B; ++rep) {
        const PartitionPlan plan = plan_for(rep);
        run.subsample_supports[rep].resize(d);
        parallel_for(d, config.threads, [&](std::size_t i) {
            const Subsample s = prepare_subsample(dataset, plan, rep, i, config, n_total);
            std::vector<LassoFit> fits;
            fits.reserve(config.K);
            for (std::size_t k = 0; k < config.K; ++k) {
                fits.push_back(fit_weighted_lasso(s.x, s.y, s.weights[k], lambda, solver));
            }
            record(rep, i, fits);
        });
    }

    Vector pi = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t rep = 0; rep < config.B; ++rep) {
        run.pi_per_repetition.push_back(
            compute_pi(run.subsample_supports[rep], config.b, config.m, p));
        pi += run.pi_per_repetition.back();
    }
    pi /= static_cast<double>(config.B);

    SelectionResult& result = run.result;
    result.pi = std::move(pi);
    result.tau = config.tau;
    result.lambda_used = lambda;
    for (std::size_t j = 0; j < p; ++j) {
        // inclusive, up to round-off in the pi arithmetic
        if (result.pi[static_cast<Eigen::Index>(j)] >= config.tau - 1e-12) {
            result.selected.push_back(j);
        }
    }
    std::vector<Vector> flat;
    flat.reserve(config.B * d * config.K);
    for (auto& rep : betas) {
        for (auto& sub : rep) {
            for (auto& beta : sub) flat.push_back(std::move(beta));
        }
    }
    result.beta_agg = aggregate_beta(flat, result.selected, p);
    run.fit_count = flat.size();
    for (auto u : unconverged) run.unconverged_fits += u;
    return run;
}

}  // namespace csubag
