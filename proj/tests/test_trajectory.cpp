#include "csm/trajectory.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace csm;
using namespace csm::testing;

namespace {

const double kLog2 = std::log(2.0);

Protocol balanced_single_step() { return Protocol({computational(2), rotation(kPi / 2, "x")}, 0); }

Protocol random_protocol(TestRng &rng, std::size_t n, std::size_t length) {
    std::vector<Context> contexts;
    for (std::size_t k = 0; k < length; ++k) contexts.push_back(haar(rng.seed(), n, "c" + std::to_string(k)));
    return Protocol(contexts, rng.index(n));
}

/// Sum over all paths of P log(P / P~), with every factor taken from the bases directly.
double brute_force_mean(const Protocol &protocol) {
    const std::size_t n = protocol.dim();
    std::vector<std::size_t> outcomes(protocol.length(), protocol.initial_index());
    std::size_t count = 1;
    for (std::size_t k = 0; k < protocol.steps(); ++k) count *= n;
    double mean = 0.0;
    for (std::size_t index = 0; index < count; ++index) {
        std::size_t rest = index;
        for (std::size_t k = 1; k < protocol.length(); ++k) {
            outcomes[k] = rest % n;
            rest /= n;
        }
        double forward = 1.0, backward = protocol.final_marginal()[outcomes.back()];
        for (std::size_t k = 0; k < protocol.steps(); ++k) {
            const Context &a = protocol.contexts()[k];
            const Context &b = protocol.contexts()[k + 1];
            const double p = std::norm(b.vector(outcomes[k + 1]).dot(a.vector(outcomes[k])));
            forward *= p;
            backward *= p;
        }
        if (forward > 1e-24) mean += forward * std::log(forward / backward);
    }
    return mean;
}

}  // namespace

TEST(PathProbability, balanced_examples) {
    const Protocol p = balanced_single_step();
    const std::vector<std::size_t> path{0, 1};
    EXPECT_NEAR(forward_log_prob(p, path), -kLog2, 1e-15);
    EXPECT_NEAR(backward_log_prob(p, path, p.final_marginal()), -2.0 * kLog2, 1e-15);
    EXPECT_NEAR(entropy_production(p, path, p.final_marginal()), kLog2, 1e-15);
}

TEST(PathProbability, two_step_balanced) {
    const Protocol p({computational(2), rotation(kPi / 2, "x"), computational(2, "z2")}, 0);
    const std::vector<std::size_t> path{0, 1, 1};
    EXPECT_NEAR(forward_log_prob(p, path), -2.0 * kLog2, 1e-15);
    EXPECT_NEAR(backward_log_prob(p, path, p.final_marginal()), -3.0 * kLog2, 1e-15);
    const ProbabilityDistribution certain = ProbabilityDistribution::point_mass(2, 1);
    EXPECT_NEAR(entropy_production(p, path, certain), 0.0, 1e-15);
    RealVector w(2);
    w << 0.75, 0.25;
    EXPECT_NEAR(entropy_production(p, path, ProbabilityDistribution(w)), std::log(4.0), 1e-15);
}

TEST(PathProbability, forbidden_paths) {
    const Protocol p({computational(2), computational(2, "z2")}, 0);
    const std::vector<std::size_t> forbidden{0, 1};
    EXPECT_EQ(forward_log_prob(p, forbidden), -std::numeric_limits<double>::infinity());
    expect_error(ErrorCode::InternalConsistency, [&] { entropy_production(p, forbidden, p.final_marginal()); });
    const std::vector<std::size_t> allowed{0, 0};
    EXPECT_EQ(entropy_production(p, allowed, p.final_marginal()), 0.0);
}

TEST(PathProbability, rejects_bad_paths) {
    const Protocol p = balanced_single_step();
    expect_error(ErrorCode::LengthMismatch, [&] { forward_log_prob(p, std::vector<std::size_t>{0}); });
    expect_error(ErrorCode::InitialMismatch, [&] { forward_log_prob(p, std::vector<std::size_t>{1, 0}); });
    expect_error(ErrorCode::IndexOutOfRange, [&] { forward_log_prob(p, std::vector<std::size_t>{0, 2}); });
    expect_error(ErrorCode::LengthMismatch, [&] {
        backward_log_prob(p, std::vector<std::size_t>{0, 1}, ProbabilityDistribution::uniform(3));
    });
    expect_error(ErrorCode::DimensionMismatch, [] { Protocol({computational(2), computational(3, "z3")}, 0); });
    expect_error(ErrorCode::IndexOutOfRange, [] { Protocol({computational(2)}, 2); });
}

TEST(EntropyProduction, telescopes_on_random_protocols) {
    TestRng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.index(3);
        const Protocol p = random_protocol(rng, n, 2 + rng.index(3));
        for (const PathProbability &path : enumerate_paths(p)) {
            if (path.probability <= kNegligibleProbability) continue;
            EXPECT_NEAR(entropy_production(p, path.outcomes, p.final_marginal()),
                        -std::log(p.final_marginal()[path.outcomes.back()]), 1e-12);
            EXPECT_NEAR(telescoped_entropy_production(p, path.outcomes, p.final_marginal()),
                        -std::log(p.final_marginal()[path.outcomes.back()]), 1e-15);
            EXPECT_GE(entropy_production(p, path.outcomes, p.final_marginal()), -1e-12);
        }
    }
}

TEST(EntropyProduction, backward_steps_are_transposes) {
    TestRng rng(4);
    const Protocol p = random_protocol(rng, 4, 4);
    for (std::size_t k = 0; k < p.steps(); ++k) {
        EXPECT_LE((p.backward_step(k).entries - p.forward_step(k).entries.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Sampling, deterministic_in_seed) {
    TestRng rng(5);
    const Protocol p = random_protocol(rng, 3, 5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(sample_trajectory(p, seed), sample_trajectory(p, seed));
    bool differ = false;
    for (std::uint64_t seed = 1; seed < 20 && !differ; ++seed) {
        differ = sample_trajectory(p, seed).outcomes != sample_trajectory(p, 0).outcomes;
    }
    EXPECT_TRUE(differ);
}

TEST(Sampling, balanced_frequencies) {
    const Protocol p = balanced_single_step();
    std::size_t ones = 0;
    constexpr std::size_t kSeeds = 100000;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) ones += sample_trajectory(p, seed).outcomes.back();
    EXPECT_NEAR(static_cast<double>(ones) / kSeeds, 0.5, 0.01);
}

TEST(Sampling, never_draws_forbidden_outcomes) {
    const Protocol p({computational(3), computational(3, "z2"), computational(3, "z3")}, 1);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Trajectory t = sample_trajectory(p, seed);
        EXPECT_EQ(t.outcomes, (std::vector<std::size_t>{1, 1, 1}));
        EXPECT_EQ(t.entropy_production, 0.0);
    }
}

TEST(Ensemble, uneven_single_step) {
    // cos^2(theta/2) = 1/4: final marginal (1/4, 3/4).
    const Protocol p({computational(2), rotation(2.0 * kPi / 3.0)}, 0);
    const TrajectoryEnsembleStats stats = mean_entropy_production(p, 100000, 11);
    const double shannon = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
    EXPECT_NEAR(stats.shannon_entropy_final, shannon, 1e-12);
    EXPECT_NEAR(stats.shannon_entropy_final, 0.5623351446188083, 1e-12);
    EXPECT_LE(std::abs(stats.mean_entropy_production - shannon), 4.0 * stats.std_error);
    EXPECT_GT(stats.std_error, 0.0);
    EXPECT_NEAR(stats.final_frequencies[1], 0.75, 0.01);
    EXPECT_EQ(stats.sample_count, 100000U);
}

TEST(Ensemble, balanced_single_step) {
    const TrajectoryEnsembleStats stats = mean_entropy_production(balanced_single_step(), 100000, 7);
    EXPECT_LE(std::abs(stats.mean_entropy_production - kLog2), 3.0 * stats.std_error);
    EXPECT_NEAR(stats.final_frequencies[0], 0.5, 0.01);
}

TEST(Ensemble, independent_of_worker_count) {
    TestRng rng(6);
    const Protocol p = random_protocol(rng, 3, 4);
    const TrajectoryEnsembleStats one = mean_entropy_production(p, 5001, 99, 1);
    for (std::size_t workers : {2U, 3U, 4U, 7U}) {
        const TrajectoryEnsembleStats many = mean_entropy_production(p, 5001, 99, workers);
        EXPECT_EQ(one.mean_entropy_production, many.mean_entropy_production);
        EXPECT_EQ(one.std_error, many.std_error);
        EXPECT_TRUE(one.final_frequencies == many.final_frequencies);
    }
}

TEST(Ensemble, rejects_empty_sample) {
    expect_error(ErrorCode::LengthMismatch, [] { mean_entropy_production(balanced_single_step(), 0, 1); });
}

TEST(Exact, shannon_identity_by_enumeration) {
    TestRng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.index(2);
        const Protocol p = random_protocol(rng, n, 2 + rng.index(3));
        const ExactEnsembleStats exact = exact_entropy_production(p);
        EXPECT_NEAR(exact.total_probability, 1.0, 1e-12);
        EXPECT_NEAR(exact.mean_entropy_production, shannon_entropy(p.final_marginal()), 1e-12);
        EXPECT_NEAR(exact.mean_entropy_production, brute_force_mean(p), 1e-12);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(exact.final_distribution[k], p.final_marginal()[k], 1e-12);
    }
}

TEST(Exact, path_enumeration_limit) {
    std::vector<Context> many;
    for (int k = 0; k < 20; ++k) many.push_back(haar(static_cast<std::uint64_t>(k), 2, "c" + std::to_string(k)));
    const Protocol p(many, 0);
    expect_error(ErrorCode::LengthMismatch, [&] { enumerate_paths(p); });
}

TEST(Shannon, examples) {
    RealVector w(2);
    w << 0.25, 0.75;
    EXPECT_NEAR(shannon_entropy(ProbabilityDistribution(w)), 0.5623351446188083, 1e-12);
    EXPECT_NEAR(shannon_entropy(ProbabilityDistribution::uniform(2)), kLog2, 1e-15);
    EXPECT_NEAR(shannon_entropy(ProbabilityDistribution::uniform(8)), std::log(8.0), 1e-14);
    EXPECT_EQ(shannon_entropy(ProbabilityDistribution::point_mass(3, 2)), 0.0);
}

TEST(MeterEntropy, strength_interpolation) {
    const Modality initial(computational(2), 0);
    const Context x = rotation(kPi / 2, "x");
    EXPECT_NEAR(meter_protocol_entropy(initial, x, gram_identity(2)), kLog2, 1e-12);
    EXPECT_NEAR(meter_protocol_entropy(initial, x, gram_ones(2)), 0.0, 1e-12);
    double previous = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 20; ++step) {
        const double g = step / 20.0;
        const double s = meter_protocol_entropy(initial, x, gram_uniform(2, g));
        // Eigenvalues (1 +- g) / 2.
        double oracle = 0.0;
        for (double lambda : {(1.0 + g) / 2.0, (1.0 - g) / 2.0}) {
            if (lambda > 0.0) oracle -= lambda * std::log(lambda);
        }
        EXPECT_NEAR(s, oracle, 1e-12);
        EXPECT_LT(s, previous);
        previous = s;
    }
}
