#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "panda/evaluation.hpp"
#include "panda/preference.hpp"
#include "panda/retrieval.hpp"
#include "panda/similarity_kernels.hpp"

using namespace panda;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("ranking ignores candidate order") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        prefs::ExpertOutputRecord r{"r", "t", "q", {}, std::nullopt};
        const auto n = 2 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i) {
            // distinct scores so the ranking is order-free
            r.candidates.push_back({"c" + std::to_string(i), static_cast<double>(i) * 0.5 - 3.0});
        }
        auto shuffled = r;
        std::shuffle(shuffled.candidates.begin(), shuffled.candidates.end(), rng);
        const auto top = 1 + rng() % n;
        CHECK(prefs::rank_candidates(r, top).ranked == prefs::rank_candidates(shuffled, top).ranked);
        const auto ranked = prefs::rank_candidates(shuffled, n).ranked;
        for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].score >= ranked[i].score);
    }
}

TEST_CASE("equal scores rank by original position") {
    prefs::ExpertOutputRecord r{"r", "t", "q", {{"a", 1.0}, {"b", 2.0}, {"c", 1.0}, {"d", 2.0}}, std::nullopt};
    const auto ranked = prefs::rank_candidates(r, 4).ranked;
    std::vector<std::string> texts;
    for (const auto& c : ranked) texts.push_back(c.text);
    CHECK(texts == std::vector<std::string>{"b", "d", "a", "c"});
}

TEST_CASE("cosine is symmetric, scale invariant and bounded") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dim = 1 + rng() % 64;
        const auto a = random_vector(rng, dim);
        const auto b = random_vector(rng, dim);
        const double ab = retrieval::cosine_similarity(a, b);
        CHECK(std::abs(ab - retrieval::cosine_similarity(b, a)) <= 1e-12);
        CHECK(std::abs(ab - oracle::cosine(a, b)) <= 1e-9);
        CHECK(ab >= -1.0);
        CHECK(ab <= 1.0);
        auto scaled = a;
        const double s = scale(rng);
        for (auto& x : scaled) x *= s;
        CHECK(std::abs(retrieval::cosine_similarity(scaled, b) - ab) <= 1e-9);
        CHECK(std::abs(retrieval::cosine_similarity(a, a) - 1.0) <= 1e-9);
        CHECK(retrieval::cosine_similarity(a, std::vector<double>(dim, 0.0)) == 0.0);
    }
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    std::mt19937_64 rng(3);
    for (std::size_t rows : {1u, 7u, 2048u, 5000u}) {
        const std::size_t dim = 24;
        std::vector<double> matrix, norms;
        for (std::size_t r = 0; r < rows; ++r) {
            auto v = random_vector(rng, dim);
            if (r % 97 == 5) std::fill(v.begin(), v.end(), 0.0);
            double sq = 0;
            for (double x : v) sq += x * x;
            norms.push_back(std::sqrt(sq));
            matrix.insert(matrix.end(), v.begin(), v.end());
        }
        const auto q = random_vector(rng, dim);
        std::vector<double> s(rows), p(rows);
        retrieval::kernels::cosine_scores_serial(matrix, norms, q, s);
        retrieval::kernels::cosine_scores_omp(matrix, norms, q, p);
        CHECK(s == p);
    }
}

TEST_CASE("retrieval matches a brute-force sort, ties included") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t dim = 2 + rng() % 48;
        const std::size_t n = 1 + rng() % 300;
        InsightPool pool("test", dim);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            // every fifth row repeats an earlier one to plant exact ties
            auto v = (i % 5 == 4) ? rows[rng() % rows.size()] : random_vector(rng, dim);
            rows.push_back(v);
            char id[16];
            std::snprintf(id, sizeof id, "ins-%04zu", (i * 7919) % 10000);
            pool.add({id, "src", "key", "text", "test"}, v);
        }
        const auto q = random_vector(rng, dim);
        std::vector<std::pair<std::string, double>> scored;
        for (std::size_t i = 0; i < n; ++i) scored.emplace_back(pool.insight(i).id, oracle::cosine_double(rows[i], q));
        for (std::size_t k : {std::size_t{1}, std::size_t{6}, n + 3}) {
            const auto got = retrieval::top_k_by_vector(pool, q, {k, std::nullopt});
            std::vector<std::string> ids;
            for (const auto& h : got.hits) ids.push_back(h.insight_id);
            CHECK(ids == oracle::brute_force_top_k(scored, k));
        }
    }
}

TEST_CASE("macro-F1 agrees with the confusion-matrix oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + static_cast<int>(rng() % 5);
        const std::size_t n = 1 + rng() % 80;
        std::vector<int> preds(n), golds(n);
        for (std::size_t i = 0; i < n; ++i) {
            golds[i] = static_cast<int>(rng() % c);
            preds[i] = (rng() % 10 == 0) ? eval::kParseFailure : static_cast<int>(rng() % c);
        }
        const auto got = eval::macro_f1(preds, golds, c);
        CHECK(std::abs(got.macro_f1 - oracle::macro_f1(preds, golds, c)) <= 1e-12);
        CHECK(got.macro_f1 >= 0.0);
        CHECK(got.macro_f1 <= 1.0);

        // renaming classes consistently leaves the score unchanged
        std::vector<int> perm(static_cast<std::size_t>(c));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto p2 = preds, g2 = golds;
        for (auto& x : p2) if (x >= 0) x = perm[x];
        for (auto& x : g2) x = perm[x];
        CHECK(std::abs(eval::macro_f1(p2, g2, c).macro_f1 - got.macro_f1) <= 1e-12);
    }
}

TEST_CASE("label flipping is reproducible and exact") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 400;
        const int c = 2 + static_cast<int>(rng() % 4);
        std::vector<eval::LabeledExample> d;
        for (std::size_t i = 0; i < n; ++i) d.push_back({std::to_string(i), "t", static_cast<int>(rng() % c), std::nullopt});
        const double ta = 0.05 + 0.95 * std::uniform_real_distribution<double>(0, 1)(rng);
        const eval::FlipSpec spec{ta, rng(), c};
        const auto a = eval::flip_labels(d, spec);
        const auto b = eval::flip_labels(d, spec);
        CHECK(a.examples == b.examples);
        CHECK(a.flipped == b.flipped);
        CHECK(a.flipped.size() == oracle::expected_flips(ta, n));
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            changed += a.examples[i].gold != d[i].gold;
            CHECK(a.examples[i].gold >= 0);
            CHECK(a.examples[i].gold < c);
            CHECK(a.examples[i].id == d[i].id);
        }
        CHECK(changed == a.flipped.size());
    }
}

TEST_CASE("aggregating constant scores returns the constant") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const double v = static_cast<double>(rng() % 101);
        std::vector<eval::EpisodeResult> rs;
        const auto variations = 1 + rng() % 6;
        for (std::size_t var = 0; var < variations; ++var) {
            for (int round = 0; round < 5; ++round) {
                eval::EpisodeResult r;
                r.task_id = "task";
                r.variation_id = std::to_string(var);
                r.score = v;
                rs.push_back(r);
            }
        }
        std::shuffle(rs.begin(), rs.end(), rng);
        const auto agg = eval::aggregate_episodes(rs, 5);
        CHECK(agg.per_task.at("task") == v);
        CHECK(agg.incomplete.empty());
    }
}
