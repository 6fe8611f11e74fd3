#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "iovpr/synthetic.hpp"
#include "iovpr/training.hpp"
#include "support.hpp"

using namespace iovpr;
using namespace iovpr::training;

namespace {

// Second, independent loss implementation.
double reference_loss(double qp, const std::vector<double>& qn, double m) {
    double s = 0.0;
    for (double v : qn) {
        const double x = qp + m - v;
        s += x > 0 ? x : 0;
    }
    return s;
}

std::vector<double> normalized(std::vector<double> u) {
    double n = 0;
    for (double v : u) {
        n += v * v;
    }
    n = std::sqrt(n);
    for (auto& v : u) {
        v /= n;
    }
    return u;
}

double loss_at(const embed::EmbedderParams& p, const std::vector<double>& q, const std::vector<double>& pos,
               const std::vector<std::vector<double>>& negs, double m) {
    const auto eq = normalized(embed::project(p, q));
    const auto ep = normalized(embed::project(p, pos));
    std::vector<double> d2n;
    for (const auto& n : negs) {
        d2n.push_back(embed::squared_distance(eq, normalized(embed::project(p, n))));
    }
    return reference_loss(embed::squared_distance(eq, ep), d2n, m);
}

std::vector<double> random_features(testgen::Gen& g, int f) {
    std::vector<double> v(static_cast<std::size_t>(f));
    for (auto& x : v) {
        x = g.real(-1, 1);
    }
    return v;
}

synthetic::CityConfig small_city() {
    synthetic::CityConfig c;
    c.columns = 12;
    c.rows = 4;
    c.train_queries = 30;
    c.test_queries = 5;
    c.image_height = 48;
    c.image_width = 64;
    return c;
}

}  // namespace

TEST_CASE("triplet_loss examples") {
    CHECK(triplet_loss(0.1, std::vector<double>{0.3}, 0.1) == 0.0);
    CHECK(triplet_loss(0.1, std::vector<double>{0.15, 0.05}, 0.1) == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(triplet_loss(0.5, std::vector<double>{}, 0.1) == 0.0);
}

TEST_CASE("triplet_loss properties") {
    testgen::Gen g(1);
    for (int i = 0; i < 10'000; ++i) {
        const double m = g.real(0.01, 0.5);
        const double qp = g.real(0, 4);
        std::vector<double> qn(static_cast<std::size_t>(g.integer(1, 10)));
        for (auto& v : qn) {
            v = g.coin(0.2) ? qp + m : g.real(0, 4);
        }
        const double loss = triplet_loss(qp, qn, m);
        REQUIRE(loss >= 0.0);
        REQUIRE(loss == reference_loss(qp, qn, m));
        const bool all_satisfied = std::all_of(qn.begin(), qn.end(), [&](double v) { return qp + m <= v; });
        REQUIRE((loss == 0.0) == all_satisfied);

        auto shuffled = qn;
        std::shuffle(shuffled.begin(), shuffled.end(), g.engine);
        REQUIRE(triplet_loss(qp, shuffled, m) == doctest::Approx(loss).epsilon(1e-12));

        const double bump = g.real(0, 0.5);
        REQUIRE(triplet_loss(qp + bump, qn, m) >= loss);
        auto further = qn;
        further[g.integer(0, static_cast<int>(qn.size()) - 1)] += bump;
        REQUIRE(triplet_loss(qp, further, m) <= loss);
    }
}

TEST_CASE("loss_gradient matches central finite differences") {
    testgen::Gen g(2);
    constexpr int F = 8, D = 4, N = 2;
    constexpr double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 12; ++trial) {
        auto p = embed::init_params(static_cast<std::uint64_t>(trial), F, D);
        const auto q = random_features(g, F), pos = random_features(g, F);
        std::vector<std::vector<double>> negs;
        for (int j = 0; j < N; ++j) {
            negs.push_back(random_features(g, F));
        }
        const double m = 0.5;
        std::vector<std::span<const double>> neg_spans(negs.begin(), negs.end());
        const auto lg = loss_gradient(p, q, pos, neg_spans, m);
        CHECK(lg.loss == doctest::Approx(loss_at(p, q, pos, negs, m)).epsilon(1e-12));

        std::vector<double> fd(p.weights.size());
        bool near_kink = false;
        for (std::size_t k = 0; k < p.weights.size(); ++k) {
            const double w = p.weights[k];
            p.weights[k] = w + h;
            const double up = loss_at(p, q, pos, negs, m);
            p.weights[k] = w - h;
            const double down = loss_at(p, q, pos, negs, m);
            p.weights[k] = w;
            fd[k] = (up - down) / (2 * h);
            // A hinge switching inside the stencil makes the difference quotient meaningless.
            if ((up == 0.0) != (down == 0.0)) {
                near_kink = true;
            }
        }
        if (near_kink || lg.loss == 0.0) {
            continue;
        }
        double num = 0, den = 0;
        for (std::size_t k = 0; k < fd.size(); ++k) {
            num += (fd[k] - lg.gradient[k]) * (fd[k] - lg.gradient[k]);
            den += fd[k] * fd[k];
        }
        CHECK(std::sqrt(num) <= 1e-4 * std::sqrt(den));
        ++checked;
    }
    CHECK(checked >= 10);
}

TEST_CASE("loss_gradient degenerate cases") {
    testgen::Gen g(3);
    const auto p = embed::init_params(1, 8, 4);
    SUBCASE("inactive hinges give a zero gradient") {
        const auto q = random_features(g, 8);
        const std::vector<double> neg = [&] {
            auto v = q;
            for (auto& x : v) {
                x = -x;
            }
            return v;
        }();
        const std::vector<std::span<const double>> negs{neg};
        const auto lg = loss_gradient(p, q, q, negs, 0.1);
        CHECK(lg.loss == 0.0);
        CHECK(std::all_of(lg.gradient.begin(), lg.gradient.end(), [](double v) { return v == 0.0; }));
    }
    SUBCASE("zero features keep the gradient finite") {
        const std::vector<double> zero(8, 0.0);
        const std::vector<std::span<const double>> negs{zero, zero};
        const auto lg = loss_gradient(p, zero, zero, negs, 0.1);
        CHECK(lg.loss == doctest::Approx(0.2));
        CHECK(std::all_of(lg.gradient.begin(), lg.gradient.end(), [](double v) { return std::isfinite(v); }));
    }
}

TEST_CASE("train on a small city") {
    const synthetic::City city(small_city());
    const auto layouts = synthetic::make_layouts(6, 3);
    TrainConfig cfg;
    cfg.embed_dim = 16;
    cfg.loss.seed = 5;
    cfg.loss.learning_rate = 0.1;
    cfg.loss.margin = 0.05;
    cfg.mining.pool_size = 100;

    SUBCASE("zero epochs leave params unchanged") {
        cfg.loss.epochs = 0;
        const auto r = train(city.train_queries(), city.gallery(), layouts, cfg, city.loader());
        CHECK(r.params == embed::init_params(5, embed::kFeatureDim, 16));
        CHECK(r.report.epochs.empty());
    }
    SUBCASE("deterministic and loss decreases") {
        cfg.loss.epochs = 4;
        cfg.augment = false;
        const auto a = train(city.train_queries(), city.gallery(), {}, cfg, city.loader());
        const auto b = train(city.train_queries(), city.gallery(), {}, cfg, city.loader());
        CHECK(a.params == b.params);
        REQUIRE(a.report.epochs.size() == 4);
        CHECK(a.report.epochs.back().checksum == b.report.epochs.back().checksum);
        CHECK(a.report.epochs.back().checksum == a.params.checksum());
        CHECK(a.report.epochs.back().mean_loss < a.report.epochs.front().mean_loss);
        for (const auto& e : a.report.epochs) {
            CHECK(e.mean_loss >= 0.0);
        }
    }
    SUBCASE("invalid configuration") {
        cfg.loss.epochs = 1;
        CHECK_THROWS(train(city.train_queries(), city.gallery(), {}, cfg, city.loader()));
        cfg.loss.margin = 0.0;
        cfg.augment = false;
        CHECK_THROWS(train(city.train_queries(), city.gallery(), {}, cfg, city.loader()));
    }
}
