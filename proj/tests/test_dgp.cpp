#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "sievenet/dgp.hpp"
#include "sievenet/stats.hpp"
#include "sievenet/targets.hpp"

using namespace sievenet;

namespace {

ArArchConfig iid_normal_cfg() {
    // f0 = 0, eta = 1: plain iid N(0,1)
    ArArchConfig cfg;
    cfg.lags = 1;
    cfg.target = make_custom_target(1, [](std::span<const double>) { return 0.0; });
    cfg.eta_form = ArArchConfig::EtaForm::abs_linear;
    cfg.eta_coeff = {1.0, 0.0};
    cfg.eta_min = 0.1;
    cfg.burn_in = 100;
    return cfg;
}

}  // namespace

TEST_CASE("targets evaluate as documented") {
    const auto ps2 = make_product_sine(2);
    const std::vector<double> x = {std::numbers::pi / 2.0, std::numbers::pi / 2.0};
    CHECK(ps2(x) == Catch::Approx(1.0).epsilon(1e-12));

    const auto sc = make_scaled_cosine(3);
    const std::vector<double> z = {0.0, 0.0, 0.0};
    CHECK(sc(z) == 1.0);

    const std::vector<double> bad = {1.0};
    CHECK_THROWS_AS(ps2(bad), std::invalid_argument);
}

TEST_CASE("true_l2_distance basics") {
    const auto f0 = make_product_sine(1);
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(-2.0 + 0.08 * i);

    auto same = [&](std::span<const double> x) { return f0(x); };
    CHECK(true_l2_distance(f0, same, xs, 1) == 0.0);

    auto shifted = [&](std::span<const double> x) { return f0(x) + 0.1; };
    CHECK(true_l2_distance(f0, shifted, xs, 1) == Catch::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("AR-ARCH validation conditions") {
    ArArchConfig cfg;
    cfg.lags = 1;
    cfg.target = make_product_sine(1);
    cfg.eta_coeff = {0.5, 0.3};
    auto rep = validate_ar_arch(cfg);
    CHECK(rep.pass());
    CHECK(rep.contraction_sum == Catch::Approx(0.3 * std::sqrt(2.0 / std::numbers::pi)));

    cfg.eta_coeff = {0.5, 1.5};
    rep = validate_ar_arch(cfg);
    CHECK_FALSE(rep.contraction_ok);
    CHECK_FALSE(rep.pass());

    cfg.eta_coeff = {0.0, 0.3};
    cfg.eta_min = 0.0;  // no floor and no constant: lower bound fails
    rep = validate_ar_arch(cfg);
    CHECK_FALSE(rep.eta_bounds_ok);

    // sqrt form uses sqrt(c_j) in the contraction envelope
    cfg = ArArchConfig{};
    cfg.target = make_product_sine(1);
    cfg.eta_form = ArArchConfig::EtaForm::sqrt_quadratic;
    cfg.eta_coeff = {0.5, 0.3};
    rep = validate_ar_arch(cfg);
    CHECK(rep.pass());
    CHECK(rep.contraction_sum ==
          Catch::Approx(std::sqrt(0.3) * std::sqrt(2.0 / std::numbers::pi)));
}

TEST_CASE("degenerate AR-ARCH produces iid normals") {
    auto cfg = iid_normal_cfg();
    const auto s = simulate_ar_arch(cfg, 20000, 11);
    REQUIRE(s.size() == 20000);
    const double n = static_cast<double>(s.size());
    CHECK(std::abs(mean(s.y)) < 3.0 / std::sqrt(n));
    CHECK(std::abs(sample_autocorrelation(s.y, 1)) < 3.0 / std::sqrt(n));
    CHECK(variance(s.y) == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("ARCH(1) matches its stationary variance") {
    // y_t = sqrt(0.5 + 0.3 y_{t-1}^2) v_t; E[y^2] = 0.5 / (1 - 0.3)
    ArArchConfig cfg;
    cfg.lags = 1;
    cfg.target = make_custom_target(1, [](std::span<const double>) { return 0.0; });
    cfg.eta_form = ArArchConfig::EtaForm::sqrt_quadratic;
    cfg.eta_coeff = {0.5, 0.3};
    cfg.eta_min = 0.01;
    cfg.burn_in = 1000;

    // long-run simulation oracle: average several seeds
    double acc = 0.0;
    const int paths = 4;
    for (int k = 0; k < paths; ++k) {
        const auto s = simulate_ar_arch(cfg, 100000, 100 + k);
        double m2 = 0.0;
        for (double y : s.y) m2 += y * y;
        acc += m2 / static_cast<double>(s.size());
    }
    CHECK(acc / paths == Catch::Approx(0.5 / 0.7).margin(0.02));
}

TEST_CASE("AR-ARCH simulation is deterministic and lag-consistent") {
    ArArchConfig cfg;
    cfg.lags = 2;
    cfg.target = make_product_sine(2);
    cfg.eta_coeff = {0.4, 0.1, 0.1};
    const auto a = simulate_ar_arch(cfg, 500, 42);
    const auto b = simulate_ar_arch(cfg, 500, 42);
    CHECK(a.y == b.y);
    CHECK(a.x == b.x);

    const auto c = simulate_ar_arch(cfg, 500, 43);
    CHECK(a.y != c.y);

    // x_t must hold (y_{t-1}, y_{t-2})
    for (std::size_t t = 1; t < a.size(); ++t) {
        CHECK(a.x_row(t)[0] == a.y[t - 1]);
        if (t >= 2) CHECK(a.x_row(t)[1] == a.y[t - 2]);
    }

    cfg.eta_coeff = {0.4, 2.0, 0.1};  // violates the contraction condition
    CHECK_THROWS_AS(simulate_ar_arch(cfg, 100, 1), std::invalid_argument);
}

TEST_CASE("stationarity proxy: different initial conditions, same marginal") {
    ArArchConfig cfg;
    cfg.lags = 1;
    cfg.target = make_product_sine(1);
    cfg.eta_coeff = {0.4, 0.15};
    cfg.burn_in = 1000;

    auto far = cfg;
    far.y_init = {25.0};
    const auto a = simulate_ar_arch(cfg, 30000, 5);
    const auto b = simulate_ar_arch(far, 30000, 6);
    CHECK(ks_distance(a.y, b.y) < 0.02);
}

TEST_CASE("mixing proxy: autocorrelation dies out by lag 20") {
    ArArchConfig cfg;
    cfg.lags = 1;
    cfg.target = make_product_sine(1);
    cfg.eta_coeff = {0.4, 0.15};
    const auto s = simulate_ar_arch(cfg, 50000, 17);
    CHECK(std::abs(sample_autocorrelation(s.y, 20)) < 0.05);
}

TEST_CASE("logistic conditional mean") {
    LogisticAutoConfig cfg;
    cfg.y_lags = 1;
    cfg.covariate_dim = 1;
    cfg.bound = 2.0;
    cfg.target = make_custom_target(2, [](std::span<const double>) { return 0.0; });
    const std::vector<double> x = {0.5, 0.0};
    CHECK(conditional_mean_logistic(cfg, x) == 0.5);

    cfg.target = make_custom_target(2, [](std::span<const double>) { return 1.0; });
    CHECK(conditional_mean_logistic(cfg, x) ==
          Catch::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))).epsilon(1e-12));

    cfg.target = make_custom_target(2, [](std::span<const double>) { return -1.0; });
    CHECK(conditional_mean_logistic(cfg, x) == Catch::Approx(0.11920292202).epsilon(1e-9));

    // range stays strictly inside (0,1) across the whole f0 in [-1,1] domain
    for (double f0v = -1.0; f0v <= 1.0; f0v += 0.125) {
        cfg.target = make_custom_target(2, [f0v](std::span<const double>) { return f0v; });
        const double p = conditional_mean_logistic(cfg, x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("logistic simulator hits its conditional probabilities") {
    LogisticAutoConfig cfg;
    cfg.y_lags = 1;
    cfg.covariate_dim = 1;
    cfg.bound = 2.0;
    cfg.target = make_custom_target(2, [](std::span<const double>) { return 0.0; });
    cfg.burn_in = 200;

    for (auto mode : {LogisticAutoConfig::ExogeneityMode::strict,
                      LogisticAutoConfig::ExogeneityMode::uniform_noise}) {
        cfg.mode = mode;
        const auto s = simulate_logistic_auto(cfg, 40000, 3);
        const double n = static_cast<double>(s.size());
        CHECK(std::abs(mean(s.y) - 0.5) < 3.0 / (2.0 * std::sqrt(n)));
    }

    // f0 = 1 everywhere: mean must be close to sigmoid(2)
    cfg.target = make_custom_target(2, [](std::span<const double>) { return 1.0; });
    cfg.mode = LogisticAutoConfig::ExogeneityMode::strict;
    const auto s1 = simulate_logistic_auto(cfg, 40000, 4);
    CHECK(mean(s1.y) == Catch::Approx(0.880797).margin(0.006));

    // determinism
    const auto s2 = simulate_logistic_auto(cfg, 1000, 77);
    const auto s3 = simulate_logistic_auto(cfg, 1000, 77);
    CHECK(s2.y == s3.y);
    CHECK(s2.x == s3.x);
}

TEST_CASE("logistic autoregression matches the two-state Markov conditionals") {
    // f0 depends only on the y-lag: f0(v, y) = 0.8 y - 0.4
    LogisticAutoConfig cfg;
    cfg.y_lags = 1;
    cfg.covariate_dim = 1;
    cfg.bound = 2.0;
    cfg.target =
        make_custom_target(2, [](std::span<const double> x) { return 0.8 * x[1] - 0.4; });
    cfg.burn_in = 500;
    const auto s = simulate_logistic_auto(cfg, 100000, 9);

    std::map<int, std::pair<double, double>> counts;  // y_{t-1} -> (ones, total)
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int prev = static_cast<int>(s.x_row(t)[1]);
        counts[prev].second += 1.0;
        counts[prev].first += s.y[t];
    }
    REQUIRE(counts.size() == 2);
    for (const auto& [prev, c] : counts) {
        const double expected = sigmoid(2.0 * (0.8 * prev - 0.4));
        CHECK(c.first / c.second == Catch::Approx(expected).margin(0.02));
    }
}

TEST_CASE("logistic DGP calibration against binned conditional means") {
    LogisticAutoConfig cfg;
    cfg.y_lags = 1;
    cfg.covariate_dim = 1;
    cfg.bound = 2.0;
    cfg.target = make_product_sine(2);
    cfg.burn_in = 500;
    const auto s = simulate_logistic_auto(cfg, 100000, 21);

    // bin on (v rounded down to 0.1 cells, y-lag)
    std::map<std::pair<int, int>, std::pair<double, double>> bins;
    std::map<std::pair<int, int>, double> predicted;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const auto x = s.x_row(t);
        const auto key = std::make_pair(static_cast<int>(x[0] * 10.0),
                                        static_cast<int>(x[1]));
        bins[key].second += 1.0;
        bins[key].first += s.y[t];
        predicted[key] += conditional_mean_logistic(cfg, x);
    }
    double max_dev = 0.0;
    std::size_t used = 0;
    for (const auto& [key, c] : bins) {
        if (c.second < 500.0) continue;
        ++used;
        max_dev = std::max(max_dev, std::abs(c.first / c.second - predicted[key] / c.second));
    }
    CHECK(used >= 10);
    CHECK(max_dev < 0.03);
}

TEST_CASE("copula covariates stay in the unit interval and mix") {
    LogisticAutoConfig cfg;
    cfg.y_lags = 1;
    cfg.covariate_dim = 2;
    cfg.bound = 2.0;
    cfg.target = make_product_sine(3);
    cfg.covariate_process = LogisticAutoConfig::CovariateProcess::gaussian_copula_ar;
    cfg.copula_rho = 0.6;
    cfg.burn_in = 200;
    const auto s = simulate_logistic_auto(cfg, 20000, 13);
    std::vector<double> v1;
    bool in_range = true;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const auto x = s.x_row(t);
        in_range = in_range && x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0;
        v1.push_back(x[0]);
    }
    CHECK(in_range);
    // uniform marginal and geometric memory
    CHECK(mean(v1) == Catch::Approx(0.5).margin(0.02));
    CHECK(sample_autocorrelation(v1, 1) > 0.3);
    CHECK(std::abs(sample_autocorrelation(v1, 30)) < 0.05);
}

TEST_CASE("gaussian tail moment against the quadrature oracle") {
    CHECK(tail_moment_gaussian(0.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(tail_moment_gaussian(2.0) == Catch::Approx(0.26146).margin(1e-5));

    for (double b : {0.0, 0.5, 1.0, 2.0, 3.5}) {
        // integrate y^2 phi(y) over [b, b+12] in short panels so the adaptive
        // rule sees the mass; the remaining tail is below 1e-30
        double oracle = 0.0;
        for (int k = 0; k < 6; ++k)
            oracle += adaptive_simpson([](double y) { return y * y * normal_pdf(y); },
                                       b + 2.0 * k, b + 2.0 * (k + 1), 1e-14);
        oracle *= 2.0;
        CHECK(tail_moment_gaussian(b) == Catch::Approx(oracle).margin(1e-10));
    }

    double prev = tail_moment_gaussian(0.0);
    for (double b = 0.5; b < 6.0; b += 0.5) {
        const double v = tail_moment_gaussian(b);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(tail_moment_gaussian(-1.0), std::invalid_argument);
}

TEST_CASE("tail condition: growing envelope passes, constant envelope fails") {
    TailSchedule sched;  // standard normal marginal
    const std::vector<std::size_t> grid = {100, 1000, 10000};

    const auto grow = check_tail_condition(
        sched, [](std::size_t n) { return std::pow(static_cast<double>(n), 0.2); }, grid);
    CHECK(grow.pass);
    for (std::size_t i = 0; i + 1 < grow.rows.size(); ++i)
        CHECK(grow.rows[i + 1].stationary_value < grow.rows[i].stationary_value);

    const auto flat = check_tail_condition(sched, [](std::size_t) { return 1.0; }, grid);
    CHECK_FALSE(flat.pass);
    for (std::size_t i = 0; i + 1 < flat.rows.size(); ++i)
        CHECK(flat.rows[i + 1].stationary_value > flat.rows[i].stationary_value);
}

TEST_CASE("tail condition: degenerate variable and gaussian schedules") {
    TailSchedule zero;
    zero.mu = 0.0;
    zero.sigma = 0.0;  // Y = 0 almost surely
    const std::vector<std::size_t> grid = {100, 1000, 10000};
    const auto rep = check_tail_condition(zero, [](std::size_t) { return 1.0; }, grid);
    CHECK(rep.pass);
    for (const auto& row : rep.rows) CHECK(row.stationary_value == 0.0);

    TailSchedule sched;
    sched.mode = TailSchedule::Mode::gaussian_schedule;
    sched.moment_fn = [](std::size_t t) {
        return std::make_pair(0.1 * std::sin(static_cast<double>(t)), 1.0);
    };
    const auto g = check_tail_condition(
        sched, [](std::size_t n) { return std::pow(static_cast<double>(n), 0.25); }, grid);
    CHECK(g.pass);
    CHECK(g.rows.back().min_std_threshold > g.rows.front().min_std_threshold);

    const auto g_flat = check_tail_condition(sched, [](std::size_t) { return 2.0; }, grid);
    CHECK_FALSE(g_flat.pass);
}
