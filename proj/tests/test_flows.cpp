#include "hiso/flows.hpp"
#include "hiso/logreg.hpp"
#include "hiso/random.hpp"
#include "hiso/suites.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hiso;

namespace {

VectorXd scalar(double v) {
    VectorXd x(1);
    x(0) = v;
    return x;
}

CostEnsemble three_quadratics() {
    return make_ensemble(
        {scalar_quadratic(1.0, 0.0), scalar_quadratic(1.0, 1.0), scalar_quadratic(1.0, 2.0)});
}

// d = 1, H^1 = 1, H^2 = 4, centers chosen so the gradient sum at x = 1 is 5
CostEnsemble two_scalar_mix() {
    return make_ensemble({scalar_quadratic(1.0, 0.0), scalar_quadratic(4.0, 0.0)});
}

}  // namespace

TEST_CASE("field directions on quadratic ensembles") {
    const CostEnsemble ens = three_quadratics();

    REQUIRE(gd_field(ens, scalar(0.0))(0) == Catch::Approx(3.0));
    REQUIRE(gd_field(ens, scalar(1.0))(0) == Catch::Approx(0.0).margin(1e-15));

    REQUIRE(nr_field(ens, scalar(0.0))(0) == Catch::Approx(1.0));
    // identical quadratics: exact Newton step toward the mean, independent of N
    REQUIRE(nr_field(ens, scalar(3.0))(0) == Catch::Approx(-(3.0 - 1.0)));

    // N identical unit quadratics: N times the Newton field
    REQUIRE(hiso_field(ens, scalar(0.0))(0) == Catch::Approx(3.0 * 1.0));
    REQUIRE(hiso_field(ens, scalar(1.0))(0) == Catch::Approx(0.0).margin(1e-15));

    // scalar mix: sum g = 5 at x = 1, (1/2)(1 + 1/4) * 5 = 3.125
    const CostEnsemble mix = two_scalar_mix();
    REQUIRE(mix.total_gradient(scalar(1.0))(0) == Catch::Approx(5.0));
    REQUIRE(nr_field(mix, scalar(1.0))(0) == Catch::Approx(-1.0));
    REQUIRE(hiso_field(mix, scalar(1.0))(0) == Catch::Approx(-3.125));
}

TEST_CASE("quartic derived field value") {
    std::vector<AgentCost> agents;
    std::vector<std::pair<double, double>> ab = {{0.02, 0.05}, {0.04, 0.01}, {0.09, 0.07}};
    double expected = 0.0;
    for (auto [a, b] : ab) {
        agents.push_back(quartic_cost(a, b));
        expected -= 2 * a + 4 * b;  // gradient at x = 1
    }
    REQUIRE(gd_field(make_ensemble(std::move(agents)), scalar(1.0))(0) ==
            Catch::Approx(expected).margin(1e-15));
}

TEST_CASE("effort normalization gains") {
    // N identical quadratics with unit Hessian
    const int d = 3;
    std::vector<AgentCost> agents;
    for (int i = 0; i < 4; ++i)
        agents.push_back(quadratic_cost(MatrixXd::Identity(d, d), VectorXd::Constant(d, i)));
    const EffortGains g1 = normalize_effort(make_ensemble(std::move(agents)), VectorXd::Zero(d));
    REQUIRE(g1.gain_gd == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(g1.gain_nr == Catch::Approx(4.0).margin(1e-12));

    // single agent: the nr gain is the condition number of H
    MatrixXd h(2, 2);
    h << 5.0, 0.0, 0.0, 0.5;
    const EffortGains g2 =
        normalize_effort(make_ensemble({quadratic_cost(h, VectorXd::Zero(2))}), VectorXd::Zero(2));
    REQUIRE(g2.gain_nr == Catch::Approx(10.0).margin(1e-10));

    // scalar mix H = {1, 4}
    const EffortGains g3 = normalize_effort(two_scalar_mix(), scalar(1.0));
    REQUIRE(g3.gain_gd == Catch::Approx(0.625).margin(1e-12));
    REQUIRE(g3.gain_nr == Catch::Approx(3.125).margin(1e-12));
}

TEST_CASE("normalized effort bounds are ordered around the reference flow") {
    std::mt19937_64 rng = make_rng(31);
    const CostEnsemble ens = random_quadratic_ensemble(5, 3, rng);
    const VectorXd x0 = 2.0 * random_gaussian_vector(3, rng);
    const EffortGains gains = normalize_effort(ens, x0);

    MatrixXd inv_mean = MatrixXd::Zero(3, 3);
    for (const auto& a : ens.agents)
        inv_mean += a.hessian(x0).llt().solve(MatrixXd::Identity(3, 3));
    inv_mean /= ens.size();
    const double g_norm = ens.total_gradient(x0).norm();
    const double bound = Eigen::SelfAdjointEigenSolver<MatrixXd>(inv_mean)
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff() *
                         g_norm;

    const double eff_gd = (gains.gain_gd * gd_field(ens, x0)).norm();
    const double eff_nr = (gains.gain_nr * nr_field(ens, x0)).norm();
    const double eff_hiso = hiso_field(ens, x0).norm();

    // the gd bound matches the reference bound exactly; the pointwise norms
    // sit within the condition-number equivalence of the bounds
    REQUIRE(eff_gd == Catch::Approx(bound).epsilon(1e-12));
    REQUIRE(eff_hiso <= bound * (1.0 + 1e-12));
    REQUIRE(eff_nr >= bound * (1.0 - 1e-12));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ens.total_hessian(x0));
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    REQUIRE(eff_nr <= bound * cond * (1.0 + 1e-12));
}

TEST_CASE("euler run basics") {
    const CostEnsemble quad = make_ensemble({scalar_quadratic(1.0, 0.0)});

    // one step of gradient flow on 0.5 x^2 from 1 with step 0.1
    FlowTrace tr = euler_run({FlowKind::GD, 1.0}, quad, scalar(1.0), 0.1, 0.35, -1.0, 0.0);
    REQUIRE(tr.steps.size() == 5);  // t = 0 .. 0.4, the first grid time past the horizon
    REQUIRE(tr.steps[1].x(0) == Catch::Approx(0.9).margin(1e-15));
    for (size_t k = 1; k < tr.steps.size(); ++k) REQUIRE(tr.steps[k].t > tr.steps[k - 1].t);

    // Newton on a quadratic ensemble converges in one unit step
    const CostEnsemble ens = three_quadratics();
    const double f_star = ens.total_value(scalar(1.0));
    FlowTrace nr = euler_run({FlowKind::NR, 1.0}, ens, scalar(4.0), 1.0, 10.0, 1e-14, f_star);
    REQUIRE(nr.reached_target);
    REQUIRE(nr.steps.size() == 2);
    REQUIRE(nr.steps.back().x(0) == Catch::Approx(1.0).margin(1e-12));

    // inadmissible stepsize |1 - 2.5| > 1 diverges and is detected
    REQUIRE_THROWS_AS(euler_run({FlowKind::GD, 1.0}, quad, scalar(1.0), 2.5, 100.0, 1e-12, 0.0),
                      DivergenceError);

    REQUIRE_THROWS_AS(euler_run({FlowKind::GD, 1.0}, quad, scalar(1.0), -0.1, 1.0, 1e-12, 0.0),
                      std::invalid_argument);
}

TEST_CASE("stepsize grid search") {
    const CostEnsemble quad = make_ensemble({scalar_quadratic(1.0, 0.0)});

    GridSearchResult gs = grid_search_stepsize({FlowKind::GD, 1.0}, quad, scalar(1.0),
                                               {0.5, 1.0, 1.5}, 1e-10, 0.0, 50.0);
    REQUIRE(gs.best_step == Catch::Approx(1.0));
    REQUIRE(gs.best_iters == 1);

    const CostEnsemble ens = three_quadratics();
    const double f_star = ens.total_value(scalar(1.0));
    GridSearchResult nr = grid_search_stepsize({FlowKind::NR, 1.0}, ens, scalar(4.0),
                                               {0.25, 1.0, 1.7}, 1e-12, f_star, 50.0);
    REQUIRE(nr.best_step == Catch::Approx(1.0));

    // every candidate diverges
    REQUIRE_THROWS_AS(grid_search_stepsize({FlowKind::GD, 1.0}, quad, scalar(1.0), {2.5, 3.0},
                                           1e-10, 0.0, 50.0),
                      std::runtime_error);
    REQUIRE_THROWS_AS(
        grid_search_stepsize({FlowKind::GD, 1.0}, quad, scalar(1.0), {}, 1e-10, 0.0, 50.0),
        std::invalid_argument);
}

TEST_CASE("newton oracle reference minimizers") {
    const CostEnsemble ens = three_quadratics();
    REQUIRE(newton_oracle(ens, scalar(10.0), 1e-12)(0) == Catch::Approx(1.0).margin(1e-10));

    std::mt19937_64 rng = make_rng(17);
    std::uniform_real_distribution<double> coeff(0.01, 0.1);
    std::vector<AgentCost> agents;
    for (int i = 0; i < 10; ++i) agents.push_back(quartic_cost(coeff(rng), coeff(rng)));
    const CostEnsemble quartics = make_ensemble(std::move(agents));
    REQUIRE(std::abs(newton_oracle(quartics, scalar(3.0), 1e-12)(0)) < 1e-9);

    const LogRegData data = generate_logreg_data(7, 5, 5, 10, 1.35, 2.0);
    const CostEnsemble logistic = logistic_ensemble(data);
    const VectorXd x_star = newton_oracle(logistic, VectorXd::Zero(6), 1e-10);
    REQUIRE(logistic.total_gradient(x_star).norm() <= 1e-10);

    REQUIRE_THROWS_AS(newton_oracle(ens, scalar(1e8), 1e-12, 1), std::runtime_error);
}

TEST_CASE("gap decreases monotonically at grid-optimal stepsizes") {
    std::mt19937_64 rng = make_rng(23);
    std::uniform_real_distribution<double> coeff(0.01, 0.1);
    std::vector<AgentCost> agents;
    for (int i = 0; i < 5; ++i) agents.push_back(quartic_cost(coeff(rng), coeff(rng)));
    const CostEnsemble ens = make_ensemble(std::move(agents));
    const double f_star = ens.total_value(newton_oracle(ens, scalar(0.0), 1e-12));

    for (FlowKind kind : {FlowKind::GD, FlowKind::NR, FlowKind::HISO}) {
        const FlowField field{kind, 1.0};
        const GridSearchResult gs =
            grid_search_stepsize(field, ens, scalar(3.0), step_grid(), 1e-6, f_star, 50.0);
        const FlowTrace tr = euler_run(field, ens, scalar(3.0), gs.best_step, 50.0, 1e-6, f_star);
        for (size_t k = 2; k < tr.steps.size(); ++k)
            REQUIRE(tr.steps[k].f_gap <= tr.steps[k - 1].f_gap * (1.0 + 1e-12));
    }
}

TEST_CASE("matrix-bound and rate-dominance property suites") {
    const MatrixBoundStats mb = inverse_sum_bound_suite(1000, 1);
    REQUIRE(mb.pass);
    REQUIRE(mb.min_eigenvalue >= -1e-9);

    const RateDominanceStats rd = rate_dominance_suite(200, 1);
    REQUIRE(rd.pass);
    REQUIRE(rd.min_margin >= -1e-9);
}

TEST_CASE("non-PD hessians are hard errors naming the agent") {
    AgentCost bad;
    bad.dim = 1;
    bad.m_lower = bad.m_upper = 1.0;  // lies about its curvature
    bad.value = [](const VectorXd& x) { return -x(0) * x(0); };
    bad.gradient = [](const VectorXd& x) { return VectorXd::Constant(1, -2.0 * x(0)); };
    bad.hessian = [](const VectorXd&) { return MatrixXd::Constant(1, 1, -2.0); };
    const CostEnsemble ens = make_ensemble({scalar_quadratic(1.0, 0.0), bad});

    try {
        hiso_field(ens, scalar(1.0));
        FAIL("expected NonPdHessianError");
    } catch (const NonPdHessianError& e) {
        REQUIRE(e.agent == 1);
        REQUIRE(std::string(e.what()).find("agent 1") != std::string::npos);
    }
}
