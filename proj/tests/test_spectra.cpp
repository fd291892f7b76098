#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nucav/errors.hpp"
#include "nucav/spectra.hpp"
#include "support.hpp"

using namespace nucav;
using namespace nucav::test;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

LevelScheme scheme_a() {
    return derive_level_scheme(cavity_a(), IncidenceGeometry::at_mrad(kTheta3), cavity_a_layers());
}
LevelScheme scheme_b() {
    return reverse_levels(
        derive_level_scheme(cavity_b(), IncidenceGeometry::at_mrad(kTheta3), cavity_b_layers()));
}

// Direct solve of r = r_el - out . Mt^{-1} rabi, independent of the library path.
cplx direct_r(const LevelScheme& s, double delta) {
    const auto n = static_cast<Eigen::Index>(s.size());
    const Eigen::MatrixXcd Mt =
        cplx(0, 1) * (Eigen::MatrixXcd::Identity(n, n) * cplx(delta, 0.5) + s.E);
    const Eigen::VectorXcd x = Mt.fullPivLu().solve(s.rabi);
    return s.r_el - (s.out_refl.transpose() * x)(0);
}

}  // namespace

TEST_CASE("frequency grid") {
    const auto g = FrequencyGrid::linspace(-20, 20, 2001);
    REQUIRE(g.detunings.size() == 2001);
    CHECK(g.detunings.front() == -20.0);
    CHECK(g.detunings.back() == 20.0);
    CHECK(g.detunings[1000] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(FrequencyGrid::linspace(1, 0, 10), DomainError);
    CHECK_THROWS_AS(FrequencyGrid::linspace(0, 1, 0), DomainError);
    CHECK(FrequencyGrid::linspace(0, 1, 1).detunings.size() == 1);
    FrequencyGrid bad{{0.0, std::nan("")}};
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("spectrum agrees with a direct dense solve") {
    const auto s = scheme_a();
    const auto g = FrequencyGrid::linspace(-30, 30, 61);
    const auto r = reflectance(s, g);
    for (std::size_t i = 0; i < g.detunings.size(); ++i)
        CHECK(std::abs(r[i] - direct_r(s, g.detunings[i])) < 1e-12);
}

TEST_CASE("eigenmode sum reproduces direct inversion") {
    for (const auto& s : {scheme_a(), scheme_b(),
                          derive_level_scheme(eit_cavity(), IncidenceGeometry::at_mrad(2.28), two_layer())}) {
        const auto d = eigen_decompose(s);
        CHECK_FALSE(d.degenerate());
        const auto g = FrequencyGrid::linspace(-40, 40, 801);
        const auto r = reflectance(s, g);
        const auto t = transmittance(s, g);
        for (std::size_t i = 0; i < g.detunings.size(); ++i) {
            CHECK(std::abs(d.reflectance(g.detunings[i]) - r[i]) < 1e-10);
            CHECK(std::abs(d.transmittance(g.detunings[i]) - t[i]) < 1e-10);
        }
    }
}

TEST_CASE("eigenmodes of the mirrored cavity pair") {
    const auto da = eigen_decompose(scheme_a());
    const auto db = eigen_decompose(scheme_b());
    // Reference eigenvalues (-0.090+0.45i, 0.69+3.2i) gamma0.
    CHECK(rel(da.eigenvalues(0), {-0.090, 0.45}) < 0.2);
    CHECK(rel(da.eigenvalues(1), {0.69, 3.2}) < 0.2);
    CHECK(std::abs(da.eigenvalues(0) - db.eigenvalues(0)) < 1e-8);
    CHECK(std::abs(da.eigenvalues(1) - db.eigenvalues(1)) < 1e-8);
    for (Eigen::Index l = 0; l < 2; ++l) CHECK(std::abs(da.weights_t(l) - db.weights_t(l)) < 1e-8);
    // Narrow-mode reflection weight is suppressed in (b).
    CHECK(std::abs(da.weights_r(0)) / std::abs(db.weights_r(0)) >= 100.0);
    // Reference weights: r(a) (-0.13+0.80i, -0.65-3.1i), t (-0.029+0.046i, -0.73-2.7i).
    CHECK(rel(da.weights_r(0), {-0.13, 0.80}) < 0.25);
    CHECK(rel(da.weights_r(1), {-0.65, -3.1}) < 0.25);
    CHECK(rel(da.weights_t(1), {-0.73, -2.7}) < 0.25);
    CHECK(rel(db.weights_r(1), {-0.77, -2.4}) < 0.25);
}

TEST_CASE("mirrored pair: equal transmission, different reflection") {
    const auto a = scheme_a();
    const auto b = scheme_b();
    const auto g = FrequencyGrid::linspace(-20, 20, 2001);
    const auto ta = transmittance(a, g), tb = transmittance(b, g);
    const auto ra = reflectance(a, g), rb = reflectance(b, g);
    double max_t = 0.0, max_r = 0.0;
    for (std::size_t i = 0; i < g.detunings.size(); ++i) {
        max_t = std::max(max_t, std::abs(ta[i] - tb[i]));
        max_r = std::max(max_r, std::abs(std::norm(ra[i]) - std::norm(rb[i])));
    }
    CHECK(max_t < 1e-8);
    CHECK(max_r > 0.1);
}

TEST_CASE("closed-form 2x2 eigenvalues") {
    const auto s = scheme_a();
    const auto [l1, l2] = closed_form_eigenvalues_2x2(s.E);
    const auto d = eigen_decompose(s);
    const double a = std::min(std::abs(l1 - d.eigenvalues(0)) + std::abs(l2 - d.eigenvalues(1)),
                              std::abs(l2 - d.eigenvalues(0)) + std::abs(l1 - d.eigenvalues(1)));
    CHECK(a < 1e-12);
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(3, 3);
    CHECK_THROWS_AS(closed_form_eigenvalues_2x2(big), DomainError);
}

TEST_CASE("eigenvalue tracking across the square-root branch cut") {
    // E(s) = [[e^{is}, 0], [0, -e^{is}]] circles the origin; the principal root
    // of (E1 - E2)^2 jumps once, so the raw closed form swaps labels there.
    std::vector<Eigen::MatrixXcd> path;
    const int n = 200;
    for (int p = 0; p <= n; ++p) {
        const double s = 0.1 + 2.0 * std::numbers::pi * 0.8 * p / n;
        Eigen::MatrixXcd E(2, 2);
        E << std::polar(1.0, s), 0.3, 0.3, -std::polar(1.0, s);
        path.push_back(E);
    }
    const auto tracked = track_eigenvalues(path);
    const auto closed = track_closed_form_2x2(path);
    REQUIRE(tracked.size() == path.size());
    REQUIRE(closed.size() == path.size());
    double max_jump_t = 0.0, max_jump_c = 0.0, max_raw_jump = 0.0;
    for (std::size_t p = 1; p < path.size(); ++p) {
        max_jump_t = std::max(max_jump_t, std::abs(tracked[p][0] - tracked[p - 1][0]));
        max_jump_c = std::max(max_jump_c, std::abs(closed[p].first - closed[p - 1].first));
        const auto r0 = closed_form_eigenvalues_2x2(path[p - 1]);
        const auto r1 = closed_form_eigenvalues_2x2(path[p]);
        max_raw_jump = std::max(max_raw_jump, std::abs(r1.first - r0.first));
    }
    CHECK(max_raw_jump > 1.0);
    CHECK(max_jump_t < 0.1);
    CHECK(max_jump_c < 0.1);
    // Both trackers agree on the labelling.
    for (std::size_t p = 0; p < path.size(); ++p)
        CHECK(std::abs(tracked[p][0] - closed[p].first) < 1e-10);
}

TEST_CASE("near an exceptional point weights diverge but their difference stays finite") {
    // Symmetric E with (E11 - E22)^2 + 4 E12^2 -> 0.
    auto scheme_at = [](double eps) {
        LevelScheme s;
        s.E.resize(2, 2);
        s.E << cplx(0.0, 2.0 + 2.0 * (1.0 + eps)), 1.0, 1.0, cplx(0.0, 2.0);
        s.rabi = Eigen::VectorXcd::Ones(2);
        s.out_refl = Eigen::VectorXcd::Ones(2);
        s.out_trans = Eigen::VectorXcd::Ones(2);
        s.r_el = 0.0;
        s.t_el = 1.0;
        s.depths = {1.0, 2.0};
        s.layer_indices = {1, 3};
        return s;
    };
    const auto far = eigen_decompose(scheme_at(1e-2));
    const auto near = eigen_decompose(scheme_at(1e-8));
    CHECK(near.condition_number > far.condition_number * 100);
    CHECK(std::abs(near.weights_r(0)) > 100 * std::abs(far.weights_r(0)));
    const auto w = scaled_weights(near);
    CHECK(std::isfinite(w(0) - w(1)));
    // The spectrum itself is smooth through the exceptional point.
    CHECK(std::abs(near.reflectance(0.3) - direct_r(scheme_at(1e-8), 0.3)) < 1e-5);
}

TEST_CASE("time-domain oracle matches the frequency-domain amplitudes") {
    const auto s = scheme_a();
    std::vector<double> det;
    for (int i = -20; i <= 20; ++i) det.push_back(2.5 * i);
    const Eigen::MatrixXcd td = time_domain_spectrum(s, det);
    const auto n = static_cast<Eigen::Index>(s.size());
    for (std::size_t i = 0; i < det.size(); ++i) {
        const Eigen::MatrixXcd Mt =
            cplx(0, 1) * (Eigen::MatrixXcd::Identity(n, n) * cplx(det[i], 0.5) + s.E);
        const Eigen::VectorXcd fd = -Mt.fullPivLu().solve(s.rabi);
        const Eigen::VectorXcd col = td.col(static_cast<Eigen::Index>(i));
        CHECK((col - fd).norm() / fd.norm() < 1e-6);
    }
}

TEST_CASE("time-domain amplitudes decay as the eigenmodes") {
    const auto s = scheme_a();
    const auto d = eigen_decompose(s);
    const std::vector<double> t = {0.0, 0.5, 1.0, 2.0};
    const auto res = time_domain_oracle(s, t);
    REQUIRE(res.amplitudes.cols() == 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
        const double tt = t[static_cast<std::size_t>(j)];
        Eigen::VectorXcd expected = Eigen::VectorXcd::Zero(2);
        const Eigen::VectorXcd c = d.S_inv * s.rabi;
        for (Eigen::Index l = 0; l < 2; ++l)
            expected += d.S.col(l) * c(l) *
                        std::exp((cplx(-0.5, 0) + cplx(0, 1) * d.eigenvalues(l)) * tt);
        CHECK((res.amplitudes.col(j) - expected).norm() < 1e-9);
    }
}

TEST_CASE("susceptibility normalisation and validation") {
    const auto s = derive_level_scheme(eit_cavity(), IncidenceGeometry::at_mrad(2.28), two_layer());
    const auto g = FrequencyGrid::linspace(-40, 40, 2001);
    const auto chi = susceptibility(s, g, 1);
    double mx = -1.0;
    for (const auto& c : chi) mx = std::max(mx, c.imag());
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(susceptibility(s, g, 2), DomainError);
}

TEST_CASE("scaled weights") {
    const auto d = eigen_decompose(scheme_a());
    const auto w = scaled_weights(d);
    for (Eigen::Index l = 0; l < 2; ++l)
        CHECK(w(l) == doctest::Approx(std::abs(d.weights_r(l)) / (d.eigenvalues(l).imag() + 0.5)));
}

TEST_CASE("reflectance derivative matches finite differences") {
    const auto d = eigen_decompose(scheme_a());
    for (double x : {-5.0, 0.0, 0.7, 3.0}) {
        const double h = 1e-5;
        const cplx fd = (d.reflectance(x + h) - d.reflectance(x - h)) / (2 * h);
        CHECK(std::abs(d.reflectance_derivative(x) - fd) < 1e-6);
    }
}
