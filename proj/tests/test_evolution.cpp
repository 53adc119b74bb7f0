#include <doctest.h>
#include <wavetail/evolution.hpp>

#include <cmath>
#include <memory>

using namespace wt;

namespace {
struct World {
    std::shared_ptr<const Background> bg;
    std::shared_ptr<const Foliation> fol;
    explicit World(const std::string& preset)
        : bg(std::make_shared<const Background>(Background::make(preset, preset == "minkowski" ? 0.0 : 0.05, 2.0))),
          fol(std::make_shared<const Foliation>(Foliation::make(bg, 0.5, 1.0))) {}
};
} // namespace

// The reference field solves the wave equation with the known closed-form
// source, so one right-hand-side evaluation must reproduce its second time
// derivative to stencil accuracy.
TEST_CASE("rhs reproduces the exact reference field dynamics") {
    for (const char* preset : {"minkowski", "default-perturbed"}) {
        World w(preset);
        auto grid = RadialGrid::make(*w.fol, 40.0, 2048, Stretch::Uniform);
        double tau = 3.0;
        ModeState st;
        st.m = 0;
        st.tau = tau;
        st.phi = GridFunction(grid.J(), Parity::Even);
        st.pi = GridFunction(grid.J(), Parity::Even);
        GridFunction want(grid.J(), Parity::Even);
        for (int j = 0; j < grid.J(); ++j) {
            double r = grid.r(j);
            auto mf = w.bg->mink_fields(w.fol->t_of(tau, r), r);
            st.phi[j] = mf.phi;
            st.pi[j] = 2.0 * mf.Tphi;
            want[j] = 4.0 * mf.T2phi;
        }
        SourceSpec src;
        src.kind = SourceSpec::Kind::Custom;
        src.amplitude = 1.0;
        auto bgp = w.bg;
        auto folp = w.fol;
        src.custom = [bgp, folp](double tt, double r) {
            return bgp->mink_fields(folp->t_of(tt, r), r).box;
        };
        auto [dphi, dpi] = rhs(st, *w.bg, *w.fol, grid, src);
        for (int j = 0; j < grid.J(); ++j)
            CHECK(dphi[j] == doctest::Approx(st.pi[j]).epsilon(1e-15));
        // Terms divided by r are locally third order at the axis, and the
        // outermost two cells see the low-order extrapolation ghosts; both
        // bands are excluded from protected diagnostics, so they only need a
        // loose bound here.
        double eedge = 0.0, ebulk = 0.0;
        for (int j = 0; j < grid.J(); ++j) {
            double e = std::abs(dpi[j] - want[j]);
            bool edge = grid.r(j) < 10.0 || j >= grid.J() - 2;
            (edge ? eedge : ebulk) = std::max(edge ? eedge : ebulk, e);
        }
        CHECK(eedge < 1e-5);
        CHECK(ebulk < 5e-10);
    }
}

TEST_CASE("constant data is preserved over ten thousand steps") {
    World w("default-perturbed");
    EvolConfig cfg;
    cfg.J = 64;
    cfg.v_max = 0.0;
    cfg.tau_max = 120.0;
    cfg.cfl = 0.4;
    std::vector<ModeData> data(1);
    data[0].m = 0;
    data[0].phi = GridFunction(cfg.J, Parity::Even);
    data[0].Tphi = GridFunction(cfg.J, Parity::Even);
    for (int j = 0; j < cfg.J; ++j) data[0].phi[j] = 0.75;
    auto run = evolve(w.bg, w.fol, data, cfg, SourceSpec::none());
    CHECK(run.steps >= 10000);
    for (int j = 0; j < cfg.J; ++j) {
        CHECK(std::abs(run.mode(0).phi_final[j] - 0.75) < 1e-12);
        CHECK(std::abs(run.mode(0).pi_final[j]) < 1e-12);
    }
}

TEST_CASE("grid refinement converges at fourth order") {
    World w("default-perturbed");
    auto probe_at = [&](int J) {
        EvolConfig cfg;
        cfg.J = J;
        cfg.v_max = 50.0;
        cfg.tau_max = 8.0;
        cfg.sample_dtau = 4.0;
        cfg.probe_r = {4.0};
        cfg.probe_dtau = 1.0;
        DataParams p;
        auto grid = RadialGrid::make(*w.fol, w.fol->causal_outer_radius(cfg.tau_max, cfg.v_max), J, cfg.stretch);
        auto data = data_presets("gaussian-even", p, *w.bg, *w.fol, grid);
        auto run = evolve(w.bg, w.fol, data, cfg, SourceSpec::none());
        return run.mode(0).probes.phi[0].back();
    };
    double c = probe_at(512), m = probe_at(1024), f = probe_at(2048);
    double ratio = std::abs(c - m) / std::abs(m - f);
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
}

TEST_CASE("outer boundary placement is causally clean") {
    World w("minkowski");
    auto probe_run = [&](double Rmax, int J) {
        EvolConfig cfg;
        cfg.J = J;
        cfg.v_max = 30.0;
        cfg.Rmax_override = Rmax;
        cfg.stretch = Stretch::Uniform;
        cfg.tau_max = 10.0;
        cfg.sample_dtau = 5.0;
        cfg.probe_r = {5.0};
        cfg.probe_dtau = 0.5;
        auto grid = RadialGrid::make(*w.fol, Rmax, J, Stretch::Uniform);
        DataParams p;
        auto data = data_presets("gaussian-even", p, *w.bg, *w.fol, grid);
        auto run = evolve(w.bg, w.fol, data, cfg, SourceSpec::none());
        return run.mode(0).probes;
    };
    auto near = probe_run(40.0, 1024);
    auto far = probe_run(80.0, 2048);
    REQUIRE(near.tau.size() == far.tau.size());
    for (size_t k = 0; k < near.tau.size(); ++k)
        CHECK(std::abs(near.phi[0][k] - far.phi[0][k]) < 1e-10);
}

TEST_CASE("data presets sample their formulas exactly") {
    World w("default-perturbed");
    auto grid = RadialGrid::make(*w.fol, 30.0, 128, Stretch::Uniform);
    DataParams p;
    p.amplitude = 2.0;
    p.r_c = 6.0;
    p.sigma = 1.5;
    auto d1 = data_presets("gaussian-even", p, *w.bg, *w.fol, grid);
    REQUIRE(d1.size() == 1);
    CHECK(d1[0].m == 0);
    for (int j : {0, 17, 90}) {
        double r = grid.r(j);
        double want = 2.0 * (std::exp(-std::pow((r - 6.0) / 1.5, 2)) + std::exp(-std::pow((r + 6.0) / 1.5, 2)));
        CHECK(d1[0].phi[j] == doctest::Approx(want).epsilon(1e-15));
        CHECK(d1[0].Tphi[j] == 0.0);
    }

    p.m = 3;
    auto d2 = data_presets("gaussian-mode-m", p, *w.bg, *w.fol, grid);
    REQUIRE(d2.size() == 1);
    CHECK(d2[0].m == 3);
    CHECK(d2[0].phi.par == Parity::Odd);
    for (int j : {0, 40}) {
        double r = grid.r(j);
        CHECK(d2[0].phi[j] == doctest::Approx(2.0 * std::pow(r, 3) * std::exp(-r * r / 2.25)).epsilon(1e-14));
    }

    p.amplitude = 1.0;
    auto d3 = data_presets("mink-seed", p, *w.bg, *w.fol, grid);
    for (int j : {0, 64}) {
        double r = grid.r(j);
        auto mf = w.bg->mink_fields(w.fol->t_of(0.0, r), r);
        CHECK(d3[0].phi[j] == doctest::Approx(mf.phi).epsilon(1e-15));
        CHECK(d3[0].Tphi[j] == doctest::Approx(mf.Tphi).epsilon(1e-15));
    }

    p.T_param = 8.0;
    auto d4 = data_presets("plateau-cutoff", p, *w.bg, *w.fol, grid);
    for (int j : {0, 100}) {
        double r = grid.r(j);
        CHECK(d4[0].phi[j] == doctest::Approx(chi_cutoff(r / 16.0)).epsilon(1e-15));
    }
    CHECK(chi_cutoff(0.3) == 1.0);
    CHECK(chi_cutoff(2.3) == 0.0);

    CHECK_THROWS(data_presets("no-such-data", p, *w.bg, *w.fol, grid));
}

TEST_CASE("odd modes stay regular at the axis") {
    World w("default-perturbed");
    EvolConfig cfg;
    cfg.J = 256;
    cfg.v_max = 40.0;
    cfg.tau_max = 5.0;
    cfg.sample_dtau = 2.5;
    DataParams p;
    p.m = 1;
    p.sigma = 2.0;
    auto grid = RadialGrid::make(*w.fol, w.fol->causal_outer_radius(cfg.tau_max, cfg.v_max), cfg.J, cfg.stretch);
    auto data = data_presets("gaussian-mode-m", p, *w.bg, *w.fol, grid);
    auto run = evolve(w.bg, w.fol, data, cfg, SourceSpec::none());
    const auto& fin = run.mode(1).phi_final;
    CHECK(std::isfinite(fin[0]));
    CHECK(std::abs(fin[0]) < 0.5);
    double r0 = run.grid.r(0), r5 = run.grid.r(5);
    CHECK(std::abs(fin[0]) < 2.0 * std::abs(fin[5]) * r0 / r5 + 1e-8);
}

TEST_CASE("sampling cadence covers the run and keeps slices ordered") {
    World w("minkowski");
    EvolConfig cfg;
    cfg.J = 128;
    cfg.v_max = 30.0;
    cfg.tau_max = 6.0;
    cfg.sample_dtau = 1.0;
    cfg.probe_dtau = 0.25;
    DataParams p;
    auto grid = RadialGrid::make(*w.fol, w.fol->causal_outer_radius(cfg.tau_max, cfg.v_max), cfg.J, cfg.stretch);
    auto data = data_presets("gaussian-even", p, *w.bg, *w.fol, grid);
    auto run = evolve(w.bg, w.fol, data, cfg, SourceSpec::none());
    const auto& rec = run.mode(0).samples;
    REQUIRE(rec.size() >= 6);
    for (size_t k = 1; k < rec.size(); ++k) CHECK(rec[k].tau > rec[k - 1].tau);
    CHECK(rec.front().tau < 0.2);
    CHECK(rec.back().tau > 5.5);
    for (const auto& s : rec) {
        CHECK(s.phi.size() == static_cast<size_t>(cfg.J));
        CHECK(s.dpi.size() == static_cast<size_t>(cfg.J));
        CHECK(s.ddW1.size() == static_cast<size_t>(cfg.J));
    }
    const auto& pr = run.mode(0).probes;
    REQUIRE(pr.tau.size() >= 20);
    CHECK(pr.tau.back() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("instability is reported rather than silently propagated") {
    World w("minkowski");
    EvolConfig cfg;
    cfg.J = 256;
    cfg.v_max = 30.0;
    cfg.tau_max = 30.0;
    cfg.cfl = 4.0;
    DataParams p;
    auto grid = RadialGrid::make(*w.fol, w.fol->causal_outer_radius(cfg.tau_max, cfg.v_max), cfg.J, cfg.stretch);
    auto data = data_presets("gaussian-even", p, *w.bg, *w.fol, grid);
    CHECK_THROWS(evolve(w.bg, w.fol, data, cfg, SourceSpec::none()));
}
