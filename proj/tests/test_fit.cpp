#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cbr/fit.hpp"
#include "cbr/report.hpp"
#include "test_support.hpp"

using namespace cbr;
using Catch::Approx;
using cbr_test::make_surface;

namespace {

const std::vector<SentenceType> kSR{SentenceType::SR};

AccuracySurface three_point_surface() {
    // p1 -> 0.60, p2 -> 0.75, p3 -> 0.90
    return make_surface({{0.2, 0.05, 0.15}, {0.5, 0.05, 0.15}, {0.8, 0.05, 0.15}}, kSR,
                        {0.60, 0.75, 0.90}, 20);
}

}  // namespace

TEST_CASE("fit_participant minimizes absolute accuracy distance") {
    const auto surface = three_point_surface();

    SECTION("unique argmin") {
        const auto fit = fit_participant(0.80, surface, SentenceType::SR);
        REQUIRE(fit.tie_set.size() == 1);
        CHECK(fit.tie_set[0] == ParameterPoint{0.5, 0.05, 0.15});
        CHECK(fit.residual == Approx(0.05).margin(1e-9));
        CHECK(fit.fitted == fit.tie_set[0]);
    }
    SECTION("equidistant tie averages componentwise") {
        const auto fit = fit_participant(0.825, surface, SentenceType::SR);
        REQUIRE(fit.tie_set.size() == 2);
        CHECK(fit.tie_set[0] == ParameterPoint{0.5, 0.05, 0.15});
        CHECK(fit.tie_set[1] == ParameterPoint{0.8, 0.05, 0.15});
        CHECK(fit.fitted.ga == Approx(0.65).margin(1e-12));
        CHECK(fit.fitted.dat == Approx(0.05).margin(1e-12));
        CHECK(fit.fitted.ans == Approx(0.15).margin(1e-12));
        CHECK(fit.residual == Approx(0.075).margin(1e-9));
    }
    SECTION("exact observation lands at residual zero") {
        const auto fit = fit_participant(0.75, surface, SentenceType::SR);
        CHECK(fit.residual == 0.0);
        CHECK(std::find(fit.tie_set.begin(), fit.tie_set.end(), ParameterPoint{0.5, 0.05, 0.15}) !=
              fit.tie_set.end());
    }
    SECTION("missing sentence type is a usage error") {
        CHECK_THROWS_AS(fit_participant(0.8, surface, SentenceType::OR), usage_error);
    }
    SECTION("observed accuracy outside [0,1] is rejected") {
        CHECK_THROWS_AS(fit_participant(1.2, surface, SentenceType::SR), usage_error);
    }
}

TEST_CASE("fit tie sets match an exhaustive scan on random surfaces") {
    RandomStream gen(404);
    for (int round = 0; round < 120; ++round) {
        const int n_cells = 2 + static_cast<int>(gen.uniform_index(49));
        std::vector<ParameterPoint> grid;
        std::vector<double> accs;
        const long n_iter = 20;
        for (int i = 0; i < n_cells; ++i) {
            grid.push_back(ParameterPoint{0.1 + 0.01 * i, 0.05, 0.15});
            accs.push_back(static_cast<double>(gen.uniform_index(n_iter + 1)) /
                           static_cast<double>(n_iter));
        }
        const auto surface = make_surface(grid, kSR, accs, n_iter);
        const double observed = static_cast<double>(gen.uniform_index(21)) / 20.0;

        const auto fit = fit_participant(observed, surface, SentenceType::SR);

        // independent route: compute all distances, then collect all minima
        std::vector<double> dists;
        for (const auto& c : surface.cells)
            dists.push_back(round_distance(std::abs(c.accuracy - observed)));
        const double min_d = *std::min_element(dists.begin(), dists.end());
        std::vector<ParameterPoint> expected;
        for (size_t i = 0; i < dists.size(); ++i)
            if (dists[i] == min_d) expected.push_back(surface.cells[i].point);

        CHECK(fit.residual == min_d);
        REQUIRE(fit.tie_set.size() == expected.size());
        for (size_t i = 0; i < expected.size(); ++i) CHECK(fit.tie_set[i] == expected[i]);

        // tie-mean containment, per component
        auto minmax = [&](auto proj) {
            double lo = 1e300, hi = -1e300;
            for (const auto& p : fit.tie_set) {
                lo = std::min(lo, proj(p));
                hi = std::max(hi, proj(p));
            }
            return std::pair{lo, hi};
        };
        const auto [glo, ghi] = minmax([](const ParameterPoint& p) { return p.ga; });
        CHECK(fit.fitted.ga >= glo - 1e-12);
        CHECK(fit.fitted.ga <= ghi + 1e-12);
    }
}

TEST_CASE("non-default flags compare against tolerances") {
    const FlagEps eps;  // 0.05 / 0.005 / 0.025
    SECTION("defaults are unflagged") {
        const auto f = flag_non_default({1.0, 0.05, 0.15}, kDefaultPoint, eps);
        CHECK_FALSE(f.ga);
        CHECK_FALSE(f.dat);
        CHECK_FALSE(f.ans);
    }
    SECTION("GA and ANS off-default") {
        const auto f = flag_non_default({0.65, 0.05, 0.30}, kDefaultPoint, eps);
        CHECK(f.ga);
        CHECK_FALSE(f.dat);
        CHECK(f.ans);
    }
    SECTION("DAT off-default") {
        const auto f = flag_non_default({1.0, 0.08, 0.15}, kDefaultPoint, eps);
        CHECK_FALSE(f.ga);
        CHECK(f.dat);
        CHECK_FALSE(f.ans);
    }
    SECTION("tie-averaged values inside half a grid step stay default") {
        const auto f = flag_non_default({1.05, 0.0525, 0.1625}, kDefaultPoint, eps);
        CHECK_FALSE(f.ga);
        CHECK_FALSE(f.dat);
        CHECK_FALSE(f.ans);
    }
}

TEST_CASE("non-default tabulation counts singles and conjunctions") {
    auto fit_with = [](const std::string& id, const std::string& group, SentenceType t, bool ga,
                       bool dat, bool ans) {
        FitResult f;
        f.participant = id;
        f.group = group;
        f.type = t;
        f.tie_set = {kDefaultPoint};
        f.fitted = kDefaultPoint;
        f.flags = NonDefaultFlags{ga, dat, ans};
        return f;
    };

    SECTION("all-default fits count zero everywhere") {
        std::vector<FitResult> fits{fit_with("a", "control", SentenceType::SR, false, false, false),
                                    fit_with("b", "IWA", SentenceType::SR, false, false, false)};
        const auto table = tabulate_non_default(fits);
        for (const auto& [key, c] : table) {
            CHECK(c.ga == 0);
            CHECK(c.dat == 0);
            CHECK(c.ans == 0);
            CHECK(c.ga_dat_ans == 0);
        }
    }
    SECTION("one participant flagged on GA and ANS") {
        std::vector<FitResult> fits{fit_with("a", "IWA", SentenceType::SR, true, false, true)};
        const auto table = tabulate_non_default(fits);
        const auto& c = table.at({SentenceType::SR, "IWA"});
        CHECK(c.ga == 1);
        CHECK(c.dat == 0);
        CHECK(c.ans == 1);
        CHECK(c.ga_ans == 1);
        CHECK(c.ga_dat == 0);
        CHECK(c.dat_ans == 0);
        CHECK(c.ga_dat_ans == 0);
    }
    SECTION("conjunction dominance over random fit collections") {
        RandomStream gen(13);
        std::vector<FitResult> fits;
        for (int i = 0; i < 300; ++i)
            fits.push_back(fit_with("p" + std::to_string(i),
                                    gen.uniform01() < 0.5 ? "control" : "IWA",
                                    gen.uniform01() < 0.5 ? SentenceType::SR : SentenceType::OR,
                                    gen.uniform01() < 0.5, gen.uniform01() < 0.5,
                                    gen.uniform01() < 0.5));
        for (const auto& [key, c] : tabulate_non_default(fits)) {
            CHECK(c.ga_dat <= std::min(c.ga, c.dat));
            CHECK(c.ga_ans <= std::min(c.ga, c.ans));
            CHECK(c.dat_ans <= std::min(c.dat, c.ans));
            CHECK(c.ga_dat_ans <= std::min({c.ga_dat, c.ga_ans, c.dat_ans}));
        }
    }
}

TEST_CASE("non-default table renders the published row/column scheme") {
    FitResult f;
    f.participant = "p";
    f.group = "IWA";
    f.type = SentenceType::OR;
    f.tie_set = {kDefaultPoint};
    f.fitted = kDefaultPoint;
    f.flags = NonDefaultFlags{true, false, true};
    FitResult g = f;
    g.group = "control";
    g.type = SentenceType::SR;
    g.flags = NonDefaultFlags{false, false, false};
    const auto table = tabulate_non_default({f, g});

    const std::string text = render_non_default_table(table);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    for (const char* col : {"GA", "DAT", "ANS", "GA&DAT", "GA&ANS", "DAT&ANS", "GA&DAT&ANS"})
        CHECK(header.find(col) != std::string::npos);
    CHECK(text.find("SR") != std::string::npos);
    CHECK(text.find("OR") != std::string::npos);
    CHECK(text.find("control") != std::string::npos);
    CHECK(text.find("IWA") != std::string::npos);

    const std::string csv = non_default_to_csv(table);
    CHECK(csv.starts_with("sentence_type,group,n,ga,dat,ans,ga_dat,ga_ans,dat_ans,ga_dat_ans"));
}

TEST_CASE("accuracy-level recovery from surface cells") {
    // Observed accuracy equal to a cell's accuracy must fit with residual 0
    // and that cell in the tie set. (Recovering the generating point itself
    // is not guaranteed: the accuracy map is many-to-one.)
    GridSpec spec;
    spec.ga = {0.2, 1.1, 0.3};
    spec.dat = {0.05, 0.09, 0.04};
    spec.ans = {0.15, 0.45, 0.15};
    const auto grid = build_grid(spec);
    RandomStream gen(21);
    std::vector<double> accs;
    for (size_t i = 0; i < grid.size(); ++i)
        accs.push_back(static_cast<double>(gen.uniform_index(1001)) / 1000.0);
    const auto surface = make_surface(grid, kSR, accs, 1000);

    for (size_t i = 0; i < grid.size(); ++i) {
        const auto* cell = surface.find_cell(grid[i], SentenceType::SR);
        REQUIRE(cell != nullptr);
        const auto fit = fit_participant(cell->accuracy, surface, SentenceType::SR);
        CHECK(fit.residual == 0.0);
        CHECK(std::find(fit.tie_set.begin(), fit.tie_set.end(), grid[i]) != fit.tie_set.end());
    }
}

TEST_CASE("fit results CSV round-trips") {
    const auto surface = three_point_surface();
    Dataset ds;
    ds.participants = {
        ParticipantRecord{"p1", "control", {{SentenceType::SR, {20, 16}}}},
        ParticipantRecord{"p2", "IWA", {{SentenceType::SR, {20, 12}}}},
    };
    const auto fits = fit_dataset(ds, surface, kSR);
    const std::string csv = fits_to_csv(fits);
    CHECK(csv.starts_with(kFitsHeader));

    const auto path = std::filesystem::temp_directory_path() / "cbr_fits_roundtrip.csv";
    atomic_write_file(path, csv);
    const auto loaded = load_fits(path);
    REQUIRE(loaded.size() == fits.size());
    for (size_t i = 0; i < fits.size(); ++i) {
        CHECK(loaded[i].participant == fits[i].participant);
        CHECK(loaded[i].fitted == fits[i].fitted);
        CHECK(loaded[i].residual == fits[i].residual);
        CHECK(loaded[i].tie_set.size() == fits[i].tie_set.size());
        CHECK(loaded[i].flags.ga == fits[i].flags.ga);
    }
    std::filesystem::remove(path);
}
