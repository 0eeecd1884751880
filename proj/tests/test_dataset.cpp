#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/dataset.hpp"
#include "core/rng.hpp"

using namespace vicloud;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("load_csv parses a binary dataset and detects the kind") {
    const auto path = write_temp("vicloud_t1.csv", "x1,x2,y\n0,1,1\n1,1,-1\n0,0,1\n");
    const Dataset d = load_csv(path, "y");
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.kind == DataKind::binary_pm1);
    CHECK(d.names == std::vector<std::string>{"x1", "x2"});
    CHECK(d.outcome[1] == -1.0);
    CHECK(d.features(1, 0) == 1.0);
}

TEST_CASE("load_csv error paths") {
    const auto path = write_temp("vicloud_t2.csv", "x1,x2,y\n0,1,1\n1,1,-1\n0,0,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "z"), doctest::Contains("not found"), Error);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "y"), Error);

    const auto bad = write_temp("vicloud_t3.csv", "x1,y\n1,1\nabc,2\n3,3\n");
    try {
        load_csv(bad, "y");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }

    const auto dup = write_temp("vicloud_t4.csv", "x1,x1,y\n1,2,3\n4,5,6\n");
    CHECK_THROWS_WITH_AS(load_csv(dup, "y"), doctest::Contains("duplicate"), Error);

    const auto tiny = write_temp("vicloud_t5.csv", "x1,y\n1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(tiny, "y"), doctest::Contains("at least 2"), Error);
}

TEST_CASE("all-zero column stays continuous unless forced") {
    const auto path = write_temp("vicloud_t6.csv", "x1,x2,y\n0,1,1\n0,0,-1\n0,1,1\n");
    CHECK(load_csv(path, "y").kind == DataKind::continuous);
    CHECK(load_csv(path, "y", true).kind == DataKind::binary_pm1);
}

TEST_CASE("normalize hits exact two-point symmetry and is idempotent") {
    Dataset d;
    d.features.resize(2, 1);
    d.features << 1.0, 3.0;
    d.outcome.resize(2);
    d.outcome << -2.0, 2.0;
    d.names = {"a"};

    const Dataset normalized = normalize(d);
    CHECK(normalized.features(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(normalized.features(1, 0) == doctest::Approx(1.0).epsilon(1e-14));

    const Dataset twice = normalize(normalized);
    CHECK((twice.features - normalized.features).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((twice.outcome - normalized.outcome).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize rejects constant columns by name") {
    Dataset d;
    d.features.resize(3, 1);
    d.features << 5.0, 5.0, 5.0;
    d.outcome.resize(3);
    d.outcome << 1.0, 2.0, 3.0;
    d.names = {"flat"};
    CHECK_THROWS_WITH_AS(normalize(d), doctest::Contains("flat"), Error);
}

TEST_CASE("covariance_of basic structure") {
    Dataset d;
    d.features.resize(4, 2);
    d.features << 1, 1, -1, -1, 1, 1, -1, -1;  // identical centered columns
    d.outcome.resize(4);
    d.outcome << 1, -1, 1, -1;
    d.names = {"a", "b"};
    const CovarianceStructure cov = covariance_of(d);
    CHECK(cov.sigma_xx(0, 1) == doctest::Approx(cov.sigma_xx(0, 0)));
    CHECK(cov.means_removed);

    Dataset orth;
    orth.features.resize(4, 2);
    orth.features << 1, 1, 1, -1, -1, 1, -1, -1;  // orthogonal centered columns
    orth.outcome = d.outcome;
    orth.names = {"a", "b"};
    CHECK(covariance_of(orth).sigma_xx(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("covariance of generated data approaches the target moments") {
    Matrix corr = Matrix::Identity(2, 2);
    Vector corr_xy(2);
    corr_xy << 0.4, 0.5;
    const Dataset d = gen_gaussian(corr, corr_xy, 1000, 7);
    const CovarianceStructure cov = covariance_of(d);
    CHECK(std::abs(cov.sigma_xy[0] - 0.4) < 0.1);
    CHECK(std::abs(cov.sigma_xy[1] - 0.5) < 0.1);
}

TEST_CASE("gen_gaussian determinism and moment convergence rate") {
    Matrix corr = Matrix::Identity(2, 2);
    corr(0, 1) = corr(1, 0) = 0.2;
    Vector corr_xy(2);
    corr_xy << 0.4, 0.5;

    const Dataset a = gen_gaussian(corr, corr_xy, 500, 123);
    const Dataset b = gen_gaussian(corr, corr_xy, 500, 123);
    CHECK(a.features == b.features);
    CHECK(a.outcome == b.outcome);

    auto max_moment_error = [&](Eigen::Index n) {
        const Dataset d = normalize(gen_gaussian(corr, corr_xy, n, 13));
        const CovarianceStructure cov = covariance_of(d);
        double err = std::abs(cov.sigma_xx(0, 1) - 0.2);
        err = std::max(err, std::abs(cov.sigma_xy[0] - 0.4));
        err = std::max(err, std::abs(cov.sigma_xy[1] - 0.5));
        return err;
    };
    const double coarse = max_moment_error(100);
    const double fine = max_moment_error(10000);
    CHECK(fine * 5.0 <= coarse);  // ~n^{-1/2} contraction at 100x the data
}

TEST_CASE("gen_gaussian rejects an infeasible correlation structure") {
    Matrix corr = Matrix::Identity(2, 2);
    Vector corr_xy(2);
    corr_xy << 0.9, 0.9;  // 1 - 0.81 - 0.81 < 0
    CHECK_THROWS_WITH_AS(gen_gaussian(corr, corr_xy, 100, 1),
                         doctest::Contains("not positive definite"), Error);
}

TEST_CASE("gen_binary reproduces the requested counts exactly") {
    const std::map<std::string, std::pair<long, long>> cells = {{"00", {3, 1}},
                                                                {"01", {2, 5}}};
    const Dataset d = gen_binary(cells, 42);
    CHECK(d.n() == 11);
    CHECK(d.kind == DataKind::binary_pm1);

    std::map<std::string, std::pair<long, long>> recount;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        std::string pattern;
        for (Eigen::Index j = 0; j < d.p(); ++j)
            pattern += d.features(i, j) == 1.0 ? '1' : '0';
        if (d.outcome[i] > 0)
            ++recount[pattern].first;
        else
            ++recount[pattern].second;
    }
    CHECK(recount.at("00") == std::make_pair(3L, 1L));
    CHECK(recount.at("01") == std::make_pair(2L, 5L));

    const Dataset single = gen_binary({{"0", {1, 0}}}, 1);
    CHECK(single.n() == 1);
    CHECK(single.features(0, 0) == 0.0);
    CHECK(single.outcome[0] == 1.0);

    CHECK_THROWS_WITH_AS(gen_binary({{"0", {0, 0}}}, 1), doctest::Contains("zero"), Error);
}
