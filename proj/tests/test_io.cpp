#include <doctest.h>

#include "lipkernel/dataset.hpp"
#include "lipkernel/model_io.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <fstream>

using namespace lipkernel;

TEST_CASE("csv examples") {
    Dataset a = parse_csv("1,0.0\n-1,1.0\n");
    CHECK(a.size() == 2);
    CHECK(a.dim() == 1);
    CHECK(a.labels == std::vector<int>{1, -1});
    CHECK(a.binary());

    Dataset b = parse_csv("label,x1\n1,0.0\n-1,1.0\n");
    CHECK(b.size() == 2);
    CHECK(b.labels == a.labels);

    try {
        parse_csv("1,0.0,2.0\n-1,1.0\n", "data.csv");
        FAIL("ragged row accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("data.csv:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_csv("label,x\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("1,abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("1.5,0\n"), ConfigError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), ConfigError);
}

TEST_CASE("csv normalisation") {
    Dataset ds = parse_csv("0,10,5\n1,20,5\n2,15,5\n");
    CHECK_FALSE(ds.binary());
    CHECK(ds.num_classes() == 3);
    CHECK(ds.X(0, 0) == 0.0);
    CHECK(ds.X(1, 0) == 1.0);
    CHECK(ds.X(2, 0) == 0.5);
    CHECK(ds.X.col(1).isZero());
    CHECK(ds.feature_min[0] == 10.0);
    CHECK(ds.feature_max[0] == 20.0);
    Points raw(1, 2);
    raw << 25, 5;
    CHECK(normalise(raw, ds.feature_min, ds.feature_max)(0, 0) == 1.0);
    // round trip through the writer
    Dataset again = parse_csv(to_csv(ds));
    CHECK(again.labels == ds.labels);
    CHECK((again.X - ds.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthetic data") {
    for (auto kind : {SyntheticKind::Blobs, SyntheticKind::TwoMoons}) {
        const Dataset a = gen_synthetic(kind, 50, 2, 2, 7);
        const Dataset b = gen_synthetic(kind, 50, 2, 2, 7);
        CHECK(a.size() == 100);
        CHECK(a.X == b.X);
        CHECK(a.labels == b.labels);
        CHECK(a.X.minCoeff() >= 0.0);
        CHECK(a.X.maxCoeff() <= 1.0);
        CHECK(a.binary());
        CHECK(gen_synthetic(kind, 50, 2, 2, 8).X != a.X);
    }
    const Dataset m = gen_synthetic(SyntheticKind::Blobs, 10, 4, 3, 1);
    CHECK(m.num_classes() == 4);
    CHECK(m.size() == 40);
    CHECK_THROWS_AS(gen_synthetic(SyntheticKind::TwoMoons, 5, 3, 2, 1), ConfigError);
    CHECK_THROWS_AS(gen_synthetic(SyntheticKind::Blobs, 0, 2, 2, 1), ConfigError);
}

TEST_CASE("model round trip") {
    Rng rng(2);
    for (int C : {1, 3}) {
        SavedModel m;
        m.binary = C == 1;
        Points A = oracle::uniform_points(rng, 7, 3, 0, 1);
        for (int c = 0; c < C; ++c) {
            Model f;
            f.kernel = KernelSpec::gaussian(0.37, 3);
            f.anchors = A;
            f.coeffs = oracle::uniform_vector(rng, 7, -1e3, 1e3);
            f.mean_scale = false;
            m.models.push_back(f);
        }
        m.feature_min = Vector{{-1.0, 0.0, 3.0}};
        m.feature_max = Vector{{1.0, 2.0, 3.5}};
        const std::string path = "roundtrip_model_" + std::to_string(C) + ".txt";
        save_model(m, path);
        SavedModel back = load_model(path);
        std::remove(path.c_str());
        CHECK(back.binary == m.binary);
        CHECK(back.feature_min == m.feature_min);
        REQUIRE(back.models.size() == m.models.size());
        const Points probe = oracle::uniform_points(rng, 50, 3, 0, 1);
        for (size_t c = 0; c < m.models.size(); ++c) {
            CHECK(back.models[c].coeffs == m.models[c].coeffs);
            CHECK(back.models[c].anchors == m.models[c].anchors);
            for (Index i = 0; i < probe.rows(); ++i)
                CHECK(std::abs(back.models[c].value(probe.row(i).transpose()) -
                               m.models[c].value(probe.row(i).transpose())) <= 1e-12);
        }
    }
    SavedModel p;
    Model f;
    f.kernel = KernelSpec::periodic(2.5, 0.8, 1);
    f.anchors = Points::Constant(2, 1, 0.3);
    f.coeffs = Vector{{1.0, -2.0}};
    p.models = {f};
    p.feature_min = Vector::Zero(1);
    p.feature_max = Vector::Ones(1);
    SavedModel q = model_from_text(model_to_text(p));
    CHECK(q.models[0].kernel.base.period == 2.5);
    CHECK(q.models[0].mean_scale);
}

TEST_CASE("model file errors") {
    CHECK_THROWS_AS(model_from_text("not a model\n"), ConfigError);
    CHECK_THROWS_AS(model_from_text("lipkernel-model v1\ntype binary\nclasses 2\n"), ConfigError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), ConfigError);
    SavedModel empty;
    CHECK_THROWS_AS(model_to_text(empty), ConfigError);
}
