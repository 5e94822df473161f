#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "metagym/merge.hpp"
#include "metagym/rng.hpp"
#include "test_support.hpp"

using namespace metagym;

namespace {

ParameterMap make_map(std::uint64_t seed, const std::vector<std::string>& names,
                      std::size_t numel) {
    Rng rng(seed);
    ParameterMap m;
    for (const std::string& name : names) {
        TensorData t;
        t.shape = {static_cast<std::int64_t>(numel)};
        for (std::size_t i = 0; i < numel; ++i)
            t.data.push_back(static_cast<float>(rng.unit_real() * 4.0 - 2.0));
        m.add(name, std::move(t));
    }
    return m;
}

// units-in-last-place distance between two floats of the same sign
std::int64_t ulp_distance(float a, float b) {
    std::int32_t ia, ib;
    std::memcpy(&ia, &a, 4);
    std::memcpy(&ib, &b, 4);
    return std::abs(static_cast<std::int64_t>(ia) - static_cast<std::int64_t>(ib));
}

} // namespace

TEST_CASE("merge: identity weights reproduce the map bit-exactly") {
    ParameterMap a = make_map(1, {"w", "b"}, 40);
    ParameterMap b = make_map(2, {"w", "b"}, 40);
    ParameterMap c = make_map(3, {"w", "b"}, 40);
    ParameterMap merged = merge_parameters(a, b, c, {1.0, 0.0, 0.0});
    for (const std::string& name : a.names()) {
        REQUIRE(merged.find(name) != nullptr);
        CHECK(merged.find(name)->data == a.find(name)->data);
    }
}

TEST_CASE("merge: the worked three-map example with the default weights") {
    ParameterMap d, i, a;
    d.add("w", {{2}, {1.0f, 0.0f}});
    i.add("w", {{2}, {0.0f, 1.0f}});
    a.add("w", {{2}, {2.0f, 2.0f}});
    ParameterMap merged = merge_parameters(d, i, a, {1.0, 0.2, 0.1});
    CHECK(merged.find("w")->data == std::vector<float>{1.2f, 0.4f});
}

TEST_CASE("merge: linearity within one ulp") {
    ParameterMap m1 = make_map(10, {"w"}, 64);
    ParameterMap m2 = make_map(11, {"w"}, 64);
    ParameterMap m3 = make_map(12, {"w"}, 64);
    const double alpha = 3.0;
    ParameterMap base = merge_parameters(m1, m2, m3, {1.0, 0.2, 0.1});
    ParameterMap scaled = merge_parameters(m1, m2, m3, {alpha * 1.0, alpha * 0.2, alpha * 0.1});
    for (std::size_t k = 0; k < 64; ++k) {
        float expect = static_cast<float>(alpha * static_cast<double>(base.find("w")->data[k]));
        CHECK(ulp_distance(scaled.find("w")->data[k], expect) <= 1);
    }
}

TEST_CASE("merge: permutation symmetry within one ulp") {
    ParameterMap m1 = make_map(20, {"w"}, 64);
    ParameterMap m2 = make_map(21, {"w"}, 64);
    ParameterMap m3 = make_map(22, {"w"}, 64);
    ParameterMap ab = merge_parameters(m1, m2, m3, {0.5, 0.3, 0.2});
    ParameterMap ba = merge_parameters(m3, m1, m2, {0.2, 0.5, 0.3});
    for (std::size_t k = 0; k < 64; ++k)
        CHECK(ulp_distance(ab.find("w")->data[k], ba.find("w")->data[k]) <= 1);
}

TEST_CASE("merge: key and shape mismatches are named") {
    ParameterMap a, b, c;
    a.add("w", {{1}, {1.0f}});
    b.add("v", {{1}, {1.0f}});
    c.add("w", {{1}, {1.0f}});
    try {
        merge_parameters(a, b, c, {1, 1, 1});
        FAIL("expected key mismatch");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("'w'") != std::string::npos);
        CHECK(msg.find("'v'") != std::string::npos);
    }

    ParameterMap d, e2, f;
    d.add("w", {{2}, {1.0f, 2.0f}});
    e2.add("w", {{2}, {1.0f, 2.0f}});
    f.add("w", {{1, 2}, {1.0f, 2.0f}});
    try {
        merge_parameters(d, e2, f, {1, 1, 1});
        FAIL("expected shape mismatch");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("'w'") != std::string::npos);
    }
}

TEST_CASE("merge: generalized N-map form") {
    ParameterMap m1, m2;
    m1.add("w", {{1}, {2.0f}});
    m2.add("w", {{1}, {4.0f}});
    const ParameterMap* maps[] = {&m1, &m2};
    const double weights[] = {0.5, 0.25};
    ParameterMap merged = merge_parameters(maps, weights);
    CHECK(merged.find("w")->data == std::vector<float>{2.0f});
    CHECK_THROWS_AS(merge_parameters(std::span<const ParameterMap* const>{},
                                     std::span<const double>{}),
                    std::invalid_argument);
}

TEST_CASE("safetensors: save/load round trip preserves bits and order") {
    testsupport::TempDir dir("safetensors");
    ParameterMap m;
    m.add("z_last", {{2, 2}, {1.5f, -2.25f, 0.0f, 1e-30f}});
    m.add("a_first", {{3}, {-0.0f, 3.0f, 42.0f}});
    auto path = dir.path / "roundtrip.safetensors";
    save_safetensors(m, path);
    ParameterMap back = load_safetensors(path);

    REQUIRE(back.size() == 2);
    CHECK(back.names()[0] == "z_last"); // insertion order preserved
    CHECK(back.names()[1] == "a_first");
    for (const std::string& name : m.names()) {
        CHECK(back.find(name)->shape == m.find(name)->shape);
        CHECK(back.find(name)->data == m.find(name)->data);
    }
}

TEST_CASE("safetensors: non-F32 dtypes are rejected, not coerced") {
    testsupport::TempDir dir("badtype");
    auto path = dir.path / "f16.safetensors";
    std::string header = R"({"w":{"dtype":"F16","shape":[2],"data_offsets":[0,4]}})";
    while (header.size() % 8 != 0) header += ' ';
    std::ofstream out(path, std::ios::binary);
    std::uint64_t len = header.size();
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>(len >> (8 * i)));
    out << header;
    out.write("\0\0\0\0", 4);
    out.close();
    CHECK_THROWS_WITH_AS(load_safetensors(path),
                         doctest::Contains("F32"), std::runtime_error);
}

TEST_CASE("parameter map: duplicate names and bad shapes rejected") {
    ParameterMap m;
    m.add("w", {{1}, {1.0f}});
    CHECK_THROWS_AS(m.add("w", {{1}, {2.0f}}), std::invalid_argument);
    CHECK_THROWS_AS(m.add("bad", {{2}, {1.0f}}), std::invalid_argument);
}
