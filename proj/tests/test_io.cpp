#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "priorfill/io.hpp"
#include "priorfill/random.hpp"

using namespace priorfill;
using nlohmann::json;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::OutOfBounds;
}

Bytes text_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

void append_float(Bytes& b, float v, bool big_endian) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) {
    const int shift = big_endian ? 24 - 8 * i : 8 * i;
    b.push_back(static_cast<std::uint8_t>(u >> shift));
  }
}

}  // namespace

TEST_CASE("pfm: 1x1 layout") {
  const auto bytes = write_pfm(Grid(1, 1, {2.5f}));
  const std::string header = "Pf\n1 1\n-1\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
  Bytes expect = text_bytes(header);
  append_float(expect, 2.5f, false);
  CHECK(bytes == expect);
  CHECK(read_pfm(bytes).at(0, 0) == 2.5f);
}

TEST_CASE("pfm: rows are stored bottom to top") {
  const auto bytes = write_pfm(Grid(2, 2, {1, 2, 3, 4}));
  Bytes expect = text_bytes("Pf\n2 2\n-1\n");
  for (float v : {3.0f, 4.0f, 1.0f, 2.0f}) append_float(expect, v, false);
  CHECK(bytes == expect);
}

TEST_CASE("pfm: round trip is bit exact") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(uniform_index(rng, 40));
    const int h = 1 + static_cast<int>(uniform_index(rng, 40));
    std::vector<float> v;
    for (int i = 0; i < w * h; ++i) {
      v.push_back(static_cast<float>(uniform(rng, -1e3, 1e3) * std::pow(10.0, uniform(rng, -6, 6))));
    }
    const Grid g(w, h, v);
    const auto back = read_pfm(write_pfm(g));
    REQUIRE(back.width() == w);
    REQUIRE(back.height() == h);
    CHECK(std::memcmp(back.values().data(), g.values().data(), v.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("pfm: big-endian and scaled headers") {
  Bytes be = text_bytes("Pf\n2 1\n1.0\n");
  append_float(be, 1.5f, true);
  append_float(be, -3.0f, true);
  const auto g = read_pfm(be);
  CHECK(g.at(0, 0) == 1.5f);
  CHECK(g.at(1, 0) == -3.0f);

  Bytes le = text_bytes("Pf\n1 1\n-0.5\n");
  append_float(le, 7.0f, false);
  CHECK(read_pfm(le).at(0, 0) == 7.0f);
}

TEST_CASE("pfm: malformed input") {
  Bytes ok = text_bytes("Pf\n2 2\n-1\n");
  for (int i = 0; i < 4; ++i) append_float(ok, 1.0f, false);

  Bytes truncated(ok.begin(), ok.end() - 1);
  CHECK(code_of([&] { read_pfm(truncated); }) == Errc::TruncatedPayload);
  Bytes color = ok;
  color[1] = 'F';
  CHECK(code_of([&] { read_pfm(color); }) == Errc::UnsupportedChannels);
  Bytes magic = ok;
  magic[0] = 'X';
  CHECK(code_of([&] { read_pfm(magic); }) == Errc::BadHeader);
  CHECK(code_of([] { read_pfm(text_bytes("Pf\n0 2\n-1\n")); }) == Errc::BadHeader);
  CHECK(code_of([] { read_pfm(text_bytes("Pf\n2 2\n0\n")); }) == Errc::BadHeader);
  CHECK(code_of([] { read_pfm(text_bytes("Pf\n2")); }) == Errc::BadHeader);
  Bytes extra = ok;
  extra.push_back(0);
  CHECK(code_of([&] { read_pfm(extra); }) == Errc::BadHeader);
}

TEST_CASE("png16: depth scale and validity") {
  const DepthMap m(3, 1, {5.0f, 0.0f, 0.25f}, {1, 0, 1});
  const auto enc = write_depth_png16(m, 1.0);
  CHECK(enc.clamped == 0);
  const auto back = read_depth_png16(enc.bytes, 1.0);
  CHECK(back.at(0, 0) == 5.0f);
  CHECK(!back.valid(1, 0));
  CHECK(back.at(2, 0) == 0.25f);

  const auto half = read_depth_png16(enc.bytes, 0.5);
  CHECK(half.at(0, 0) == 2.5f);
  CHECK(code_of([&] { read_depth_png16(enc.bytes, 0.0); }) == Errc::NonPositiveScale);
  CHECK(code_of([&] { write_depth_png16(m, -1.0); }) == Errc::NonPositiveScale);
}

TEST_CASE("png16: quantization bound and clamping") {
  Rng rng(3);
  std::vector<float> v;
  for (int i = 0; i < 400; ++i) v.push_back(static_cast<float>(uniform(rng, 0.01, 60)));
  const auto m = DepthMap::dense(Grid(20, 20, v));
  const double scale = 1.0;
  const auto back = read_depth_png16(write_depth_png16(m, scale).bytes, scale);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(std::abs(back[i] - v[i]) <= scale / 2000.0 + 1e-6);
  }

  const auto big = DepthMap::dense(Grid(2, 1, {100.0f, 1e-5f}));
  const auto enc = write_depth_png16(big, 1.0);
  CHECK(enc.clamped == 2);
  const auto bb = read_depth_png16(enc.bytes, 1.0);
  CHECK(bb.at(0, 0) == doctest::Approx(65.535));
  CHECK(bb.valid(1, 0));
  CHECK(bb.at(1, 0) == doctest::Approx(0.001));
}

TEST_CASE("png: non-16-bit depth is rejected, masks threshold at 128") {
  const std::uint8_t px[] = {0, 127, 128, 255};
  const auto png8 = write_gray8_png(4, 1, px);
  CHECK(code_of([&] { read_depth_png16(png8, 1.0); }) == Errc::BadImage);
  const auto mask = read_mask_png(png8);
  CHECK(!mask[0]);
  CHECK(!mask[1]);
  CHECK(mask[2]);
  CHECK(mask[3]);

  const auto d16 = write_depth_png16(DepthMap::dense(Grid::filled(2, 2, 1.0f)), 1.0);
  CHECK(code_of([&] { read_mask_png(d16.bytes); }) == Errc::BadImage);
  CHECK(code_of([] { read_mask_png(text_bytes("not a png")); }) == Errc::BadImage);
}

TEST_CASE("visualize_png maps into 8-bit") {
  const auto bytes = visualize_png(Grid(3, 1, {0.0f, 5.0f, 20.0f}), 10.0);
  const auto m = read_mask_png(bytes);
  CHECK(!m[0]);
  CHECK(m[1]);  // 5/10 of 255 rounds to 128
  CHECK(m[2]);
}

TEST_CASE("report: canonical and deterministic") {
  ReportDocument doc;
  doc.version = "priorfill test";
  doc.config = json{{"zeta", 1}, {"alpha", {{"b", 0.1}, {"a", true}}}};
  MetricsReport m{12.3456789, 0.5, 1.0 / 3.0, 42};
  doc.results.push_back(json{{"prior", "S"}, {"metrics", to_json(m)}});
  const auto a = write_report(doc);
  const auto b = write_report(doc);
  CHECK(a == b);

  const std::string s(a.begin(), a.end());
  const auto parsed = json::parse(s);
  CHECK(parsed["absrel_scale"] == 100);
  CHECK(parsed["timings_ms"].is_null());
  CHECK(parsed["clamped_fill_count"] == 0);
  CHECK(parsed["results"][0]["metrics"]["evaluated_pixels"] == 42);
  CHECK(parsed["results"][0]["metrics"]["absrel"].get<double>() == doctest::Approx(12.3457));
  CHECK(s.find("\"alpha\"") < s.find("\"zeta\""));
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("0.333333") != std::string::npos);

  ReportDocument empty;
  empty.version = "v";
  const auto eb = write_report(empty);
  const auto e = json::parse(std::string(eb.begin(), eb.end()));
  CHECK(e["results"].is_array());
  CHECK(e["results"].empty());
}

TEST_CASE("canonical_dump formatting") {
  CHECK(canonical_dump(json(1.5)) == "1.5\n");
  CHECK(canonical_dump(json(3)) == "3\n");
  CHECK(canonical_dump(json(-0.0)) == "0\n");
  CHECK(canonical_dump(json(123456789.0)) == "1.23457e+08\n");
  CHECK(canonical_dump(json::array()) == "[]\n");
  CHECK(canonical_dump(json::object()) == "{}\n");
  CHECK(canonical_dump(json{{"b", 1}, {"a", {1, 2}}}) ==
        "{\n  \"a\": [\n    1,\n    2\n  ],\n  \"b\": 1\n}\n");
  CHECK(canonical_dump(json(std::nan(""))) == "null\n");
}

TEST_CASE("file helpers") {
  CHECK(code_of([] { read_file("/nonexistent/priorfill/x.pfm"); }) == Errc::IoError);
}
