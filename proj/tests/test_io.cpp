// Serialization: 17-digit number formatting, complex/matrix JSON shapes,
// kernel files that round-trip byte-for-byte, subspace/measure/moment
// files, and the report/CSV renderers.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "pdmskit/corpus.hpp"
#include "pdmskit/io.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/opfactory.hpp"
#include "pdmskit/rng.hpp"

using namespace pdmskit;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pdmskit_io_" + name);
}

}  // namespace

TEST_CASE("format_double round-trips with 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, 3.14159265358979323846, 1e-300, -2.5e17,
                   0.0, 1.6449340668482264}) {
    const std::string s = format_double(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
  }
  REQUIRE(format_double(0.5) == "0.5");
  REQUIRE_THROWS_AS(format_double(std::nan("")), Error);
  REQUIRE_THROWS_AS(format_double(HUGE_VAL), Error);
}

TEST_CASE("complex values parse from pairs and bare numbers") {
  REQUIRE(json_to_complex(Json::parse("[1.5, -2.0]"), "t") ==
          Complex(1.5, -2.0));
  REQUIRE(json_to_complex(Json::parse("3.25"), "t") == Complex(3.25, 0.0));
  REQUIRE_THROWS_AS(json_to_complex(Json::parse("[1, 2, 3]"), "t"),
                    InputError);
  REQUIRE_THROWS_AS(json_to_complex(Json::parse("\"x\""), "t"), InputError);

  const Json j = complex_to_json(Complex(0.5, -0.25));
  REQUIRE(json_to_complex(j, "t") == Complex(0.5, -0.25));
}

TEST_CASE("matrices reject ragged and non-finite input") {
  REQUIRE_THROWS_AS(json_to_matrix(Json::parse("[[1, 2], [3]]"), "t"),
                    InputError);
  REQUIRE_THROWS_AS(json_to_matrix(Json::parse("[]"), "t"), InputError);
  const ComplexMatrix M =
      json_to_matrix(Json::parse("[[1, [0, 2]], [[0, -2], 4]]"), "t");
  REQUIRE(M(0, 1) == Complex(0, 2));
  REQUIRE(M(1, 0) == Complex(0, -2));
}

TEST_CASE("kernel JSON round-trips byte-for-byte") {
  Rng rng(61);
  const HermitianMatrix A = random_psd(rng, 4, 4);
  const std::vector<Kernel> corpus = {
      dense_kernel(A.mat()),
      delta_kernel(),
      diag_n2_kernel(),
      outer_power_kernel(0.5),
      uniform_family_kernel(6),
      shift_kernel({Complex(1, 0), Complex(0.25, -0.5)}),
      harmonic_kernel(2048),
      outer({Complex(0.6, 0), Complex(0, 0.8)}),
      rescale(delta_kernel(), ScalingSpec::power(0.5)),
      rescale(harmonic_kernel(1024),
              ScalingSpec::vector({Complex(1, 0), Complex(0, 1)})),
      hadamard(delta_kernel(), outer_power_kernel(1.0)),
      kernel_sum(delta_kernel(), uniform_family_kernel(3)),
      adjoint(outer_power_kernel(0.7)),
      normalize_bd(diag_n2_kernel()),
  };
  for (const Kernel& K : corpus) {
    const Json j = kernel_to_json(K);
    const std::string once = json_to_string(j);
    const Kernel back = parse_kernel(Json::parse(once));
    const std::string twice = json_to_string(kernel_to_json(back));
    REQUIRE(once == twice);
    // Spot-check an evaluation survives the trip.
    if (K.extent()) {
      REQUIRE(evaluate(back, 1, 1) == evaluate(K, 1, 1));
    } else {
      REQUIRE(evaluate(back, 2, 3) == evaluate(K, 2, 3));
    }
  }
}

TEST_CASE("kernel parsing validates shape and symmetry") {
  SECTION("non-Hermitian dense entries are rejected") {
    const Json j = Json::parse(R"({
      "type": "dense",
      "labels": ["a", "b"],
      "entries": [[1, 2], [3, 4]]
    })");
    REQUIRE_THROWS_AS(parse_kernel(j), InputError);
  }
  SECTION("unknown names and ops") {
    REQUIRE_THROWS_AS(
        parse_kernel(Json::parse(R"({"type": "builtin", "name": "nope"})")),
        InputError);
    REQUIRE_THROWS_AS(parse_kernel(Json::parse(
                          R"({"type": "composite", "op": "nope",
                              "operands": [{"type": "builtin",
                                            "name": "delta"}]})")),
                      InputError);
    REQUIRE_THROWS_AS(parse_kernel(Json::parse(R"({"type": "nope"})")),
                      InputError);
  }
  SECTION("missing fields") {
    REQUIRE_THROWS_AS(parse_kernel(Json::parse(R"({"type": "dense"})")),
                      InputError);
    REQUIRE_THROWS_AS(
        parse_kernel(Json::parse(R"({"type": "builtin",
                                     "name": "outer_power"})")),
        InputError);
  }
  SECTION("general dense kernels cannot be serialized") {
    ComplexMatrix m(2, 2);
    m << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
    REQUIRE_THROWS_AS(kernel_to_json(dense_kernel_general(m)), InputError);
  }
}

TEST_CASE("subspace files round-trip up to the spanned space") {
  Rng rng(67);
  const SubspaceBasis Z = random_subspace(rng, 5, 2);
  const Json j = subspace_to_json(Z);
  const SubspaceBasis back = parse_subspace(j);
  REQUIRE(back.ambient_dim == 5);
  REQUIRE(back.dim() == 2);
  REQUIRE(projector_distance(Z, back) <= 1e-12);

  SECTION("zero subspace") {
    const SubspaceBasis z0 = parse_subspace(
        Json::parse(R"({"ambient_dim": 3, "vectors": []})"));
    REQUIRE(z0.dim() == 0);
    REQUIRE(z0.ambient_dim == 3);
  }
  SECTION("dependent spanning sets collapse") {
    const SubspaceBasis b = parse_subspace(Json::parse(
        R"({"ambient_dim": 2, "vectors": [[1, 0], [2, 0]]})"));
    REQUIRE(b.dim() == 1);
  }
  SECTION("wrong vector length") {
    REQUIRE_THROWS_AS(parse_subspace(Json::parse(
                          R"({"ambient_dim": 3, "vectors": [[1, 0]]})")),
                      InputError);
  }
  SECTION("bad ambient dimension") {
    REQUIRE_THROWS_AS(
        parse_subspace(Json::parse(R"({"ambient_dim": 0, "vectors": []})")),
        InputError);
  }
}

TEST_CASE("measure and moment files") {
  const MeasureSpec mu{{0.25, 0.75}, {0.4, 0.6}};
  const MeasureSpec back = parse_measure(measure_to_json(mu));
  REQUIRE(back.atoms == mu.atoms);
  REQUIRE(back.weights == mu.weights);

  REQUIRE_THROWS_AS(
      parse_measure(Json::parse(R"({"atoms": [0.5], "weights": [0]})")),
      InputError);
  REQUIRE_THROWS_AS(parse_measure(Json::parse(R"({"atoms": [0.5]})")),
                    InputError);

  const std::vector<double> m1 = parse_moments(Json::parse("[1, 0.5, 0.25]"));
  REQUIRE(m1 == std::vector<double>{1.0, 0.5, 0.25});
  const std::vector<double> m2 =
      parse_moments(Json::parse(R"({"moments": [2, 1]})"));
  REQUIRE(m2 == std::vector<double>{2.0, 1.0});
  REQUIRE_THROWS_AS(parse_moments(Json::parse("[]")), InputError);
  REQUIRE_THROWS_AS(parse_moments(Json::parse(R"(["x"])")), InputError);
}

TEST_CASE("file round trip and missing files") {
  const auto path = temp_file("roundtrip.json");
  const Json j = kernel_to_json(harmonic_kernel(4096));
  write_text_file(path.string(), json_to_string(j));
  const Json back = read_json_file(path.string());
  REQUIRE(json_to_string(back) == json_to_string(j));
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(read_json_file("/nonexistent/definitely/missing.json"),
                    InputError);

  // Comment lines (the report header) are tolerated by the reader.
  const auto commented = temp_file("commented.json");
  write_text_file(commented.string(),
                  "// generated header\n{\"moments\": [1, 0.5]}\n");
  REQUIRE(parse_moments(read_json_file(commented.string())).size() == 2);
  std::filesystem::remove(commented);
}

TEST_CASE("reports carry one timestamp line and a deterministic body") {
  Json body;
  body["command"] = "check-pd";
  body["value"] = 0.1;
  const std::string a = render_report("check-pd", body);
  const std::string b = render_report("check-pd", body);
  REQUIRE(a.rfind("# pdmskit check-pd generated ", 0) == 0);
  const std::string body_a = a.substr(a.find('\n') + 1);
  const std::string body_b = b.substr(b.find('\n') + 1);
  REQUIRE(body_a == body_b);
  REQUIRE(body_a.find("0.1") != std::string::npos);
  REQUIRE(body_a.back() == '\n');
}

TEST_CASE("json writer emits stable 17-digit formatting") {
  Json j;
  j["a"] = 1.0 / 3.0;
  j["b"] = Json::array({1.0, 2.5});
  const std::string s = json_to_string(j);
  REQUIRE(s ==
          "{\n  \"a\": 0.33333333333333331,\n  \"b\": [1, 2.5]\n}\n");
}

TEST_CASE("csv renderer") {
  const std::string csv =
      render_csv({"N", "lambda_max"}, {{2.0, 1.5}, {4.0, 1.0 / 3.0}});
  REQUIRE(csv ==
          "N,lambda_max\n2,1.5\n4,0.33333333333333331\n");
}
