// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <bit>
#include <cstring>
#include <limits>

#include "helpers.hpp"
#include "tsa/error.hpp"

using namespace tsa;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected tsa::Error");
  return ErrorCode::Internal;
}

} // namespace

TEST_CASE("text features: minimal file") {
  const auto m = parse_text_features("2 3\n1 0 0\n0 1 0");
  CHECK(m.frames() == 2);
  CHECK(m.dims() == 3);
  CHECK(m.values()(1, 1) == 1.0);
  CHECK(m.values()(0, 1) == 0.0);
}

TEST_CASE("text features: malformed inputs") {
  CHECK(code_of([] { parse_text_features("2 3\n1 0 0\n"); }) == ErrorCode::RowCountMismatch);
  CHECK(code_of([] { parse_text_features("2 3\n1 0 0\n0 1\n"); }) == ErrorCode::RowLengthMismatch);
  CHECK(code_of([] { parse_text_features("2 3\n1 0 0 4\n0 1 0\n"); }) ==
        ErrorCode::RowLengthMismatch);
  CHECK(code_of([] { parse_text_features("two 3\n"); }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] { parse_text_features(""); }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] { parse_text_features("2 1\n1\nnan\n"); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([] { parse_text_features("2 1\n1\ninf\n"); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("error messages name the offending line") {
  try {
    parse_text_features("3 2\n1 2\n3\n5 6\n");
    FAIL("no throw");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("feature matrix construction contract") {
  CHECK(code_of([] { FeatureMatrix(Matrix(1, 3)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { FeatureMatrix(Matrix(2, 0)); }) == ErrorCode::InvalidArgument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { FeatureMatrix{bad}; }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("text output format") {
  Matrix one(1, 1);
  one(0, 0) = 0.5;
  CHECK(format_text_matrix(one) == "1 1\n0.5\n");
  Matrix two(2, 2);
  two << 1, -2.25, 0, 3;
  CHECK(format_text_features(FeatureMatrix(two)) == "2 2\n1 -2.25\n0 3\n");
}

TEST_CASE("binary layout") {
  Matrix m(2, 1);
  m << 1.0, -0.5;
  const auto bytes = format_binary_features(FeatureMatrix(m));
  REQUIRE(bytes.size() == 4 + 4 + 4 + 2 * 4);
  CHECK(bytes.substr(0, 4) == "TSAF");
  const auto u8 = [&](std::size_t k) { return static_cast<unsigned char>(bytes[k]); };
  CHECK(u8(4) == 2);
  CHECK(u8(5) == 0);
  CHECK(u8(8) == 1);
  // 1.0f little-endian = 00 00 80 3f
  CHECK(u8(12) == 0x00);
  CHECK(u8(14) == 0x80);
  CHECK(u8(15) == 0x3f);
  CHECK(code_of([&] { parse_binary_features("TSAX" + bytes.substr(4)); }) ==
        ErrorCode::MalformedHeader);
  CHECK(code_of([&] { parse_binary_features(bytes.substr(0, bytes.size() - 1)); }) ==
        ErrorCode::RowLengthMismatch);
  CHECK(code_of([&] { parse_binary_features(bytes.substr(0, bytes.size() - 4)); }) ==
        ErrorCode::RowCountMismatch);
}

TEST_CASE("binary round-trip is bit-exact on f32 values") {
  Rng rng(11);
  const auto dir = test::scratch_dir("data_io_roundtrip");
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = 2 + static_cast<Index>(rng.index(20));
    const Index cols = 1 + static_cast<Index>(rng.index(12));
    Matrix m = test::random_matrix(rows, cols, rng, -1e4, 1e4);
    m = m.cast<float>().cast<double>();
    const FeatureMatrix fm(m);
    const auto path = dir / "m.bin";
    save_features(fm, path, FeatureFormat::binary);
    const auto back = load_features(path, FeatureFormat::binary);
    REQUIRE(back.frames() == rows);
    REQUIRE(back.dims() == cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        REQUIRE(std::bit_cast<std::uint64_t>(back.values()(i, j)) ==
                std::bit_cast<std::uint64_t>(m(i, j)));
  }
}

TEST_CASE("text round-trip within 1e-6") {
  Rng rng(12);
  const auto dir = test::scratch_dir("data_io_text");
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMatrix fm(test::random_matrix(5, 4, rng, -10, 10));
    save_features(fm, dir / "m.txt", FeatureFormat::text);
    const auto back = load_features(dir / "m.txt", FeatureFormat::text);
    CHECK((back.values() - fm.values()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("missing file is an Io error naming the path") {
  try {
    load_features("/nonexistent/dir/x.txt", FeatureFormat::text);
    FAIL("no throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("/nonexistent/dir/x.txt") != std::string::npos);
  }
}

TEST_CASE("format selection") {
  CHECK(format_from_extension("a.bin") == FeatureFormat::binary);
  CHECK(format_from_extension("a.tsaf") == FeatureFormat::binary);
  CHECK(format_from_extension("a.txt") == FeatureFormat::text);
  CHECK(parse_feature_format("binary") == FeatureFormat::binary);
  CHECK(code_of([] { parse_feature_format("csv"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("labels: first-appearance mapping") {
  const auto s = parse_labels("pour\npour\nstir");
  CHECK(s.labels == std::vector<int>{0, 0, 1});
  CHECK(s.names == std::vector<std::string>{"pour", "stir"});
  CHECK_FALSE(s.background_id.has_value());
  CHECK(s.classes() == 2);
}

TEST_CASE("labels: background token") {
  const auto s = parse_labels("SIL\npour\nSIL\n", std::string("SIL"));
  REQUIRE(s.background_id.has_value());
  CHECK(*s.background_id == 0);
  CHECK(s.labels == std::vector<int>{0, 1, 0});
  CHECK_FALSE(parse_labels("a\nb\n", std::string("SIL")).background_id.has_value());
}

TEST_CASE("labels: errors") {
  CHECK(code_of([] { parse_labels(""); }) == ErrorCode::EmptyLabels);
  CHECK(code_of([] { parse_labels("a\n\nb\n"); }) == ErrorCode::BlankLabelLine);
}

TEST_CASE("labels: mapping is a bijection") {
  Rng rng(3);
  std::string text;
  std::vector<std::string> tokens;
  for (int i = 0; i < 200; ++i) {
    tokens.push_back("t" + std::to_string(rng.index(9)));
    text += tokens.back() + "\n";
  }
  const auto s = parse_labels(text);
  for (std::size_t i = 0; i < tokens.size(); ++i)
    CHECK(s.names[static_cast<std::size_t>(s.labels[i])] == tokens[i]);
  auto names = s.names;
  std::sort(names.begin(), names.end());
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
}

TEST_CASE("labels: save and reload") {
  const auto dir = test::scratch_dir("data_io_labels");
  save_labels({0, 0, 1, 2}, dir / "ids.txt");
  CHECK(read_file(dir / "ids.txt") == "0\n0\n1\n2\n");
  save_labels({1, 0}, dir / "names.txt", {"pour", "stir"});
  CHECK(load_labels(dir / "names.txt").names == std::vector<std::string>{"stir", "pour"});
}

TEST_CASE("config: defaults, overrides and validation") {
  const RunConfig d;
  CHECK(d.L == 6);
  CHECK(d.batch_size == 32);
  CHECK(d.learning_rate == 0.051);
  CHECK(d.lr_decay == 0.3);
  CHECK(d.weight_decay == 1e-3);
  CHECK(d.patience == 2);
  CHECK(d.positive_fraction == 0.05);
  CHECK(d.kl_smoothing == 1e-8);
  CHECK(d.loss_orientation == LossOrientation::standard);

  const auto cfg = parse_config("# comment\nL = 9\nlearning_rate=0.403\n\nloss_orientation = literal\n");
  CHECK(cfg.L == 9);
  CHECK(cfg.learning_rate == 0.403);
  CHECK(cfg.loss_orientation == LossOrientation::literal);

  CHECK(code_of([] { parse_config("bogus = 1\n"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_config("L = six\n"); }) == ErrorCode::InvalidArgument);
  RunConfig bad;
  bad.min_epochs = 5;
  bad.max_epochs = 3;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = RunConfig{};
  bad.positive_fraction = 1.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = RunConfig{};
  bad.lr_decay = 0.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("config: formatted entries parse back to the same config") {
  RunConfig c;
  c.h = 0.37;
  c.seed = 18446744073709551615ULL;
  c.mixing = Mixing::semantic_only;
  c.loss_space = LossSpace::raw;
  const auto back = parse_config(format_config(c));
  CHECK(config_entries(back) == config_entries(c));
  CHECK(back.seed == c.seed);
}
