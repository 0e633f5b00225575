#include <doctest.h>

#include <cmath>
#include <random>

#include "support/testutil.hpp"
#include "xlemb/embedding_store.hpp"
#include "xlemb/error.hpp"

using namespace xlemb;
using testutil::TempDir;
using testutil::error_kind;
using testutil::write_file;

TEST_SUITE("embedding_store") {
  TEST_CASE("loads the three word fixture") {
    TempDir dir("emb");
    write_file(dir / "a.vec", "3 2\na 1 0\nb 0 1\nc 1 1\n");
    auto space = load_embeddings(dir / "a.vec", "en");
    CHECK(space.dim() == 2);
    CHECK(space.size() == 3);
    CHECK(space.words() == std::vector<std::string>{"a", "b", "c"});
    CHECK(space.vector("c")[1] == 1.0f);
    CHECK(space.language() == "en");
  }

  TEST_CASE("short file reports the line after the last row") {
    TempDir dir("emb");
    write_file(dir / "a.vec", "4 2\na 1 0\nb 0 1\nc 1 1\n");
    try {
      load_embeddings(dir / "a.vec", "en");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find(":5:") != std::string::npos);
    }
  }

  TEST_CASE("wrong arity names its line") {
    TempDir dir("emb");
    write_file(dir / "a.vec", "3 2\na 1 0\nb 0 1 7\nc 1 1\n");
    try {
      load_embeddings(dir / "a.vec", "en");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
  }

  TEST_CASE("duplicates keep the first row") {
    TempDir dir("emb");
    write_file(dir / "a.vec", "3 2\na 1 0\nb 0 1\na 5 5\n");
    LoadReport report;
    auto space = load_embeddings(dir / "a.vec", "en", &report);
    CHECK(space.size() == 2);
    CHECK(report.duplicate_rows == 1);
    CHECK(space.vector("a")[0] == 1.0f);
    CHECK(space.vector("a")[1] == 0.0f);
  }

  TEST_CASE("empty, zero and malformed inputs") {
    TempDir dir("emb");
    write_file(dir / "empty.vec", "0 2\n");
    CHECK(error_kind([&] { load_embeddings(dir / "empty.vec", "en"); }) == ErrorKind::EmptyInput);
    write_file(dir / "zero.vec", "2 2\na 1 0\nb 0 0\n");
    CHECK(error_kind([&] { load_embeddings(dir / "zero.vec", "en"); }) == ErrorKind::Format);
    write_file(dir / "nan.vec", "1 2\na 1 x\n");
    CHECK(error_kind([&] { load_embeddings(dir / "nan.vec", "en"); }) == ErrorKind::Format);
    write_file(dir / "hdr.vec", "two 2\na 1 0\n");
    CHECK(error_kind([&] { load_embeddings(dir / "hdr.vec", "en"); }) == ErrorKind::Format);
    CHECK(error_kind([&] { load_embeddings(dir / "missing.vec", "en"); }) == ErrorKind::Io);
  }

  TEST_CASE("save and load round trip") {
    TempDir dir("emb");
    write_file(dir / "a.vec", "3 2\na 1 0\nb 0 1\nc 1 1\n");
    auto space = load_embeddings(dir / "a.vec", "en");
    save_embeddings(space, dir / "b.vec");
    auto back = load_embeddings(dir / "b.vec", "en");
    CHECK(back.words() == space.words());
    CHECK((back.vectors() - space.vectors()).cwiseAbs().maxCoeff() <= 1e-6f);
  }

  TEST_CASE("1000 word random space round trips within 1e-6") {
    TempDir dir("emb");
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<std::string> words;
    RowMatrixF m(1000, 30);
    for (int i = 0; i < 1000; ++i) {
      words.push_back("w" + std::to_string(i));
      for (int j = 0; j < 30; ++j) m(i, j) = u(rng);
    }
    EmbeddingSpace space("xx", words, m);
    save_embeddings(space, dir / "r.vec");
    auto back = load_embeddings(dir / "r.vec", "xx");
    CHECK(back.words() == space.words());
    // Six decimals bound the rounding error by 5e-7.
    CHECK((back.vectors() - space.vectors()).cwiseAbs().maxCoeff() < 1e-6f);
  }

  TEST_CASE("save to an unwritable location is an I/O error") {
    TempDir dir("emb");
    EmbeddingSpace space("en", {"a"}, RowMatrixF::Ones(1, 2));
    CHECK(error_kind([&] { save_embeddings(space, dir / "no" / "such" / "dir.vec"); }) == ErrorKind::Io);
  }

  TEST_CASE("space invariants are enforced") {
    CHECK(error_kind([] { EmbeddingSpace("en", {"a", "a"}, RowMatrixF::Ones(2, 2)); }) == ErrorKind::Format);
    CHECK(error_kind([] { EmbeddingSpace("en", {"a"}, RowMatrixF::Ones(2, 2)); }) == ErrorKind::Dimension);
    CHECK(error_kind([] { EmbeddingSpace("en", {}, RowMatrixF(0, 2)); }) == ErrorKind::EmptyInput);
    EmbeddingSpace space("en", {"a"}, RowMatrixF::Ones(1, 2));
    CHECK(error_kind([&] { space.vector("zz"); }) == ErrorKind::NotFound);
    CHECK_FALSE(space.index_of("zz").has_value());
  }

  TEST_CASE("l2_normalize gives unit rows") {
    testutil::Gen g(3);
    RowMatrixF m = g.matrix(50, 7).cast<float>();
    std::vector<std::string> words;
    for (int i = 0; i < 50; ++i) words.push_back("w" + std::to_string(i));
    auto unit = l2_normalize(EmbeddingSpace("xx", words, m));
    for (int i = 0; i < 50; ++i) CHECK(std::abs(unit.vectors().row(i).cast<double>().norm() - 1.0) < 1e-6);
  }

  TEST_CASE("cosine examples") {
    std::vector<double> u{3, 4}, x{1, 0}, y{0, 1}, p{1, 2}, q{2, 1};
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cosine(x, y)) < 1e-15);
    CHECK(cosine(p, q) == doctest::Approx(0.8).epsilon(1e-12));
    std::vector<double> zero{0, 0}, three{1, 2, 3};
    CHECK(error_kind([&] { cosine(zero, u); }) == ErrorKind::UndefinedSimilarity);
    CHECK(error_kind([&] { cosine(three, u); }) == ErrorKind::Dimension);
  }

  TEST_CASE("cosine is symmetric and scale invariant") {
    testutil::Gen g(99);
    for (int trial = 0; trial < 500; ++trial) {
      std::size_t d = 1 + g.index(20);
      Eigen::VectorXd a = g.nonzero_vector(d), b = g.nonzero_vector(d);
      std::span<const double> sa(a.data(), d), sb(b.data(), d);
      double ab = cosine(sa, sb);
      CHECK(std::abs(ab - cosine(sb, sa)) < 1e-12);
      CHECK(ab >= -1.0);
      CHECK(ab <= 1.0);
      Eigen::VectorXd scaled = a * g.uniform(1e-3, 1e3);
      CHECK(std::abs(cosine(std::span<const double>(scaled.data(), d), sb) - ab) < 1e-9);
    }
  }
}
