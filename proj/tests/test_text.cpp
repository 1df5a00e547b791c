#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "disclosure/csv.hpp"
#include "disclosure/hash.hpp"
#include "disclosure/parallel.hpp"
#include "disclosure/text.hpp"
#include "support/support.hpp"

namespace disclosure {
namespace {

std::size_t code_points(const std::string& s) { return text::decode_lenient(s).size(); }

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::u32string> pool = {
      U"a", U"B", U"z", U"Q", U" ", U"  ", U"\t", U"\n", U"\r\n", U" ", U" ", U"Ä", U"é",
      U"Σ", U"İ", U"ẞ", U"ß", U"—", U".", U",", U"7", U"⟨eqn⟩", U"\U0001F600",
      U"Ё", U"Å"};
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<char32_t> bmp(0x20, 0xd7ff);
  std::u32string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 5 == 0) {
      s.push_back(bmp(rng));
    } else {
      s += pool[pick(rng)];
    }
  }
  return text::encode_utf8(s);
}

TEST(Normalize, CollapsesWhitespaceAndLowercases) {
  EXPECT_EQ(text::normalize("A\t B\n\nC"), "a b c");
  EXPECT_EQ(text::normalize(""), "");
  EXPECT_EQ(text::normalize("  \n\t "), "");
  EXPECT_EQ(text::normalize("ÄRGER ÜBER"), "ärger über");
  EXPECT_EQ(text::normalize("ΣΟΦΙΑ"), "σοφια");
  EXPECT_EQ(text::normalize("line\r\nbreak"), "line break");
}

TEST(Normalize, IdempotentLengthNonincreasingAndClean) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::string x = random_text(rng);
    const std::string once = text::normalize(x);
    EXPECT_EQ(text::normalize(once), once) << x;
    EXPECT_LE(code_points(once), code_points(x));
    EXPECT_EQ(once.find_first_of("\t\n\r"), std::string::npos);
    for (char32_t cp : text::decode_lenient(once)) EXPECT_EQ(text::to_lower(cp), cp);
    EXPECT_TRUE(once.empty() || (once.front() != ' ' && once.back() != ' '));
    EXPECT_EQ(once.find("  "), std::string::npos);
  }
}

TEST(Utf8, StrictDecodeRejectsMalformed) {
  EXPECT_TRUE(text::is_valid_utf8("caf\xc3\xa9"));
  EXPECT_FALSE(text::is_valid_utf8("caf\xe9"));
  EXPECT_FALSE(text::is_valid_utf8("\xc0\xaf"));          // overlong
  EXPECT_FALSE(text::is_valid_utf8("\xed\xa0\x80"));      // surrogate
  EXPECT_FALSE(text::is_valid_utf8("\xf4\x90\x80\x80"));  // above U+10FFFF
}

TEST(Utf8, Latin1Fallback) {
  bool fallback = false;
  EXPECT_EQ(text::to_utf8("caf\xe9", &fallback), "caf\xc3\xa9");
  EXPECT_TRUE(fallback);
  EXPECT_EQ(text::to_utf8("caf\xc3\xa9", &fallback), "caf\xc3\xa9");
  EXPECT_FALSE(fallback);
}

TEST(Utf8, NfcComposesCombiningMarks) {
  EXPECT_EQ(text::nfc("é"), "é");
  EXPECT_EQ(text::nfc("é"), "é");
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(text::format_double(0.1), "0.1");
  EXPECT_EQ(text::format_double(1.0), "1");
  EXPECT_EQ(text::format_double(-0.25), "-0.25");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng);
    EXPECT_EQ(std::stod(text::format_double(v)), v);
  }
}

TEST(Csv, QuotesAndParsesRoundTrip) {
  std::ostringstream os;
  csv::write_row(os, {"id", "text", "n"});
  csv::write_row(os, {"a", "comma, \"quoted\"\nnewline", "3"});
  const auto t = csv::parse(os.str());
  ASSERT_EQ(t.header, (std::vector<std::string>{"id", "text", "n"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][1], "comma, \"quoted\"\nnewline");
}

TEST(Csv, CommentLinesAreCollected) {
  const auto t = csv::parse("# sign: higher is better\nid,v\nx,1\n");
  EXPECT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.require_column("v"), 1u);
  EXPECT_THROW(t.require_column("missing"), InputError);
}

TEST(Csv, RaggedRowIsAnError) { EXPECT_THROW(csv::parse("a,b\n1\n"), InputError); }

TEST(Hash, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Hash, WriteFileCreatesParents) {
  testing::TempDir dir;
  write_file(dir / "a/b/c.txt", "payload");
  EXPECT_EQ(read_file(dir / "a/b/c.txt"), "payload");
  EXPECT_THROW(read_file(dir / "missing.txt"), InputError);
}

TEST(ParallelMap, PreservesOrderAndRethrows) {
  auto squares = parallel_map(4, 100, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < squares.size(); ++i) EXPECT_EQ(squares[i], i * i);
  EXPECT_THROW(parallel_map(3, 10,
                            [](std::size_t i) -> int {
                              if (i == 6) throw InputError("boom");
                              return 0;
                            }),
               InputError);
}

}  // namespace
}  // namespace disclosure
