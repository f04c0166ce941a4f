#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "geo/common/utf8.hpp"
#include "geo/corpus/dataset.hpp"
#include "geo/corpus/html_extract.hpp"
#include "geo/corpus/ingest.hpp"
#include "geo/corpus/quality.hpp"
#include "geo/corpus/trim.hpp"
#include "test_util.hpp"

using namespace geo;
using namespace geo::corpus;

// ---- extract_text -----------------------------------------------------------

TEST(ExtractText, DropsScriptContent) { EXPECT_EQ(extract_text("<p>Hello</p><script>x()</script>"), "Hello"); }

TEST(ExtractText, EmptyInput) { EXPECT_EQ(extract_text(""), ""); }

TEST(ExtractText, ThreeBlockPageKeepsArticleOnly) {
  const std::string page = R"(<html><body>
<nav class="menu"><a href="/">Home</a> | <a href="/blog">Blog</a></nav>
<article>
  <h1>Porto on a budget</h1>
  <p>Porto is   compact and
     walkable.</p>
  <p>Trams cost &euro;3 &amp; the metro is cheaper.</p>
</article>
<footer><p>&copy; 2024 Example Travel</p></footer>
</body></html>)";
  // Hand-written expectation: headings and paragraphs become lines, inner
  // whitespace collapses, entities decode, nav and footer vanish.
  EXPECT_EQ(extract_text(page), "Porto on a budget\nPorto is compact and walkable.\nTrams cost \xE2\x82\xAC" "3 & the metro is cheaper.");
}

TEST(ExtractText, DropsAdsSocialAndHiddenBlocks) {
  const std::string page =
      "<div class='ad-slot'>Buy!</div><div class='share-buttons'>Share</div><p>Keep me.</p>"
      "<div role='navigation'>Menu</div><div hidden>secret</div><style>p{}</style>";
  EXPECT_EQ(extract_text(page), "Keep me.");
}

TEST(ExtractText, MalformedMarkupDegradesGracefully) {
  EXPECT_NO_THROW(extract_text("<p>unclosed <b>bold <div>text"));
  EXPECT_NO_THROW(extract_text("<<<>>><p"));
  EXPECT_NO_THROW(extract_text("<script>never closed"));
  EXPECT_EQ(extract_text("<p>a</p></div></span><p>b</p>"), "a\nb");
}

TEST(ExtractText, OutputNeverContainsScriptOrStyleOpeners) {
  std::mt19937_64 gen(11);
  const std::vector<std::string> pieces = {"<script>", "</script>", "<STYLE>", "</style>", "<p>",   "</p>",
                                           "&lt;script&gt;", "&lt;STYLE", "text ", "<div>", "<",   ">",
                                           "<scr", "ipt>", "&amp;lt;style&amp;gt;", "\n", "<ScRiPt src=x>"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string raw;
    const int n = static_cast<int>(gen() % 20);
    for (int i = 0; i < n; ++i) raw += pieces[gen() % pieces.size()];
    const std::string lower = text::ascii_lower(extract_text(raw));
    ASSERT_EQ(lower.find("<script"), std::string::npos) << raw;
    ASSERT_EQ(lower.find("<style"), std::string::npos) << raw;
  }
}

// ---- quality_filter ---------------------------------------------------------

namespace {
WebDocument doc_with(std::string text, std::string url = "https://travel.example/page", int status = 200) {
  WebDocument d;
  d.url = std::move(url);
  d.http_status = status;
  d.set_text(std::move(text));
  return d;
}
}  // namespace

TEST(QualityFilter, NinetyNineCharsIsTooShort) {
  EXPECT_EQ(quality_filter(doc_with(std::string(99, 'a')), {}), DocStatus::too_short);
}

TEST(QualityFilter, HundredCharsIsUsable) {
  EXPECT_EQ(quality_filter(doc_with(std::string(100, 'a')), {}), DocStatus::usable);
}

TEST(QualityFilter, CountsUnicodeScalarsNotBytes) {
  std::string s;
  for (int i = 0; i < 99; ++i) s += "\xC3\xA9";  // 99 x 'é', 198 bytes
  EXPECT_EQ(quality_filter(doc_with(s), {}), DocStatus::too_short);
  s += "\xC3\xA9";
  EXPECT_EQ(quality_filter(doc_with(s), {}), DocStatus::usable);
}

TEST(QualityFilter, ListedHostWinsOverEverything) {
  const std::set<std::string> excluded = {"pinterest.com"};
  EXPECT_EQ(quality_filter(doc_with("short", "https://www.pinterest.com/x", 403), excluded),
            DocStatus::excluded_domain);
  EXPECT_EQ(quality_filter(doc_with(std::string(500, 'a'), "https://pinterest.com/x"), excluded),
            DocStatus::excluded_domain);
  EXPECT_EQ(quality_filter(doc_with(std::string(500, 'a'), "https://notpinterest.com/x"), excluded),
            DocStatus::usable);
}

TEST(QualityFilter, BlockedBeatsTooShort) {
  EXPECT_EQ(quality_filter(doc_with("", "https://a.example/", 403), {}), DocStatus::blocked);
  EXPECT_EQ(quality_filter(doc_with(std::string(200, 'a'), "https://a.example/", 429), {}), DocStatus::blocked);
}

TEST(QualityFilter, UsableImpliesMinimumLength) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 500; ++i) {
    auto d = doc_with(std::string(gen() % 300, 'x'), "https://h.example/", gen() % 4 == 0 ? 403 : 200);
    if (quality_filter(d, {}) == DocStatus::usable) {
      EXPECT_GE(d.char_count, kMinChars);
    }
  }
}

// ---- trim_content -----------------------------------------------------------

TEST(TrimContent, UnderLimitUnchanged) {
  const std::string s(3999, 'a');
  EXPECT_EQ(trim_content(s), s);
}

TEST(TrimContent, CutsAtLastSentenceBoundary) {
  // 39 units of 98 letters + ". " (100 chars each), then 101 letters: 4001
  // chars. The last terminator before the limit sits at index 3898, so the
  // result is the first 3899 characters.
  std::string s;
  for (int i = 0; i < 39; ++i) s += std::string(98, 'x') + ". ";
  s += std::string(101, 'z');
  ASSERT_EQ(s.size(), 4001u);
  const auto t = trim_content(s);
  EXPECT_EQ(t.size(), 3899u);
  EXPECT_EQ(t, s.substr(0, 3899));
  EXPECT_EQ(t.back(), '.');
}

TEST(TrimContent, SingleLongTokenHardCut) {
  const std::string s(5000, 'q');
  EXPECT_EQ(trim_content(s), std::string(4000, 'q'));
}

TEST(TrimContent, FallsBackToWhitespace) {
  std::string s = std::string(3000, 'a') + " " + std::string(2000, 'b');
  EXPECT_EQ(trim_content(s), std::string(3000, 'a'));
}

TEST(TrimContent, CountsCharactersNotBytes) {
  std::string s;
  for (int i = 0; i < 10; ++i) s += "\xE6\xBC\xA2";  // 10 CJK chars, 30 bytes
  EXPECT_EQ(trim_content(s, 10), s);
  EXPECT_EQ(utf8::char_count(trim_content(s, 4)), 4u);
}

TEST(TrimContent, ZeroLimitRejected) { EXPECT_THROW(trim_content("abc", 0), precondition_error); }

TEST(TrimContent, IdempotentAndBounded) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = test_util::random_text(gen, 3500 + gen() % 3000);
    const auto once = trim_content(s);
    EXPECT_LE(utf8::char_count(once), kMaxChars);
    EXPECT_EQ(trim_content(once), once);
  }
}

// ---- dataset persistence ----------------------------------------------------

TEST(Dataset, EmbeddedNewlineRoundTrips) {
  std::vector<ContentPair> pairs = {{"q1", "https://a.example/x", "line one\nline \"two\", three", std::nullopt}};
  EXPECT_EQ(parse_dataset(format_dataset(pairs)), pairs);
}

TEST(Dataset, EmptyListIsHeaderOnly) {
  const auto doc = format_dataset({});
  EXPECT_EQ(doc, std::string(kDatasetHeader) + "\n");
  EXPECT_TRUE(parse_dataset(doc).empty());
}

TEST(Dataset, SyntheticCorpusScaleRoundTrip) {
  std::mt19937_64 gen(1905);
  std::vector<ContentPair> pairs;
  for (int i = 0; i < 1905; ++i) {
    pairs.push_back({"q" + std::to_string(i / 5), "https://s.example/" + std::to_string(i),
                     test_util::random_text(gen, 50 + gen() % 400),
                     i % 3 ? std::optional<std::string>(test_util::random_text(gen, 1 + gen() % 400)) : std::nullopt});
  }
  auto dir = test_util::temp_dir("dataset");
  store_dataset(pairs, dir / "d.csv");
  const auto back = load_dataset(dir / "d.csv");
  ASSERT_EQ(back.size(), 1905u);
  EXPECT_EQ(back, pairs);
}

TEST(Dataset, RandomUnicodeRowsRoundTrip) {
  std::mt19937_64 gen(42);
  for (int i = 0; i < 1000; ++i) {
    ContentPair p{test_util::random_text(gen, gen() % 12), test_util::random_text(gen, gen() % 30),
                  test_util::random_text(gen, gen() % 200), std::nullopt};
    if (gen() % 2) p.optimized_text = test_util::random_text(gen, 1 + gen() % 200);
    const std::vector<ContentPair> one = {p};
    ASSERT_EQ(parse_dataset(format_dataset(one)), one) << "row " << i;
  }
}

TEST(Dataset, MalformedRowsReportTheirIndex) {
  const std::string header = std::string(kDatasetHeader) + "\n";
  try {
    parse_dataset(header + "q,u,w,x\nq,u,w\n");
    FAIL();
  } catch (const format_error& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  try {
    parse_dataset(header + "q,u,\"unterminated,x\n");
    FAIL();
  } catch (const format_error& e) {
    EXPECT_EQ(e.row(), 1u);
  }
  EXPECT_THROW(parse_dataset("wrong,header\n"), format_error);
  EXPECT_THROW(parse_dataset(header + "q,u,a\"b,x\n"), format_error);
}

TEST(Dataset, StoreRejectsInvariantViolations) {
  EXPECT_THROW(format_dataset({{"q", "u", std::string(4001, 'a'), std::nullopt}}), precondition_error);
  EXPECT_THROW(format_dataset({{"q", "u", "w", std::string()}}), precondition_error);
}

TEST(Documents, JsonLinesRoundTrip) {
  WebDocument d = doc_with("caf\xC3\xA9 text", "https://x.example/a");
  d.query_id = "q7";
  d.raw_payload = "<p>caf&eacute; text</p>";
  d.status = DocStatus::too_short;
  const std::vector<WebDocument> docs = {d, d};
  EXPECT_EQ(parse_jsonl<WebDocument>(format_jsonl(docs)), docs);
}

TEST(Documents, CharCountMismatchRejected) {
  const std::string line =
      R"({"query_id":"q","url":"u","raw_payload":"","extracted_text":"abc","char_count":4,"http_status":200,"status":"usable"})";
  EXPECT_THROW(parse_jsonl<WebDocument>(line + "\n"), format_error);
}

// ---- ingest over the bundled fixture corpus ---------------------------------

TEST(Ingest, BundledCorpusStatuses) {
  IngestConfig cfg;
  cfg.excluded_domains = {"pinterest.com", "youtube.com"};
  const auto docs = ingest_fixtures(std::filesystem::path(GEO_FIXTURE_DIR) / "corpus", cfg);
  std::map<std::string, std::map<DocStatus, int>> per_query;
  for (const auto& d : docs) {
    ++per_query[d.query_id][d.status];
    EXPECT_EQ(d.char_count, utf8::char_count(d.extracted_text));
    if (d.status == DocStatus::usable) {
      EXPECT_GE(d.char_count, kMinChars);
    }
  }
  ASSERT_EQ(per_query.size(), 20u);
  int blocked = 0, short_docs = 0, excluded = 0;
  for (const auto& [q, counts] : per_query) {
    const int usable = counts.count(DocStatus::usable) ? counts.at(DocStatus::usable) : 0;
    EXPECT_EQ(usable, (q == "q06" || q == "q15") ? 4 : 5) << q;
    if (counts.count(DocStatus::blocked)) blocked += counts.at(DocStatus::blocked);
    if (counts.count(DocStatus::too_short)) short_docs += counts.at(DocStatus::too_short);
    if (counts.count(DocStatus::excluded_domain)) excluded += counts.at(DocStatus::excluded_domain);
  }
  EXPECT_GT(blocked, 0);
  EXPECT_GT(short_docs, 0);
  EXPECT_GT(excluded, 0);
}

TEST(Clean, TrimsAndHonoursReviewList) {
  std::vector<WebDocument> docs = {doc_with(std::string(5000, 'a')), doc_with(std::string(150, 'b'), "https://r.example/"),
                                   doc_with("tiny")};
  docs[2].status = DocStatus::too_short;
  auto rows = clean_documents(docs, 4000, 100, {"https://r.example/"});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].source_text.size(), 4000u);
  EXPECT_FALSE(rows[0].optimized_text.has_value());
}
