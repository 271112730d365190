#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/error.hpp"
#include "tkge/toy.hpp"

using namespace tkge;
using kg::Dataset;
using kg::EntityId;
using kg::Triple;

namespace {

namespace fs = std::filesystem;

// Writes the three split files into a scratch directory and loads them.
class SplitFixture {
 public:
  SplitFixture(const std::string& train, const std::string& valid,
               const std::string& test) {
    dir_ = fs::temp_directory_path() / "tkge_dataset_fixture";
    fs::create_directories(dir_);
    write("train.txt", train);
    write("valid.txt", valid);
    write("test.txt", test);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Dataset load() const {
    return kg::load_dataset(path("train.txt"), path("valid.txt"),
                            path("test.txt"));
  }

 private:
  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
  }

  fs::path dir_;
};

bool split_has(const std::vector<Triple>& split, const Triple& t) {
  return std::find(split.begin(), split.end(), t) != split.end();
}

}  // namespace

TEST_CASE("loader builds vocabulary in first-appearance order") {
  const SplitFixture fx(
      "alice\tknows\tbob\n"
      "bob\tknows\tcarol\n"
      "alice\tlikes\tcarol\n",
      "carol\tknows\talice\n",
      "dave\tknows\talice\n");
  const Dataset ds = fx.load();

  CHECK(ds.num_entities() == 4);
  CHECK(ds.num_relations() == 2);
  CHECK(ds.train().size() == 3);
  CHECK(ds.valid().size() == 1);
  CHECK(ds.test().size() == 1);

  const auto& vocab = ds.vocabulary();
  CHECK(vocab.entity_id("alice") == EntityId{0});
  CHECK(vocab.entity_id("bob") == EntityId{1});
  CHECK(vocab.entity_id("carol") == EntityId{2});
  CHECK(vocab.entity_id("dave") == EntityId{3});
  CHECK(vocab.relation_id("knows") == kg::RelationId{0});
  CHECK(vocab.relation_id("likes") == kg::RelationId{1});
  CHECK(!vocab.entity_id("nobody").has_value());

  // Round trip: id -> name -> id.
  for (std::size_t i = 0; i < ds.num_entities(); ++i) {
    const auto id = static_cast<EntityId>(i);
    CHECK(vocab.entity_id(vocab.entity_name(id)) == id);
  }
  for (std::size_t i = 0; i < ds.num_relations(); ++i) {
    const auto id = static_cast<kg::RelationId>(i);
    CHECK(vocab.relation_id(vocab.relation_name(id)) == id);
  }
  CHECK_THROWS_AS(vocab.entity_name(99), std::invalid_argument);

  CHECK(ds.train()[0] == Triple{0, 0, 1});
  CHECK(ds.test()[0] == Triple{3, 0, 0});
}

TEST_CASE("loader keeps duplicate lines verbatim") {
  const SplitFixture fx(
      "a\tr\tb\n"
      "a\tr\tb\n"
      "a\tr\tb\n",
      "a\tr\tc\n", "b\tr\tc\n");
  const Dataset ds = fx.load();
  CHECK(ds.train().size() == 3);
  CHECK(ds.num_entities() == 3);
}

TEST_CASE("loader tolerates CRLF line endings") {
  const SplitFixture fx("a\tr\tb\r\n", "a\tr\tc\r\n", "b\tr\tc\r\n");
  const Dataset ds = fx.load();
  CHECK(ds.vocabulary().entity_name(1) == "b");
}

TEST_CASE("loader reports malformed lines with their line number") {
  const SplitFixture fx("a\tr\tb\na\tr\n", "a\tr\tc\n", "b\tr\tc\n");
  try {
    fx.load();
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("train.txt") != std::string::npos);
  }

  const SplitFixture extra("a\tr\tb\tc\n", "a\tr\tc\n", "b\tr\tc\n");
  CHECK_THROWS_AS(extra.load(), ParseError);
}

TEST_CASE("loader rejects missing files and empty splits") {
  const SplitFixture fx("a\tr\tb\n", "", "b\tr\tc\n");
  CHECK_THROWS_AS(kg::load_dataset(fx.path("absent.txt"), fx.path("valid.txt"),
                                   fx.path("test.txt")),
                  IoError);
  CHECK_THROWS_WITH_AS(fx.load(), doctest::Contains("empty split"),
                       FormatError);
}

TEST_CASE("membership indexes cover the union of splits") {
  const SplitFixture fx(
      "alice\tknows\tbob\n"
      "bob\tknows\tcarol\n",
      "carol\tknows\talice\n", "dave\tknows\talice\n");
  const Dataset ds = fx.load();

  CHECK(ds.contains(Triple{0, 0, 1}));
  CHECK(ds.contains(Triple{2, 0, 0}));  // valid split
  CHECK(ds.contains(Triple{3, 0, 0}));  // test split
  CHECK(!ds.contains(Triple{0, 0, 3}));

  CHECK(ds.contains_train(Triple{0, 0, 1}));
  CHECK(!ds.contains_train(Triple{2, 0, 0}));

  const auto tails = ds.tails_for(0, 0);
  REQUIRE(tails.size() == 1);
  CHECK(tails[0] == 1);
  // Heads pointing at alice via "knows": carol and dave, sorted.
  const auto heads = ds.heads_for(0, 0);
  REQUIRE(heads.size() == 2);
  CHECK(heads[0] == 2);
  CHECK(heads[1] == 3);
  CHECK(ds.tails_for(3, 1).empty());
}

TEST_CASE("contains agrees with a linear scan over the splits") {
  const Dataset ds = kg::make_toy_dataset(50, 77);
  Rng rng(123);
  std::vector<Triple> all;
  all.insert(all.end(), ds.train().begin(), ds.train().end());
  all.insert(all.end(), ds.valid().begin(), ds.valid().end());
  all.insert(all.end(), ds.test().begin(), ds.test().end());
  for (int i = 0; i < 100; ++i) {
    Triple probe;
    if (i % 2 == 0) {
      probe = all[rng.uniform_index(all.size())];
    } else {
      probe = Triple{static_cast<EntityId>(rng.uniform_index(50)),
                     static_cast<kg::RelationId>(rng.uniform_index(3)),
                     static_cast<EntityId>(rng.uniform_index(50))};
    }
    CHECK(ds.contains(probe) == split_has(all, probe));
  }
}

TEST_CASE("dataset constructor validates ids against the vocabulary") {
  kg::Vocabulary vocab;
  vocab.intern_entity("a");
  vocab.intern_entity("b");
  vocab.intern_relation("r");
  CHECK_THROWS_AS(Dataset(vocab, {Triple{0, 0, 5}}, {}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Dataset(vocab, {Triple{0, 2, 1}}, {}, {}),
                  std::invalid_argument);
}

TEST_CASE("bern stats count distinct pairs, heads and tails") {
  kg::Vocabulary vocab;
  for (const char* n : {"a", "b", "c", "d"}) vocab.intern_entity(n);
  vocab.intern_relation("fan");       // one head, two tails
  vocab.intern_relation("single");    // a lone triple
  vocab.intern_relation("biject");    // k disjoint pairs
  vocab.intern_relation("unused");    // never in training
  const std::vector<Triple> train = {
      {0, 0, 1}, {0, 0, 2},            // fan: tph=2, hpt=1
      {0, 1, 3},                       // single: tph=hpt=1
      {0, 2, 1}, {2, 2, 3},            // biject: tph=hpt=1
  };
  const Dataset ds(vocab, train, {Triple{0, 3, 1}}, {Triple{1, 3, 2}});
  const kg::BernStats stats = kg::bern_stats(ds);

  CHECK(stats.tph[0] == 2.0);
  CHECK(stats.hpt[0] == 1.0);
  CHECK(stats.tph[1] == 1.0);
  CHECK(stats.hpt[1] == 1.0);
  CHECK(stats.tph[2] == 1.0);
  CHECK(stats.hpt[2] == 1.0);
  CHECK(stats.tph[3] == 0.0);
  CHECK(stats.hpt[3] == 0.0);

  CHECK(kg::head_replace_probability(stats, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(kg::head_replace_probability(stats, 3) == 0.5);
}

TEST_CASE("duplicate training triples do not skew bern stats") {
  kg::Vocabulary vocab;
  for (const char* n : {"a", "b", "c"}) vocab.intern_entity(n);
  vocab.intern_relation("r");
  const std::vector<Triple> train = {{0, 0, 1}, {0, 0, 1}, {0, 0, 2}};
  const Dataset ds(vocab, train, {Triple{1, 0, 2}}, {Triple{2, 0, 0}});
  const kg::BernStats stats = kg::bern_stats(ds);
  CHECK(stats.tph[0] == 2.0);
  CHECK(stats.hpt[0] == 1.0);
}

TEST_CASE("negative sampling never returns the input triple") {
  const Dataset ds = kg::make_toy_dataset(30, 5);
  const kg::BernStats stats = kg::bern_stats(ds);
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const Triple pos = ds.train()[rng.uniform_index(ds.train().size())];
    const Triple neg = kg::sample_negative(pos, stats, ds.num_entities(), rng);
    CHECK(neg != pos);
    CHECK(neg.relation == pos.relation);
    // Exactly one side changed.
    const bool head_changed = neg.head != pos.head;
    const bool tail_changed = neg.tail != pos.tail;
    CHECK(head_changed != tail_changed);
    CHECK(neg.head >= 0);
    CHECK(neg.head < static_cast<EntityId>(ds.num_entities()));
    CHECK(neg.tail >= 0);
    CHECK(neg.tail < static_cast<EntityId>(ds.num_entities()));
  }
}

TEST_CASE("symmetric relations corrupt both sides equally often") {
  kg::BernStats stats;
  stats.tph = {1.0};
  stats.hpt = {1.0};
  const Triple pos{0, 0, 1};
  Rng rng(7);
  int heads = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Triple neg = kg::sample_negative(pos, stats, 10, rng);
    if (neg.head != pos.head) ++heads;
  }
  // Chi-squared with 1 degree of freedom; 6.635 is the p=0.01 cutoff.
  const double expect = draws / 2.0;
  const double h = static_cast<double>(heads);
  const double chi2 = (h - expect) * (h - expect) / expect +
                      (draws - h - expect) * (draws - h - expect) / expect;
  CHECK(chi2 < 6.635);
}

TEST_CASE("head replacement follows tph/(tph+hpt)") {
  kg::BernStats stats;
  stats.tph = {2.0};
  stats.hpt = {1.0};
  const Triple pos{3, 0, 4};
  Rng rng(21);
  int heads = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    if (kg::sample_negative(pos, stats, 20, rng).head != pos.head) ++heads;
  }
  const double rate = static_cast<double>(heads) / draws;
  CHECK(rate == doctest::Approx(2.0 / 3.0).epsilon(0.03));
  CHECK(std::abs(rate - 2.0 / 3.0) <= 0.02);
}

TEST_CASE("replacement entities are uniform over the non-original ones") {
  kg::BernStats stats;
  stats.tph = {0.0};  // forces tail corruption
  stats.hpt = {1.0};
  const Triple pos{0, 0, 2};
  Rng rng(31);
  std::vector<int> counts(5, 0);
  const int draws = 8000;
  for (int i = 0; i < draws; ++i) {
    ++counts[static_cast<std::size_t>(
        kg::sample_negative(pos, stats, 5, rng).tail)];
  }
  CHECK(counts[2] == 0);
  // Chi-squared over the 4 candidates; 11.345 is the p=0.01 cutoff, df=3.
  const double expect = draws / 4.0;
  double chi2 = 0.0;
  for (const std::size_t e : {0u, 1u, 3u, 4u}) {
    const double diff = counts[e] - expect;
    chi2 += diff * diff / expect;
  }
  CHECK(chi2 < 11.345);
}

TEST_CASE("negative sampling needs at least two entities") {
  kg::BernStats stats;
  stats.tph = {1.0};
  stats.hpt = {1.0};
  Rng rng(1);
  CHECK_THROWS_AS(kg::sample_negative(Triple{0, 0, 0}, stats, 1, rng),
                  StateError);
}

TEST_CASE("toy dataset is deterministic and split 80/10/10") {
  const Dataset a = kg::make_toy_dataset(200, 42);
  const Dataset b = kg::make_toy_dataset(200, 42);
  CHECK(a.train() == b.train());
  CHECK(a.valid() == b.valid());
  CHECK(a.test() == b.test());

  CHECK(a.num_entities() == 200);
  CHECK(a.num_relations() == 3);
  const std::size_t total =
      a.train().size() + a.valid().size() + a.test().size();
  CHECK(a.valid().size() == total / 10);
  CHECK(a.test().size() == total / 10);
  CHECK(a.train().size() >= 8 * (total / 10));

  const Dataset c = kg::make_toy_dataset(200, 43);
  CHECK(c.train() != a.train());
}

TEST_CASE("toy relations satisfy their defining rules") {
  const Dataset ds = kg::make_toy_dataset(60, 9);
  const auto& vocab = ds.vocabulary();
  const auto r1 = *vocab.relation_id("r1");
  const auto r2 = *vocab.relation_id("r2");
  const auto r3 = *vocab.relation_id("r3");

  std::vector<Triple> all;
  all.insert(all.end(), ds.train().begin(), ds.train().end());
  all.insert(all.end(), ds.valid().begin(), ds.valid().end());
  all.insert(all.end(), ds.test().begin(), ds.test().end());

  std::set<std::pair<EntityId, EntityId>> e1, e2, e3;
  for (const Triple& t : all) {
    if (t.relation == r1) e1.insert({t.head, t.tail});
    if (t.relation == r2) e2.insert({t.head, t.tail});
    if (t.relation == r3) e3.insert({t.head, t.tail});
  }

  // r2 is exactly the inverse of r1.
  CHECK(e1.size() == e2.size());
  for (const auto& [a, b] : e1) {
    CHECK(e2.contains({b, a}));
    CHECK(a != b);
  }

  // r3 is exactly the composition r1;r2 minus self-loops.
  std::set<std::pair<EntityId, EntityId>> expected;
  for (const auto& [a, b] : e1) {
    for (const auto& [b2, c] : e2) {
      if (b2 == b && c != a) expected.insert({a, c});
    }
  }
  CHECK(e3 == expected);

  // Out-degree 3 per entity under r1.
  CHECK(e1.size() == 3 * ds.num_entities());
}
