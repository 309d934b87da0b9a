#include <catch2/catch_amalgamated.hpp>

#include "dicl/corpus.hpp"

#include "test_util.hpp"

using namespace dicl;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::string manifest_text(const std::string& fields = "sentence") {
  return "name = demo\n"
         "fields = " + fields + "\n"
         "labels = neg,pos\n"
         "verbalizer.neg = negative\n"
         "verbalizer.pos = positive\n"
         "instruction = Classify.\n"
         "template.demo = In: {" + split_list(fields).front() + "}\\nOut: {label}\n"
         "template.query = In: {" + split_list(fields).front() + "}\\nOut: {label}\n";
}

void write_demo_splits(const TempDir& dir, const std::string& train_body) {
  write_file(dir.path / "demo.train.tsv", train_body);
  write_file(dir.path / "demo.validation.tsv", "sentence\tlabel\nval one\tneg\n");
  write_file(dir.path / "demo.test.tsv", "sentence\tlabel\ntest one\tpos\n");
}

}  // namespace

TEST_CASE("load_dataset reads a well-formed TSV with ids in file order") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text());
  write_demo_splits(dir,
                    "sentence\tlabel\n"
                    "great fun\tpos\n"
                    "a bore\tneg\n"
                    "loved it\tpos\n"
                    "awful mess\tneg\n");

  Dataset ds = load_dataset((dir.path / "demo.manifest").string());
  REQUIRE(ds.train.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(ds.train[i].id == i);
    CHECK(ds.train[i].split == Split::train);
  }
  CHECK(ds.train[0].fields == std::vector<std::string>{"great fun"});
  CHECK(ds.train[1].label == "neg");
  CHECK(ds.label_set == std::vector<std::string>{"neg", "pos"});
}

TEST_CASE("load_dataset rejects unknown labels") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text());
  write_demo_splits(dir,
                    "sentence\tlabel\n"
                    "fine\tpos\n"
                    "meh movie\tmeh\n"
                    "bad\tneg\n");
  REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                      Catch::Matchers::ContainsSubstring("unknown label"));
}

TEST_CASE("RTE-style two-field rows produce two segments", "[fields]") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text("premise,hypothesis"));
  write_file(dir.path / "demo.train.tsv",
             "premise\thypothesis\tlabel\n"
             "a premise\ta hypothesis\tpos\n"
             "other premise\tother hypothesis\tneg\n");
  write_file(dir.path / "demo.validation.tsv",
             "premise\thypothesis\tlabel\nv p\tv h\tneg\n");
  write_file(dir.path / "demo.test.tsv", "premise\thypothesis\tlabel\nt p\tt h\tpos\n");

  Dataset ds = load_dataset((dir.path / "demo.manifest").string());
  REQUIRE(ds.train[0].fields.size() == 2);
  CHECK(ds.train[0].fields[0] == "a premise");
  CHECK(ds.train[0].fields[1] == "a hypothesis");
}

TEST_CASE("load_dataset error paths") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text());

  SECTION("missing split file") {
    write_file(dir.path / "demo.train.tsv", "sentence\tlabel\nx\tpos\n");
    write_file(dir.path / "demo.validation.tsv", "sentence\tlabel\ny\tneg\n");
    REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                        Catch::Matchers::ContainsSubstring("missing split file"));
  }
  SECTION("empty split") {
    write_demo_splits(dir, "sentence\tlabel\n");
    REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                        Catch::Matchers::ContainsSubstring("empty split"));
  }
  SECTION("duplicate declared id") {
    write_demo_splits(dir,
                      "id\tsentence\tlabel\n"
                      "0\tfirst\tpos\n"
                      "0\tsecond\tneg\n");
    REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                        Catch::Matchers::ContainsSubstring("duplicate id"));
  }
  SECTION("non-contiguous declared id") {
    write_demo_splits(dir,
                      "id\tsentence\tlabel\n"
                      "0\tfirst\tpos\n"
                      "7\tsecond\tneg\n");
    REQUIRE_THROWS(load_dataset((dir.path / "demo.manifest").string()));
  }
  SECTION("ragged row") {
    write_demo_splits(dir,
                      "sentence\tlabel\n"
                      "only sentence no label\n");
    REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                        Catch::Matchers::ContainsSubstring("columns"));
  }
  SECTION("content overlap across splits") {
    write_file(dir.path / "demo.train.tsv", "sentence\tlabel\nsame text\tpos\n");
    write_file(dir.path / "demo.validation.tsv", "sentence\tlabel\nsame text\tneg\n");
    write_file(dir.path / "demo.test.tsv", "sentence\tlabel\nother\tpos\n");
    REQUIRE_THROWS_WITH(load_dataset((dir.path / "demo.manifest").string()),
                        Catch::Matchers::ContainsSubstring("splits"));
  }
}

TEST_CASE("manifest validation") {
  TempDir dir;
  SECTION("single label rejected") {
    REQUIRE_THROWS(parse_manifest(parse_kv_text("name = d\nfields = s\nlabels = only\n"
                                                "verbalizer.only = x\ninstruction = i\n"
                                                "template.demo = {s} {label}\n"
                                                "template.query = {s} {label}\n",
                                                "m"),
                                  "m"));
  }
  SECTION("verbalizer values must be distinct") {
    REQUIRE_THROWS_WITH(
        parse_manifest(parse_kv_text("name = d\nfields = s\nlabels = a,b\n"
                                     "verbalizer.a = same\nverbalizer.b = same\n"
                                     "instruction = i\ntemplate.demo = {s} {label}\n"
                                     "template.query = {s} {label}\n",
                                     "m"),
                       "m"),
        Catch::Matchers::ContainsSubstring("distinct"));
  }
  SECTION("missing verbalizer") {
    REQUIRE_THROWS_WITH(
        parse_manifest(parse_kv_text("name = d\nfields = s\nlabels = a,b\n"
                                     "verbalizer.a = x\ninstruction = i\n"
                                     "template.demo = {s} {label}\n"
                                     "template.query = {s} {label}\n",
                                     "m"),
                       "m"),
        Catch::Matchers::ContainsSubstring("verbalizer.b"));
  }
}

TEST_CASE("join_fields") {
  Example e;
  e.fields = {"a premise", "a hypothesis"};
  CHECK(join_fields(e, " [SEP] ") == "a premise [SEP] a hypothesis");

  Example single;
  single.fields = {"hello"};
  CHECK(join_fields(single, " | ") == "hello");

  Example degenerate;
  degenerate.fields = {"", ""};
  CHECK(join_fields(degenerate, " ") == " ");
}

TEST_CASE("load -> save -> load round-trips") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text());
  write_demo_splits(dir,
                    "sentence\tlabel\n"
                    "first review\tpos\n"
                    "second review\tneg\n");
  Dataset ds = load_dataset((dir.path / "demo.manifest").string());

  TempDir round;
  save_dataset(ds, round.path);
  Dataset again = load_dataset((round.path / "demo.manifest").string());

  CHECK(again.name == ds.name);
  CHECK(again.field_names == ds.field_names);
  CHECK(again.label_set == ds.label_set);
  CHECK(again.verbalizer == ds.verbalizer);
  CHECK(again.instruction == ds.instruction);
  CHECK(again.demo_template == ds.demo_template);
  CHECK(again.query_template == ds.query_template);
  REQUIRE(again.train.size() == ds.train.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    CHECK(again.train[i].id == ds.train[i].id);
    CHECK(again.train[i].fields == ds.train[i].fields);
    CHECK(again.train[i].label == ds.train[i].label);
  }
}

TEST_CASE("repeated loads are identical") {
  TempDir dir;
  write_file(dir.path / "demo.manifest", manifest_text());
  write_demo_splits(dir,
                    "sentence\tlabel\n"
                    "alpha\tpos\n"
                    "beta\tneg\n");
  Dataset a = load_dataset((dir.path / "demo.manifest").string());
  Dataset b = load_dataset((dir.path / "demo.manifest").string());
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].id == b.train[i].id);
    CHECK(a.train[i].fields == b.train[i].fields);
    CHECK(a.train[i].label == b.train[i].label);
  }
}
