#include <catch2/catch_amalgamated.hpp>

#include "dicl/prompt.hpp"

using namespace dicl;

namespace {

Dataset demo_dataset() {
  Dataset ds;
  ds.name = "demo";
  ds.field_names = {"sentence"};
  ds.label_set = {"neg", "pos"};
  ds.verbalizer = {{"neg", "negative"}, {"pos", "positive"}};
  ds.instruction = "Classify the sentiment.";
  ds.demo_template = "Review: {sentence}\nSentiment: {label}";
  ds.query_template = "Review: {sentence}\nSentiment: {label}";
  return ds;
}

Example example(int id, std::string sentence, std::string label) {
  Example e;
  e.id = id;
  e.fields = {std::move(sentence)};
  e.label = std::move(label);
  return e;
}

}  // namespace

TEST_CASE("zero-shot prompt is instruction plus open query block") {
  Dataset ds = demo_dataset();
  Example test = example(0, "pretty good", "pos");
  Prompt p = build_prompt(PromptTemplate::from_dataset(ds), ds, {}, test);
  CHECK(p.k_effective == 0);
  CHECK(p.demo_ids.empty());
  CHECK(p.text ==
        "Classify the sentiment.\n"
        "\n"
        "Review: pretty good\n"
        "Sentiment: ");
}

TEST_CASE("demos render in selection order with verbalized labels") {
  Dataset ds = demo_dataset();
  Example d1 = example(4, "loved it", "pos");
  Example d2 = example(9, "hated it", "neg");
  Example test = example(0, "decent film", "pos");

  Prompt p = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d1, &d2}, test);
  CHECK(p.k_effective == 2);
  CHECK(p.demo_ids == std::vector<int>{4, 9});
  CHECK(p.text ==
        "Classify the sentiment.\n"
        "\n"
        "Review: loved it\n"
        "Sentiment: positive\n"
        "Review: hated it\n"
        "Sentiment: negative\n"
        "\n"
        "Review: decent film\n"
        "Sentiment: ");
}

TEST_CASE("reversed order flips the demonstrations") {
  Dataset ds = demo_dataset();
  Example d1 = example(4, "loved it", "pos");
  Example d2 = example(9, "hated it", "neg");
  Example test = example(0, "decent film", "pos");

  Prompt fwd = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d1, &d2}, test,
                            DemoOrder::selection);
  Prompt rev = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d1, &d2}, test,
                            DemoOrder::reversed);
  CHECK(rev.demo_ids == std::vector<int>{9, 4});
  CHECK(fwd.text != rev.text);  // injective in demo order for distinct texts
  CHECK(rev.text.find("hated it") < rev.text.find("loved it"));
}

TEST_CASE("identical inputs give byte-identical prompts") {
  Dataset ds = demo_dataset();
  Example d1 = example(1, "fine enough", "pos");
  Example test = example(2, "watchable", "neg");
  Prompt a = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d1}, test);
  Prompt b = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d1}, test);
  CHECK(a.text == b.text);
}

TEST_CASE("template validation") {
  Dataset ds = demo_dataset();

  SECTION("unknown field slot rejected") {
    ds.demo_template = "Review: {sentnce}\nSentiment: {label}";
    REQUIRE_THROWS_WITH(validate_templates(ds),
                        Catch::Matchers::ContainsSubstring("unknown field"));
  }
  SECTION("query template must end at the label slot") {
    ds.query_template = "Review: {sentence}\nSentiment: {label}!";
    REQUIRE_THROWS_WITH(validate_templates(ds),
                        Catch::Matchers::ContainsSubstring("end at the {label} slot"));
  }
  SECTION("demo template must carry the label slot") {
    ds.demo_template = "Review: {sentence}";
    REQUIRE_THROWS_WITH(validate_templates(ds),
                        Catch::Matchers::ContainsSubstring("{label}"));
  }
  SECTION("well-formed templates pass") {
    REQUIRE_NOTHROW(validate_templates(ds));
  }
  SECTION("unterminated slot rejected") {
    ds.demo_template = "Review: {sentence\nSentiment: {label}";
    REQUIRE_THROWS_WITH(validate_templates(ds),
                        Catch::Matchers::ContainsSubstring("unterminated"));
  }
}

TEST_CASE("multi-field templates render every declared slot") {
  Dataset ds = demo_dataset();
  ds.field_names = {"premise", "hypothesis"};
  ds.demo_template = "P: {premise} H: {hypothesis} -> {label}";
  ds.query_template = "P: {premise} H: {hypothesis} -> {label}";
  Example d;
  d.id = 0;
  d.fields = {"it rained", "the ground is wet"};
  d.label = "pos";
  Example q;
  q.id = 1;
  q.fields = {"sun shone", "it is bright"};
  q.label = "neg";

  Prompt p = build_prompt(PromptTemplate::from_dataset(ds), ds, {&d}, q);
  CHECK(p.text ==
        "Classify the sentiment.\n"
        "\n"
        "P: it rained H: the ground is wet -> positive\n"
        "\n"
        "P: sun shone H: it is bright -> ");
}
