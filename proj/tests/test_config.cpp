#include <catch2/catch_amalgamated.hpp>

#include "dicl/kv.hpp"

using namespace dicl;

TEST_CASE("kv parser reads key = value lines") {
  auto kv = parse_kv_text("# comment\n"
                          "name = toy\n"
                          "\n"
                          "  spaced.key   =   spaced value  \n"
                          "empty =\n",
                          "test");
  CHECK(kv.at("name") == "toy");
  CHECK(kv.at("spaced.key") == "spaced value");
  CHECK(kv.at("empty") == "");
  CHECK(kv.size() == 3);
}

TEST_CASE("kv parser handles escapes in values") {
  auto kv = parse_kv_text("template = Review: {s}\\nOut: {label}\n"
                          "tabbed = a\\tb\n"
                          "slash = c:\\\\path\n",
                          "test");
  CHECK(kv.at("template") == "Review: {s}\nOut: {label}");
  CHECK(kv.at("tabbed") == "a\tb");
  CHECK(kv.at("slash") == "c:\\path");
}

TEST_CASE("kv parser error paths") {
  CHECK_THROWS_WITH(parse_kv_text("no equals sign\n", "f"),
                    Catch::Matchers::ContainsSubstring("key = value"));
  CHECK_THROWS_WITH(parse_kv_text("a = 1\na = 2\n", "f"),
                    Catch::Matchers::ContainsSubstring("duplicate key"));
  CHECK_THROWS_WITH(parse_kv_text("= value\n", "f"),
                    Catch::Matchers::ContainsSubstring("empty key"));
  CHECK_THROWS_WITH(parse_kv_text("a = trailing\\\n", "f"),
                    Catch::Matchers::ContainsSubstring("dangling backslash"));
  CHECK_THROWS_WITH(parse_kv_text("a = bad \\x escape\n", "f"),
                    Catch::Matchers::ContainsSubstring("unknown escape"));
}

TEST_CASE("escape_value round-trips through the parser") {
  std::string original = "line one\nline two\twith tab and back\\slash";
  auto kv = parse_kv_text("key = " + escape_value(original) + "\n", "test");
  CHECK(kv.at("key") == original);
}

TEST_CASE("split_list") {
  CHECK(split_list("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list(" a , b ") == std::vector<std::string>{"a", "b"});
  CHECK(split_list("single") == std::vector<std::string>{"single"});
  CHECK(split_list("") == std::vector<std::string>{});
  CHECK(split_list("a,,b") == std::vector<std::string>{"a", "", "b"});
}
