#include <gtest/gtest.h>

#include "copilot/schema.hpp"

using namespace copilot;
using nlohmann::json;

TEST(Schema, BuiltinRegistryHasEverySchema) {
  const auto& reg = SchemaRegistry::builtin();
  for (const char* id : {"skill_eval.v1", "question.v1", "question_deep.v1", "summary.v1", "command.v1",
                         "event_envelope.v1"}) {
    EXPECT_NE(reg.find(id), nullptr) << id;
  }
  EXPECT_EQ(reg.find("nope.v9"), nullptr);
}

TEST(Schema, SkillEvalShapes) {
  const auto& reg = SchemaRegistry::builtin();
  EXPECT_FALSE(reg.validate("skill_eval.v1", json::parse(R"({"mappings":[]})")));
  EXPECT_FALSE(reg.validate("skill_eval.v1", json::parse(
      R"({"mappings":[{"skill_id":"sql","relevance":"high","summary":"s","supporting":"segment"}]})")));
  EXPECT_FALSE(reg.validate("skill_eval.v1", json::parse(
      R"({"mappings":[{"skill_id":"sql","relevance":"low","summary":"s","supporting":[1,2]}]})")));
  EXPECT_TRUE(reg.validate("skill_eval.v1", json::parse(
      R"({"mappings":[{"skill_id":"sql","relevance":"extreme","summary":"s","supporting":"segment"}]})")));
  EXPECT_TRUE(reg.validate("skill_eval.v1", json::parse(
      R"({"mappings":[{"skill_id":"sql","relevance":"high","summary":"s","supporting":[]}]})")));
  EXPECT_TRUE(reg.validate("skill_eval.v1", json::parse(R"({"mapping":[]})")));
  EXPECT_TRUE(reg.validate("skill_eval.v1", json::parse(R"([1])")));
}

TEST(Schema, QuestionShapes) {
  const auto& reg = SchemaRegistry::builtin();
  const auto plain = json::parse(R"({"text":"Why?","rationale":"r","star_tags":[]})");
  EXPECT_FALSE(reg.validate("question.v1", plain));
  EXPECT_TRUE(reg.validate("question_deep.v1", plain));
  EXPECT_FALSE(reg.validate("question_deep.v1", json::parse(R"({"text":"Why?","rationale":"r","star_tags":["Task"]})")));
  EXPECT_TRUE(reg.validate("question.v1", json::parse(R"({"text":"Why?","rationale":"r","star_tags":["Mood"]})")));
  EXPECT_TRUE(reg.validate("question.v1", json::parse(R"({"text":"","rationale":"r","star_tags":[]})")));
}

TEST(Schema, CommandShapes) {
  const auto& reg = SchemaRegistry::builtin();
  EXPECT_FALSE(reg.validate("command.v1", json::parse(R"({"type":"subscribe","session_id":"s1"})")));
  EXPECT_FALSE(reg.validate("command.v1",
                            json::parse(R"({"type":"command","kind":"add_note","session_id":"s","payload":{"text":"x"}})")));
  EXPECT_TRUE(reg.validate("command.v1", json::parse(R"({"type":"command","kind":"reboot","payload":{}})")));
  EXPECT_TRUE(reg.validate("command.v1", json::parse(R"({"type":"subscribe"})")));
  EXPECT_TRUE(reg.validate("command.v1", json::parse(R"({"kind":"add_note"})")));
}

TEST(Schema, ValidatorSubset) {
  const auto schema = json::parse(R"({
    "type":"object","required":["n"],"additionalProperties":false,
    "properties":{"n":{"type":"integer","minimum":1},"tags":{"type":"array","maxItems":2,"items":{"type":"string"}}}})");
  EXPECT_FALSE(validate_against(schema, json::parse(R"({"n":1,"tags":["a","b"]})")));
  EXPECT_TRUE(validate_against(schema, json::parse(R"({"n":0})")));
  EXPECT_TRUE(validate_against(schema, json::parse(R"({"n":1.5})")));
  EXPECT_TRUE(validate_against(schema, json::parse(R"({"n":1,"extra":true})")));
  EXPECT_TRUE(validate_against(schema, json::parse(R"({"n":1,"tags":["a","b","c"]})")));
  EXPECT_TRUE(validate_against(schema, json::parse(R"({"n":1,"tags":[3]})")));
}

TEST(Schema, PromptTemplatesEmbeddedAndOverridable) {
  EXPECT_FALSE(prompt_template("skill_eval").empty());
  EXPECT_FALSE(prompt_template("question_gen").empty());
  EXPECT_FALSE(prompt_template("summarize").empty());
  EXPECT_EQ(prompt_template("skill_eval", "/nonexistent"), prompt_template("skill_eval"));
}
