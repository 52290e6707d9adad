/*
 * Copyright 2026 The webmac Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "support.hpp"
#include "webmac/error.hpp"
#include "webmac/knowledge_base.hpp"

using namespace webmac;

namespace {

std::string kb_path_error(const std::string& doc) {
    try {
        KnowledgeBase::parse(doc, ValidityPolicy::error);
    } catch (const KbSchemaError& e) {
        return e.detail();
    }
    return "";
}

} // namespace

TEST(KnowledgeBase, LoadsTheBundledKb) {
    const auto kb = KnowledgeBase::load(test::data_path("kb/petclinic_kb.json"), ValidityPolicy::error);
    ASSERT_EQ(kb.entries().size(), 2u);
    EXPECT_TRUE(kb.warnings().empty());
    const auto& first = kb.entries()[0].parameters.at("first_name");
    ASSERT_EQ(first.size(), 5u);
    EXPECT_EQ(first[0].validity, Validity::valid);
    EXPECT_EQ(first[2].validity, Validity::invalid);
    EXPECT_EQ(first[2].description, "contains special symbols");
}

TEST(KnowledgeBase, BlankDocumentIsEmpty) {
    EXPECT_TRUE(KnowledgeBase::parse("  \n").entries().empty());
    EXPECT_TRUE(KnowledgeBase::parse("{}").entries().empty());
}

TEST(KnowledgeBase, SchemaErrorsCarryAPath) {
    EXPECT_EQ(kb_path_error("[]"), "$");
    EXPECT_EQ(kb_path_error(R"({"entries": {}})"), "$.entries");
    EXPECT_EQ(kb_path_error(R"({"entries": [{"parameters": {}}]})"), "$.entries[0].scenario_keyword");
    EXPECT_EQ(kb_path_error(R"({"entries": [{"scenario_keyword": "a", "parameters": {"x": {"valid": [{"description": "v"}], "invalid": [{"hints": []}]}}}]})"),
              "$.entries[0].parameters.x.invalid[0].description");
    EXPECT_EQ(kb_path_error(R"({"entries": [{"scenario_keyword": "a", "parameters": {"x": {"valid": [{"description": "v"}]}}}]})"),
              "$.entries[0].parameters.x");
}

TEST(KnowledgeBase, MissingValidityGroupWarnsByDefault) {
    const auto kb = KnowledgeBase::parse(
        R"({"entries": [{"scenario_keyword": "a", "parameters": {"x": {"valid": [{"description": "v"}]}}}]})");
    ASSERT_EQ(kb.warnings().size(), 1u);
}

TEST(KnowledgeBase, DuplicateKeywordsAfterNormalization) {
    EXPECT_THROW(KnowledgeBase::parse(R"({"entries": [{"scenario_keyword": "Add owner", "parameters": {}},
                                                       {"scenario_keyword": "add  OWNER", "parameters": {}}]})"),
                 DuplicateKeyword);
}

TEST(KnowledgeBase, RetrievesByFeatureKeyword) {
    const auto kb = KnowledgeBase::load(test::data_path("kb/petclinic_kb.json"));
    const auto r = kb.retrieve("Add owner", {"first_name", "last_name", "pet_name"});
    EXPECT_EQ(r.keyword, "add owner");
    EXPECT_DOUBLE_EQ(r.score, 1.0);
    EXPECT_EQ(r.partitions.size(), 2u);
    EXPECT_EQ(r.missing, (std::vector<std::string>{"pet_name"}));
}

TEST(KnowledgeBase, NoMatchingEntry) {
    const auto kb = KnowledgeBase::load(test::data_path("kb/petclinic_kb.json"));
    EXPECT_THROW(kb.retrieve("Delete veterinarian", {"name"}), NotFound);
}

TEST(KnowledgeBase, TiesGoToTheSmallerKeyword) {
    const auto kb = KnowledgeBase::parse(R"({"entries": [
        {"scenario_keyword": "owner edit", "parameters": {}},
        {"scenario_keyword": "owner add", "parameters": {}}]})");
    EXPECT_EQ(kb.retrieve("owner", {}).keyword, "owner add");
}
