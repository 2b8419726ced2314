// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "stancegen/templates.hpp"
#include "stancegen/util/text_template.hpp"

using namespace stancegen;

TEST(Templates, BuiltinsAreEmbedded) {
  const auto ids = builtin_template_ids();
  EXPECT_NE(std::find(ids.begin(), ids.end(), "instruction_v1"), ids.end());
  EXPECT_NE(std::find(ids.begin(), ids.end(), "coarse_label_v1"), ids.end());
  EXPECT_NE(builtin_template("coarse_label_v1")->find("STANCE:"), std::string::npos);
}

TEST(Templates, RenderAndLint) {
  const util::TextTemplate t("t", "Hello {name}, {name}! {extra}");
  EXPECT_EQ(t.slots().at("name"), 2u);
  EXPECT_EQ(t.render({{"name", "Bo"}}), "Hello Bo, Bo! ");
  const auto issues = t.lint({"name", "missing"}, {});
  EXPECT_GE(issues.size(), 2u);
  EXPECT_TRUE(util::TextTemplate("t", "{a} {b}").lint({"a"}, {"b"}).empty());
}

TEST(Templates, RegistryDirectoryShadowsBuiltins) {
  testing_support::TempDir dir;
  std::ofstream(dir / "coarse_label_v1.txt") << "{post_text} / {comment_text}";
  const auto reg = TemplateRegistry::with_builtins("coarse_label", {{"post_text", "comment_text"}, {"image", "target"}},
                                                   dir.path());
  EXPECT_EQ(reg.get("coarse_label_v1").body(), "{post_text} / {comment_text}");
  EXPECT_STG_ERROR(reg.get("coarse_label_v9"), ErrorCode::unknown_template);
}
