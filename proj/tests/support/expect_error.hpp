// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gtest/gtest.h>

#include "stancegen/error.hpp"

#define EXPECT_STG_ERROR(stmt, expected_code)                                   \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "expected " << stancegen::to_string(expected_code);     \
    } catch (const stancegen::Error& e_) {                                      \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                         \
    }                                                                           \
  } while (0)
