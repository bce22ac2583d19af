#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "hopflax/error.hpp"
#include "hopflax/sampling.hpp"

namespace hopflax::tu {

using hopflax::random_euclidean_space;
using hopflax::random_field;
using hopflax::random_graph_space;
using hopflax::two_point_space;

/// Runs body and checks that it throws an Error of the given kind.
inline void expect_kind(ErrorKind kind, const std::function<void()>& body) {
  try {
    body();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace hopflax::tu
