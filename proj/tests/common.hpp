#pragma once

#include <gtest/gtest.h>

#include <functional>

#include "oracles.hpp"

namespace lalec::test {

inline ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace lalec::test
