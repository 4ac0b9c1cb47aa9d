// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace langsim {

/// Malformed or out-of-contract input (non-finite values, bad ids, bad params).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Two containers that must agree in shape do not.
class ShapeMismatch : public std::invalid_argument {
 public:
  explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Failure while running an otherwise valid request (IO, numerical breakdown).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline void require_shape(bool cond, const std::string& msg) {
  if (!cond) throw ShapeMismatch(msg);
}

}  // namespace langsim
