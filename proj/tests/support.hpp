/*
 * Copyright 2026 The consensus-select Authors
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

#pragma once


#include <optional>

#include "consensus/error.hpp"

namespace support {

// Runs fn and returns the kind of the consensus::Error it throws.
template <typename Fn>
std::optional<consensus::ErrorKind> kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const consensus::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

template <typename Fn>
std::optional<consensus::ErrorKind> cause_of(Fn&& fn) {
  try {
    fn();
  } catch (const consensus::Error& e) {
    return e.cause();
  }
  return std::nullopt;
}

}  // namespace support
