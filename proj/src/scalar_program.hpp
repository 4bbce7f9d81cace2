/*
 * Copyright 2026 The fragdb Authors
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

#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

#include "fragdb/algebra.hpp"
#include "fragdb/error.hpp"

namespace fragdb {

// Postfix form of a scalar over slots, evaluated on a small stack.
class ScalarProgram {
 public:
  // `slot_of` maps an attribute to its position in the value array; by
  // default the attribute's var field already holds it.
  explicit ScalarProgram(const Scalar& s, const std::function<std::size_t(const AttrRef&)>& slot_of = {}) {
    emit(s, slot_of);
  }
  ScalarProgram() = default;

  template <class T>
  T eval(const std::uint32_t* slots) const {
    T stack[64];
    std::size_t top = 0;
    for (const auto& o : ops_) {
      switch (o.op) {
        case ScalarOp::Const:
          if constexpr (std::is_floating_point_v<T>) {
            stack[top++] = o.real ? o.rval : static_cast<T>(o.ival);
          } else {
            stack[top++] = o.real ? static_cast<T>(o.rval) : o.ival;
          }
          break;
        case ScalarOp::Attr: stack[top++] = static_cast<T>(slots[o.slot]); break;
        case ScalarOp::Neg: stack[top - 1] = -stack[top - 1]; break;
        case ScalarOp::Abs: stack[top - 1] = stack[top - 1] < 0 ? -stack[top - 1] : stack[top - 1]; break;
        case ScalarOp::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
        case ScalarOp::Sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
        case ScalarOp::Mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
        case ScalarOp::Div:
          // Division is real even inside an integer aggregate.
          --top;
          stack[top - 1] = static_cast<T>(static_cast<double>(stack[top - 1]) / static_cast<double>(stack[top]));
          break;
      }
    }
    return stack[0];
  }

 private:
  struct Op {
    ScalarOp op;
    bool real = false;
    std::int64_t ival = 0;
    double rval = 0;
    std::size_t slot = 0;
  };

  void emit(const Scalar& s, const std::function<std::size_t(const AttrRef&)>& slot_of) {
    for (const auto& k : s.kids) emit(k, slot_of);
    std::size_t slot = 0;
    if (s.op == ScalarOp::Attr) slot = slot_of ? slot_of(s.attr) : s.attr.var;
    ops_.push_back({s.op, s.real_const, s.ival, s.rval, slot});
    if (ops_.size() > 64) fail(Errc::UnsupportedFeature, "scalar expression too large");
  }

  std::vector<Op> ops_;
};

}  // namespace fragdb
