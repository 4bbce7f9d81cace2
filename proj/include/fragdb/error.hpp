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

#include <stdexcept>
#include <string>
#include <string_view>

namespace fragdb {

enum class Errc {
  // schema and loading
  UnknownEntityRef,
  DuplicateTableName,
  NonBinaryRelationship,
  FkOutOfDomain,
  RaggedRow,
  TypeMismatch,
  DuplicateKeyPair,
  DuplicateKey,
  IncompleteEntity,
  AlreadyLoaded,
  NotLoaded,
  EmptyColumn,
  VersionMismatch,
  CorruptMetadata,
  // codecs
  ValueOutOfDomain,
  NonMonotonicBitmapInput,
  EmptyHistogram,
  KindNotApplicable,
  MixedEncodings,
  EncodingNotApplicable,
  ScratchOverflow,
  // index
  KeyOutOfDomain,
  MissingIndex,
  // frontend
  SyntaxError,
  UnsupportedFeature,
  NotNormalizable,
  UnknownTable,
  UnknownAttribute,
  AmbiguousAttribute,
  // execution
  ParameterMismatch,
  ScaleExceeded,
  InfeasibleFanout,
  // misc
  Usage,
  Io,
  Internal,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace fragdb
