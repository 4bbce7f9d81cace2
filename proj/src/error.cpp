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

#include "fragdb/error.hpp"

namespace fragdb {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::UnknownEntityRef: return "UnknownEntityRef";
    case Errc::DuplicateTableName: return "DuplicateTableName";
    case Errc::NonBinaryRelationship: return "NonBinaryRelationship";
    case Errc::FkOutOfDomain: return "FkOutOfDomain";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::DuplicateKeyPair: return "DuplicateKeyPair";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::IncompleteEntity: return "IncompleteEntity";
    case Errc::AlreadyLoaded: return "AlreadyLoaded";
    case Errc::NotLoaded: return "NotLoaded";
    case Errc::EmptyColumn: return "EmptyColumn";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptMetadata: return "CorruptMetadata";
    case Errc::ValueOutOfDomain: return "ValueOutOfDomain";
    case Errc::NonMonotonicBitmapInput: return "NonMonotonicBitmapInput";
    case Errc::EmptyHistogram: return "EmptyHistogram";
    case Errc::KindNotApplicable: return "KindNotApplicable";
    case Errc::MixedEncodings: return "MixedEncodings";
    case Errc::EncodingNotApplicable: return "EncodingNotApplicable";
    case Errc::ScratchOverflow: return "ScratchOverflow";
    case Errc::KeyOutOfDomain: return "KeyOutOfDomain";
    case Errc::MissingIndex: return "MissingIndex";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnsupportedFeature: return "UnsupportedFeature";
    case Errc::NotNormalizable: return "NotNormalizable";
    case Errc::UnknownTable: return "UnknownTable";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::AmbiguousAttribute: return "AmbiguousAttribute";
    case Errc::ParameterMismatch: return "ParameterMismatch";
    case Errc::ScaleExceeded: return "ScaleExceeded";
    case Errc::InfeasibleFanout: return "InfeasibleFanout";
    case Errc::Usage: return "Usage";
    case Errc::Io: return "Io";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace fragdb
