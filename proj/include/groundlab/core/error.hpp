// Copyright 2026 The groundlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundlab {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  placement_failed,
  unknown_attribute,
  ambiguous_target,
  indistinguishable,
  infeasible_mixture,
  missing_index,
  missing_file,
  version_mismatch,
  checksum_mismatch,
  fingerprint_mismatch,
  no_head_noun,
  no_samples,
  protocol_violation,
  nan_loss,
  unknown_variant,
  unknown_key,
  type_mismatch,
  io_error,
};

/// Stable kebab-case name used in error records and messages.
std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace groundlab
