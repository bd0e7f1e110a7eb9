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

#include "groundlab/core/error.hpp"

namespace groundlab {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::placement_failed: return "placement-failed";
    case Errc::unknown_attribute: return "unknown-attribute";
    case Errc::ambiguous_target: return "ambiguous-target";
    case Errc::indistinguishable: return "indistinguishable";
    case Errc::infeasible_mixture: return "infeasible-mixture";
    case Errc::missing_index: return "missing-index";
    case Errc::missing_file: return "missing-file";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::checksum_mismatch: return "checksum-mismatch";
    case Errc::fingerprint_mismatch: return "fingerprint-mismatch";
    case Errc::no_head_noun: return "no-head-noun";
    case Errc::no_samples: return "no-samples";
    case Errc::protocol_violation: return "protocol-violation";
    case Errc::nan_loss: return "nan-loss";
    case Errc::unknown_variant: return "unknown-variant";
    case Errc::unknown_key: return "unknown-key";
    case Errc::type_mismatch: return "type-mismatch";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace groundlab
