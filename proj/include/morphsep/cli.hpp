// SPDX-License-Identifier: Apache-2.0
//
// morphsep - morphological component separation for acoustic time series
// Copyright (C) 2026 The morphsep authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

namespace morphsep {

/// Command-line entry point. Returns 0 on success, 1 on a runtime failure
/// (including a failed experiment threshold) and 2 on a usage error.
int cli_main(int argc, char** argv);

}  // namespace morphsep
