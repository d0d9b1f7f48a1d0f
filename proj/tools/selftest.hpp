/* Copyright (C) 2026 cmgreen contributors
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

#include <nlohmann/json.hpp>

namespace cmgreen::tools {

struct SelftestOptions {
  unsigned long seed = 1;
  bool quick = false;
};

/**
 * Runs every randomized invariant suite. The returned document holds per-suite
 * counts, a digest of the instance list and the failing instances verbatim.
 */
nlohmann::json run_selftest(const SelftestOptions& opt, bool& all_passed);

}  // namespace cmgreen::tools
