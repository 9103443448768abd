// Copyright 2026 The telecnot Authors
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

#include "detect_tables.hpp"

namespace tcn::detail {

void run_windows_scalar(const SettingTables& t, std::uint64_t key,
                        std::uint64_t begin, std::uint64_t end,
                        KernelCounts& out) {
  if (begin >= end) return;
  bool prev_f2 = begin == 0 ? false : eval_window(t, key, begin - 1).f2;
  for (std::uint64_t w = begin; w < end; ++w) {
    const WindowOutcome o = eval_window(t, key, w);
    out.total += (o.f1 && o.f2) ? 1 : 0;
    out.accidental += (o.f1 && prev_f2) ? 1 : 0;
    out.singles1 += o.f1 ? 1 : 0;
    out.singles2 += o.f2 ? 1 : 0;
    prev_f2 = o.f2;
  }
}

}  // namespace tcn::detail
