/*
 * Copyright 2026 The rgpis Authors
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

// Minimal CSV helpers shared by the file formats. Fields never contain
// commas or quotes in any format written here.

#include <string>
#include <string_view>
#include <vector>

namespace rgpis::csv {

/// Decimal with 17 significant digits (round-trips every double).
std::string number(double v);

std::vector<std::string> split(std::string_view line);
bool is_blank(std::string_view line);

/// Throw Error(Parse) prefixed with `where` on malformed input.
double parse_double(const std::string& field, const std::string& where);
int parse_int(const std::string& field, const std::string& where);

/// Header row "x1,x2[,x3]" followed by `extra` columns.
std::string coordinate_header(int dim, const std::vector<std::string>& extra);

}  // namespace rgpis::csv
