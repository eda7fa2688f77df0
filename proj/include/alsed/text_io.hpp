// include/alsed/text_io.hpp

// Copyright 2026  The alsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ALSED_TEXT_IO_HPP_
#define ALSED_TEXT_IO_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace alsed {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double v, int digits);

/// Splits one comma-separated line; no quoting.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace alsed

#endif  // ALSED_TEXT_IO_HPP_
