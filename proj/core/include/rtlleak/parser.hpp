// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "rtlleak/ast.hpp"
#include "rtlleak/token.hpp"

namespace rtlleak {

/// Parse all modules out of one file's token stream. Enforces the supported
/// subset: named constructs outside it raise a DiagError of the shape
/// "subset violation: <construct>". Widths are resolved bottom-up before the
/// modules are returned; every identifier must be declared.
std::vector<ModuleDecl> parse_modules(const std::vector<Token>& tokens);

/// Tokenize + parse a set of files into one unit. `top` must name a parsed
/// module. Duplicate module names across files are rejected.
SourceUnit parse_unit(const std::vector<std::pair<std::string, std::string>>& files,
                      const std::string& top);

/// Convenience for tests: single-source unit, top defaults to the first
/// module in the text.
SourceUnit parse_source(const std::string& text, const std::string& top = "");

} // namespace rtlleak
