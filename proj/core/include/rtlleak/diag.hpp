// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rtlleak {

/// 1-based source position. line == 0 means "no location".
struct SourceLoc {
    int line = 0;
    int col = 0;
};

/// Any error a pipeline stage raises on defined-invalid input: lexical and
/// syntax errors, subset violations, elaboration failures, analysis
/// rejections. Carries the location so the CLI can print
/// `file:line:col: message`.
class DiagError : public std::runtime_error {
  public:
    DiagError(std::string message, SourceLoc loc = {}, std::string file = {})
        : std::runtime_error(std::move(message)), loc(loc), file(std::move(file)) {}

    SourceLoc loc;
    std::string file;

    /// `file:line:col: message`, omitting unknown parts.
    std::string formatted() const {
        std::string out;
        if (!file.empty()) out += file + ":";
        if (loc.line > 0) out += std::to_string(loc.line) + ":" + std::to_string(loc.col) + ":";
        if (!out.empty()) out += " ";
        out += what();
        return out;
    }
};

} // namespace rtlleak
