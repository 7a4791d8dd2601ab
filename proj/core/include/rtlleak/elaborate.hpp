// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rtlleak/ast.hpp"

namespace rtlleak {

/// Inline every instance into the top module. Signals of an instance `u1`
/// appear as `u1__sig` in the result; port connections become continuous
/// assignments; nested instances flatten recursively. The result contains no
/// instances and every identifier is declared exactly once (checked).
///
/// Errors: unresolved module, port width mismatch, unknown/unconnected ports,
/// instantiation cycles, prefix name collisions.
ModuleDecl elaborate(const SourceUnit& unit);

} // namespace rtlleak
