// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "rtlleak/dfg.hpp"
#include "rtlleak/elaborate.hpp"
#include "rtlleak/parser.hpp"

namespace rtlleak::test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string corpus_path(const std::string& name) {
    return std::string(RTLLEAK_CORPUS_DIR) + "/" + name;
}

inline DataflowGraph graph_of(const std::string& text, const std::string& secret = "",
                              const std::string& top = "") {
    DataflowGraph g = build_graph(elaborate(parse_source(text, top)));
    if (!secret.empty()) g = label_secret(g, secret);
    return g;
}

inline DataflowGraph corpus_graph(const std::string& file, const std::string& secret) {
    return graph_of(read_file(corpus_path(file)), secret);
}

} // namespace rtlleak::test
