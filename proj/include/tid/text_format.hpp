#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "tid/network.hpp"
#include "tid/temporal.hpp"

namespace tid {

// On-disk document: a network plus the optional temporal section (default
// policy and transition tables). The format is described in docs/formats.md.
struct NetworkDocument {
    Network net;
    std::optional<TemporalArcPolicy> policy;
    TransitionSpecSet transitions;
};

[[nodiscard]] NetworkDocument parse_network(const std::string& text);
[[nodiscard]] NetworkDocument load_network(const std::string& path);

// Canonical emission: sections in fixed order, variables and nodes sorted by
// id, CPT rows in parent-configuration order. parse(emit(x)) reproduces x and
// emit is a fixed point on its own output.
[[nodiscard]] std::string emit_network(const NetworkDocument& doc);
[[nodiscard]] std::string emit_network(const Network& net);
void save_network(const NetworkDocument& doc, const std::string& path);

// "A=yes, B=no" -> assignment; used for CLI evidence flags.
[[nodiscard]] Assignment parse_assignment(const std::string& text);

[[nodiscard]] std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace tid
