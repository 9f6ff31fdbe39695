#pragma once

#include <string>

#include <json.hpp>

#include "sievenet/activation.hpp"
#include "sievenet/network.hpp"

// JSON (de)serialization for the network value types. nlohmann::json emits
// shortest round-trip decimals, so double fields survive a dump/parse cycle
// bit-exactly.

namespace sievenet {

inline void to_json(nlohmann::json& j, const ActivationSpec& a) {
    j = nlohmann::json{{"breakpoints", a.breakpoints},
                       {"slopes", a.slopes},
                       {"value_at_zero", a.value_at_zero}};
}

inline void from_json(const nlohmann::json& j, ActivationSpec& a) {
    j.at("breakpoints").get_to(a.breakpoints);
    j.at("slopes").get_to(a.slopes);
    j.at("value_at_zero").get_to(a.value_at_zero);
    a.validate();
}

inline void to_json(nlohmann::json& j, const ArchitectureSpec& arch) {
    j = nlohmann::json{{"depth", arch.depth},
                       {"widths", arch.widths},
                       {"input_dim", arch.input_dim},
                       {"bound", arch.bound},
                       {"activation", arch.activation}};
}

inline void from_json(const nlohmann::json& j, ArchitectureSpec& arch) {
    j.at("depth").get_to(arch.depth);
    j.at("widths").get_to(arch.widths);
    j.at("input_dim").get_to(arch.input_dim);
    j.at("bound").get_to(arch.bound);
    j.at("activation").get_to(arch.activation);
    arch.validate();
}

inline void to_json(nlohmann::json& j, const NetworkParams& p) {
    j = nlohmann::json{{"arch", p.arch}, {"gamma", p.gamma}};
}

inline void from_json(const nlohmann::json& j, NetworkParams& p) {
    j.at("arch").get_to(p.arch);
    j.at("gamma").get_to(p.gamma);
    p.validate();
}

inline std::string params_to_json(const NetworkParams& p, int indent = -1) {
    return nlohmann::json(p).dump(indent);
}

inline NetworkParams params_from_json(const std::string& text) {
    return nlohmann::json::parse(text).get<NetworkParams>();
}

}  // namespace sievenet
