#include "autoinv/activation.hpp"

#include <cstdio>
#include <stdexcept>

namespace autoinv {
namespace {

double parse_param(const std::string& name, std::size_t open) {
    if (name.back() != ')') throw std::invalid_argument("malformed activation name: " + name);
    return std::stod(name.substr(open + 1, name.size() - open - 2));
}

}  // namespace

std::string to_string(const Activation& a) {
    char buf[64];
    switch (a.kind) {
        case ActKind::Identity: return "identity";
        case ActKind::Tanh: return "tanh";
        case ActKind::ReLU: return "relu";
        case ActKind::LeakyReLU:
            std::snprintf(buf, sizeof buf, "leaky_relu(%.17g)", a.param);
            return buf;
        case ActKind::ELU:
            std::snprintf(buf, sizeof buf, "elu(%.17g)", a.param);
            return buf;
        case ActKind::CELU:
            std::snprintf(buf, sizeof buf, "celu(%.17g)", a.param);
            return buf;
        case ActKind::Hardswish: return "hardswish";
        case ActKind::Softplus: return "softplus";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::identity();
    if (name == "tanh") return Activation::tanh();
    if (name == "relu") return Activation::relu();
    if (name == "hardswish") return Activation::hardswish();
    if (name == "softplus") return Activation::softplus();
    const std::size_t open = name.find('(');
    const std::string base = name.substr(0, open);
    if (base == "leaky_relu") {
        return Activation::leaky_relu(open == std::string::npos ? 0.01 : parse_param(name, open));
    }
    if (base == "elu") {
        return Activation::elu(open == std::string::npos ? 1.0 : parse_param(name, open));
    }
    if (base == "celu") {
        return Activation::celu(open == std::string::npos ? 1.0 : parse_param(name, open));
    }
    throw std::invalid_argument("unknown activation name: " + name);
}

}  // namespace autoinv
