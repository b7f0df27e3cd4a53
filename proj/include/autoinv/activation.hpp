#pragma once

#include <cmath>
#include <string>

namespace autoinv {

enum class ActKind {
    Identity,
    Tanh,
    ReLU,
    LeakyReLU,  // param = negative-side slope
    ELU,        // param = alpha
    CELU,       // param = alpha
    Hardswish,
    Softplus,
};

// Activation with an optional shape parameter. Values and derivatives are
// defined for every real input; at the non-differentiable points of the
// piecewise kinds (0 for ReLU/LeakyReLU/ELU, +-3 for Hardswish) the
// derivative takes the x -> x- one-sided limit, so relu'(0) == 0.
struct Activation {
    ActKind kind = ActKind::Identity;
    double param = 0.0;

    static Activation identity() { return {ActKind::Identity, 0.0}; }
    static Activation tanh() { return {ActKind::Tanh, 0.0}; }
    static Activation relu() { return {ActKind::ReLU, 0.0}; }
    static Activation leaky_relu(double slope = 0.01) { return {ActKind::LeakyReLU, slope}; }
    static Activation elu(double alpha = 1.0) { return {ActKind::ELU, alpha}; }
    static Activation celu(double alpha = 1.0) { return {ActKind::CELU, alpha}; }
    static Activation hardswish() { return {ActKind::Hardswish, 0.0}; }
    static Activation softplus() { return {ActKind::Softplus, 0.0}; }

    double value(double x) const {
        switch (kind) {
            case ActKind::Identity: return x;
            case ActKind::Tanh: return std::tanh(x);
            case ActKind::ReLU: return x > 0.0 ? x : 0.0;
            case ActKind::LeakyReLU: return x > 0.0 ? x : param * x;
            case ActKind::ELU: return x > 0.0 ? x : param * std::expm1(x);
            case ActKind::CELU: return x > 0.0 ? x : param * std::expm1(x / param);
            case ActKind::Hardswish:
                if (x <= -3.0) return 0.0;
                if (x >= 3.0) return x;
                return x * (x + 3.0) / 6.0;
            case ActKind::Softplus: return softplus_value(x);
        }
        return x;
    }

    double deriv(double x) const {
        switch (kind) {
            case ActKind::Identity: return 1.0;
            case ActKind::Tanh: {
                const double t = std::tanh(x);
                return 1.0 - t * t;
            }
            case ActKind::ReLU: return x > 0.0 ? 1.0 : 0.0;
            case ActKind::LeakyReLU: return x > 0.0 ? 1.0 : param;
            case ActKind::ELU: return x > 0.0 ? 1.0 : param * std::exp(x);
            case ActKind::CELU: return x > 0.0 ? 1.0 : std::exp(x / param);
            case ActKind::Hardswish:
                if (x <= -3.0) return 0.0;
                if (x <= 3.0) return (2.0 * x + 3.0) / 6.0;
                return 1.0;
            case ActKind::Softplus: return sigmoid(x);
        }
        return 1.0;
    }

    bool has_param() const {
        return kind == ActKind::LeakyReLU || kind == ActKind::ELU || kind == ActKind::CELU;
    }

    static double softplus_value(double x) {
        // log(1 + e^x) without overflow on either tail
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }

    static double sigmoid(double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                        : std::exp(x) / (1.0 + std::exp(x));
    }
};

inline bool operator==(const Activation& a, const Activation& b) {
    return a.kind == b.kind && (!a.has_param() || a.param == b.param);
}

std::string to_string(const Activation& a);
Activation activation_from_string(const std::string& name);

}  // namespace autoinv
