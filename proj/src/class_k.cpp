#include "mcbf/class_k.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcbf {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("class-K parameter ") + what + " must be finite and > 0");
    }
}

}  // namespace

ClassKe ClassKe::linear(double c) {
    require_positive(c, "c");
    return {Kind::Linear, c, 1.0};
}

ClassKe ClassKe::cubic(double c) {
    require_positive(c, "c");
    return {Kind::Cubic, c, 1.0};
}

ClassKe ClassKe::scaled_tanh(double c, double s) {
    require_positive(c, "c");
    require_positive(s, "s");
    return {Kind::ScaledTanh, c, s};
}

double ClassKe::operator()(double r) const noexcept {
    switch (kind_) {
        case Kind::Linear:
            return c_ * r;
        case Kind::Cubic:
            return c_ * r * r * r;
        case Kind::ScaledTanh:
            return c_ * std::tanh(s_ * r);
    }
    return 0.0;
}

std::string_view ClassKe::kind_name() const noexcept {
    switch (kind_) {
        case Kind::Linear:
            return "linear";
        case Kind::Cubic:
            return "cubic";
        case Kind::ScaledTanh:
            return "scaled_tanh";
    }
    return "linear";
}

ClassKe::Kind ClassKe::parse_kind(std::string_view name) {
    if (name == "linear") return Kind::Linear;
    if (name == "cubic") return Kind::Cubic;
    if (name == "scaled_tanh") return Kind::ScaledTanh;
    throw std::invalid_argument("unknown class-K kind '" + std::string(name) + "'");
}

}  // namespace mcbf
