#pragma once

#include <string>
#include <string_view>

namespace mcbf {

/// Extended class-K function drawn from a closed set of families so that it
/// serializes exactly into run configs.
///
///   linear:      alpha(r) = c r
///   cubic:       alpha(r) = c r^3
///   scaled_tanh: alpha(r) = c tanh(s r)
///
/// All three are odd, strictly increasing, zero at zero and locally Lipschitz.
class ClassKe {
public:
    enum class Kind { Linear, Cubic, ScaledTanh };

    static ClassKe linear(double c);
    static ClassKe cubic(double c);
    static ClassKe scaled_tanh(double c, double s);

    double operator()(double r) const noexcept;
    double evaluate(double r) const noexcept { return (*this)(r); }

    Kind kind() const noexcept { return kind_; }
    double gain() const noexcept { return c_; }
    double scale() const noexcept { return s_; }

    std::string_view kind_name() const noexcept;
    static Kind parse_kind(std::string_view name);  // throws std::invalid_argument

    bool operator==(const ClassKe&) const = default;

private:
    ClassKe(Kind kind, double c, double s) : kind_(kind), c_(c), s_(s) {}

    Kind kind_;
    double c_;
    double s_;
};

}  // namespace mcbf
