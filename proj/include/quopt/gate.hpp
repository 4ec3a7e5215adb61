#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace quopt {

// A rotation parameter: either a concrete angle in radians or a symbolic slot
// (used by rewrite-rule fragments before a match binds them).
struct Param {
    bool symbolic = false;
    double value = 0.0;
    std::uint16_t symbol = 0;

    static Param concrete(double v) { return {false, v, 0}; }
    static Param sym(std::uint16_t s) { return {true, 0.0, s}; }

    friend bool operator==(const Param& a, const Param& b) {
        if (a.symbolic != b.symbolic)
            return false;
        return a.symbolic ? a.symbol == b.symbol : a.value == b.value;
    }
};

// Immutable description of a gate kind. unitary fills a row-major
// 2^arity x 2^arity matrix from the concrete parameter values.
struct GateType {
    std::string name;
    int arity = 1;       // 1 or 2
    int param_count = 0; // 0 or 1
    void (*unitary)(const double* params, std::complex<double>* out) = nullptr;
};

// A fixed universe of gate types with stable addresses.
class GateSet {
public:
    GateSet(std::string name, std::vector<GateType> types);

    const std::string& name() const { return name_; }
    const GateType* find(std::string_view gate_name) const; // nullptr when unknown
    const std::vector<GateType>& types() const { return types_; }
    std::size_t index_of(const GateType* t) const; // position in types()

    // {cx, x, h, rz}
    static const GateSet& nam();
    // {cx, rz, x, sx}
    static const GateSet& ibm();
    // nullptr when the name is neither "nam" nor "ibm"
    static const GateSet* by_name(std::string_view n);

private:
    std::string name_;
    std::vector<GateType> types_;
};

// Per gate-type error rates for the product fidelity metric.
struct ErrorModel {
    std::map<std::string, double, std::less<>> rate;

    // IBM Washington calibration values.
    static ErrorModel ibm_washington();
    // One "name = rate" per line; '#' starts a comment.
    static ErrorModel parse(std::string_view text);
    static ErrorModel load(const std::string& path);
};

} // namespace quopt
