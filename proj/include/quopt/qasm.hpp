#pragma once

#include "quopt/circuit.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace quopt {

struct QasmError : std::runtime_error {
    int line;
    int col;
    QasmError(int line_, int col_, const std::string& msg)
        : std::runtime_error("qasm:" + std::to_string(line_) + ":" + std::to_string(col_) + ": " +
                             msg),
          line(line_), col(col_) {}
};

// OpenQASM 2.0 subset: one quantum register, gates from the given set (plus
// the aliases t/tdg/s/sdg/z for rz constants and cnot for cx), no classical
// registers, no measurement, no conditionals. Gate order in the returned
// circuit matches statement order.
Circuit parse_qasm(std::string_view text, const GateSet& gates);
Circuit load_qasm(const std::string& path, const GateSet& gates);

// Header plus one statement per gate in canonical topological order.
// Parameters are printed with enough digits to round-trip exactly.
std::string emit_qasm(const Circuit& c);
void save_qasm(const Circuit& c, const std::string& path);

// Arithmetic over numbers and pi ("3*pi/2", "-pi/4", "0.25"); also used by
// the rule-file loader.
double parse_param_expression(std::string_view text);

} // namespace quopt
