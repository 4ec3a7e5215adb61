#include "quopt/qasm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace quopt {

namespace {

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    int line = 1, col = 1;

    void advance(char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < src.size()) {
            const char c = src[pos];
            if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
                while (pos < src.size() && src[pos] != '\n')
                    advance(src[pos]);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance(c);
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= src.size();
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) { throw QasmError(line, col, msg); }

    char take() {
        skip_ws();
        if (pos >= src.size())
            fail("unexpected end of input");
        const char c = src[pos];
        advance(c);
        return c;
    }

    void expect(char c) {
        const int l = line, k = col;
        const char got = take();
        if (got != c)
            throw QasmError(l, k, std::string("expected '") + c + "', found '" + got + "'");
    }

    bool accept(char c) {
        if (peek() == c) {
            take();
            return true;
        }
        return false;
    }

    std::string ident() {
        skip_ws();
        const int l = line, k = col;
        std::string out;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
            out.push_back(src[pos]);
            advance(src[pos]);
        }
        if (out.empty())
            throw QasmError(l, k, "expected identifier");
        return out;
    }

    double number() {
        skip_ws();
        const int l = line, k = col;
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
                src[pos] == 'e' || src[pos] == 'E' ||
                ((src[pos] == '+' || src[pos] == '-') && pos > start &&
                 (src[pos - 1] == 'e' || src[pos - 1] == 'E')))) {
            advance(src[pos]);
        }
        if (pos == start)
            throw QasmError(l, k, "expected number");
        try {
            return std::stod(std::string(src.substr(start, pos - start)));
        } catch (const std::exception&) {
            throw QasmError(l, k, "malformed number");
        }
    }

    std::size_t index() {
        const double v = number();
        if (v < 0 || v != std::floor(v))
            fail("expected non-negative integer index");
        return static_cast<std::size_t>(v);
    }
};

// expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
// factor := ['-'] (number | 'pi' | '(' expr ')')
double parse_expr(Lexer& lx);

double parse_factor(Lexer& lx) {
    if (lx.accept('-'))
        return -parse_factor(lx);
    if (lx.accept('+'))
        return parse_factor(lx);
    if (lx.accept('(')) {
        const double v = parse_expr(lx);
        lx.expect(')');
        return v;
    }
    const char c = lx.peek();
    if (c == 'p' || c == 'P') {
        const int l = lx.line, k = lx.col;
        std::string id = lx.ident();
        if (id != "pi")
            throw QasmError(l, k, "unknown symbol '" + id + "' in parameter expression");
        return std::numbers::pi;
    }
    return lx.number();
}

double parse_term(Lexer& lx) {
    double v = parse_factor(lx);
    while (true) {
        if (lx.accept('*'))
            v *= parse_factor(lx);
        else if (lx.accept('/'))
            v /= parse_factor(lx);
        else
            return v;
    }
}

double parse_expr(Lexer& lx) {
    double v = parse_term(lx);
    while (true) {
        if (lx.accept('+'))
            v += parse_term(lx);
        else if (lx.accept('-'))
            v -= parse_term(lx);
        else
            return v;
    }
}

struct Alias {
    const char* name;
    const char* base;
    double angle;
};

constexpr Alias kAliases[] = {
    {"t", "rz", std::numbers::pi / 4},   {"tdg", "rz", -std::numbers::pi / 4},
    {"s", "rz", std::numbers::pi / 2},   {"sdg", "rz", -std::numbers::pi / 2},
    {"z", "rz", std::numbers::pi},       {"cnot", "cx", 0.0},
};

} // namespace

Circuit parse_qasm(std::string_view text, const GateSet& gates) {
    Lexer lx{text};
    bool have_qreg = false;
    std::string reg_name;
    Circuit circuit;

    while (!lx.eof()) {
        const int stmt_line = lx.line, stmt_col = lx.col;
        std::string word = lx.ident();

        if (word == "OPENQASM") {
            lx.number();
            lx.expect(';');
            continue;
        }
        if (word == "include") {
            lx.expect('"');
            while (lx.pos < lx.src.size() && lx.src[lx.pos] != '"')
                lx.advance(lx.src[lx.pos]);
            lx.expect('"');
            lx.expect(';');
            continue;
        }
        if (word == "qreg") {
            if (have_qreg)
                throw QasmError(stmt_line, stmt_col, "only one quantum register is supported");
            reg_name = lx.ident();
            lx.expect('[');
            const std::size_t n = lx.index();
            lx.expect(']');
            lx.expect(';');
            circuit = Circuit(static_cast<std::uint32_t>(n));
            have_qreg = true;
            continue;
        }
        if (word == "creg" || word == "measure" || word == "barrier" || word == "if" ||
            word == "reset" || word == "gate") {
            throw QasmError(stmt_line, stmt_col, "unsupported statement '" + word + "'");
        }

        // gate application
        if (!have_qreg)
            throw QasmError(stmt_line, stmt_col, "gate before qreg declaration");

        const GateType* type = gates.find(word);
        double alias_angle = 0.0;
        bool has_alias_angle = false;
        if (!type) {
            for (const Alias& a : kAliases) {
                if (word == a.name) {
                    type = gates.find(a.base);
                    if (type && type->param_count == 1) {
                        alias_angle = a.angle;
                        has_alias_angle = true;
                    }
                    break;
                }
            }
        }
        if (!type)
            throw QasmError(stmt_line, stmt_col,
                            "unknown gate '" + word + "' for gate set " + gates.name());

        std::vector<double> args;
        if (lx.accept('(')) {
            if (has_alias_angle)
                throw QasmError(stmt_line, stmt_col, "alias gate takes no parameter list");
            if (!lx.accept(')')) {
                args.push_back(parse_expr(lx));
                while (lx.accept(','))
                    args.push_back(parse_expr(lx));
                lx.expect(')');
            }
        }
        if (has_alias_angle)
            args.push_back(alias_angle);
        if (static_cast<int>(args.size()) != type->param_count)
            throw QasmError(stmt_line, stmt_col,
                            "gate '" + word + "' expects " + std::to_string(type->param_count) +
                                " parameter(s)");

        std::vector<std::uint32_t> qs;
        do {
            const int ql = lx.line, qc = lx.col;
            std::string rn = lx.ident();
            if (rn != reg_name)
                throw QasmError(ql, qc, "unknown register '" + rn + "'");
            lx.expect('[');
            const std::size_t q = lx.index();
            lx.expect(']');
            if (q >= circuit.num_qubits())
                throw QasmError(ql, qc, "qubit index " + std::to_string(q) + " out of range");
            qs.push_back(static_cast<std::uint32_t>(q));
        } while (lx.accept(','));
        lx.expect(';');

        if (static_cast<int>(qs.size()) != type->arity)
            throw QasmError(stmt_line, stmt_col,
                            "gate '" + word + "' expects " + std::to_string(type->arity) +
                                " qubit(s)");
        if (qs.size() == 2 && qs[0] == qs[1])
            throw QasmError(stmt_line, stmt_col, "repeated qubit argument");

        if (type->param_count == 1) {
            Param p = Param::concrete(args[0]);
            circuit.append(type, qs, &p);
        } else {
            circuit.append(type, qs, nullptr);
        }
    }

    if (!have_qreg)
        throw QasmError(lx.line, lx.col, "missing qreg declaration");
    return circuit;
}

Circuit load_qasm(const std::string& path, const GateSet& gates) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open qasm file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_qasm(buf.str(), gates);
}

std::string emit_qasm(const Circuit& c) {
    std::ostringstream out;
    out << "OPENQASM 2.0;\n";
    out << "include \"qelib1.inc\";\n";
    out << "qreg q[" << c.num_qubits() << "];\n";
    for (GateId id : c.canonical_order()) {
        const Gate& g = c.gate(id);
        out << g.type->name;
        if (g.type->param_count == 1) {
            if (g.param.symbolic)
                throw std::invalid_argument("emit_qasm: symbolic parameter present");
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", g.param.value);
            out << '(' << buf << ')';
        }
        out << ' ';
        for (int p = 0; p < g.arity(); ++p) {
            if (p)
                out << ",";
            out << "q[" << g.wire[p] << "]";
        }
        out << ";\n";
    }
    return out.str();
}

void save_qasm(const Circuit& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write qasm file: " + path);
    out << emit_qasm(c);
}

double parse_param_expression(std::string_view text) {
    Lexer lx{text};
    const double v = parse_expr(lx);
    if (!lx.eof())
        lx.fail("trailing characters in parameter expression");
    return v;
}

} // namespace quopt
