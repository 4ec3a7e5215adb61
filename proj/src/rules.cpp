#include "quopt/rules.hpp"

#include "quopt/qasm.hpp"
#include "quopt/unitary.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quopt {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

} // namespace

Transformation RuleSet::make_nop() {
    Transformation t;
    t.source = Circuit(0);
    t.target = Circuit(0);
    t.is_nop = true;
    return t;
}

Transformation RuleSet::finish(Circuit source, Circuit target) {
    if (source.num_qubits() != target.num_qubits())
        throw std::invalid_argument("rule: source/target wire counts differ");
    Transformation t;
    t.depth_of_source = static_cast<int>(depth(source));
    if (!source.empty())
        t.anchor = source.canonical_order()[0];
    t.source_covers_wires = true;
    for (std::uint32_t q = 0; q < source.num_qubits(); ++q)
        if (source.wire(q).empty())
            t.source_covers_wires = false;
    t.source = std::move(source);
    t.target = std::move(target);
    return t;
}

std::uint64_t RuleSet::digest() const {
    std::uint64_t h = 0x9277ull;
    for (const Transformation& t : rules) {
        h = mix(h, t.is_nop ? 1 : 0);
        h = mix(h, t.source.canonical_hash());
        h = mix(h, t.target.canonical_hash());
    }
    return h;
}

VerifyReport verify_ruleset(const RuleSet& rs, double tol) {
    VerifyReport rep;
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
        const Transformation& t = rs.rules[i];
        if (t.is_nop)
            continue;
        ++rep.rules;
        const double res = phase_equiv_residual(t.source, t.target);
        if (res <= tol)
            ++rep.verified;
        else
            rep.failures.push_back({i, res});
    }
    return rep;
}

namespace {

void emit_fragment(std::ostream& out, const char* label, const Circuit& frag) {
    out << label << ' ' << frag.gate_count() << '\n';
    for (GateId id : frag.canonical_order()) {
        const Gate& g = frag.gate(id);
        out << g.type->name;
        if (g.type->param_count == 1) {
            if (g.param.symbolic) {
                out << " s" << g.param.symbol;
            } else {
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%.17g", g.param.value);
                out << ' ' << buf;
            }
        }
        for (int p = 0; p < g.arity(); ++p)
            out << " q" << g.wire[p];
        out << '\n';
    }
}

struct LineReader {
    std::istringstream in;
    std::string line;
    int lineno = 0;

    explicit LineReader(std::string_view text) : in{std::string(text)} {}

    bool next() {
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            std::size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos)
                continue;
            std::size_t b = line.find_last_not_of(" \t\r");
            line = line.substr(a, b - a + 1);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("rule file line " + std::to_string(lineno) + ": " + msg);
    }
};

Circuit read_fragment(LineReader& rd, std::size_t n_gates, std::uint32_t nq,
                      const GateSet& gs) {
    Circuit frag(nq);
    for (std::size_t i = 0; i < n_gates; ++i) {
        if (!rd.next())
            rd.fail("unexpected end of fragment");
        std::istringstream ls(rd.line);
        std::string name;
        ls >> name;
        const GateType* type = gs.find(name);
        if (!type)
            rd.fail("unknown gate '" + name + "'");
        Param param;
        if (type->param_count == 1) {
            std::string tok;
            if (!(ls >> tok))
                rd.fail("missing parameter for '" + name + "'");
            if (tok.size() > 1 && tok[0] == 's' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
                param = Param::sym(static_cast<std::uint16_t>(std::stoul(tok.substr(1))));
            } else {
                try {
                    param = Param::concrete(parse_param_expression(tok));
                } catch (const std::exception& e) {
                    rd.fail(std::string("bad parameter: ") + e.what());
                }
            }
        }
        std::vector<std::uint32_t> wires;
        std::string wt;
        while (ls >> wt) {
            if (wt.empty() || wt[0] != 'q')
                rd.fail("expected wire token 'q<i>'");
            wires.push_back(static_cast<std::uint32_t>(std::stoul(wt.substr(1))));
        }
        if (static_cast<int>(wires.size()) != type->arity)
            rd.fail("wire count does not match arity of '" + name + "'");
        for (std::uint32_t w : wires)
            if (w >= nq)
                rd.fail("wire index out of range");
        frag.append(type, wires, type->param_count == 1 ? &param : nullptr);
    }
    return frag;
}

} // namespace

void save_ruleset(const RuleSet& rs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write rule file: " + path);
    out << "quopt-rules v1\n";
    out << "gateset " << rs.gate_set->name() << '\n';
    for (std::size_t i = 1; i < rs.rules.size(); ++i) {
        const Transformation& t = rs.rules[i];
        out << "rule " << i << '\n';
        out << "qubits " << t.source.num_qubits() << '\n';
        emit_fragment(out, "source", t.source);
        emit_fragment(out, "target", t.target);
        out << "end\n";
    }
}

RuleSet parse_ruleset(std::string_view text, bool trust) {
    LineReader rd(text);
    if (!rd.next() || rd.line != "quopt-rules v1")
        rd.fail("missing 'quopt-rules v1' header");
    if (!rd.next() || rd.line.rfind("gateset ", 0) != 0)
        rd.fail("missing 'gateset' line");
    const GateSet* gs = GateSet::by_name(rd.line.substr(8));
    if (!gs)
        rd.fail("unknown gate set '" + rd.line.substr(8) + "'");

    RuleSet rs;
    rs.gate_set = gs;
    rs.rules.push_back(RuleSet::make_nop());

    while (rd.next()) {
        std::istringstream hl(rd.line);
        std::string kw;
        std::size_t idx;
        if (!(hl >> kw >> idx) || kw != "rule")
            rd.fail("expected 'rule <index>'");
        if (idx != rs.rules.size())
            rd.fail("rule index " + std::to_string(idx) + " out of order (expected " +
                    std::to_string(rs.rules.size()) + ")");

        if (!rd.next() || rd.line.rfind("qubits ", 0) != 0)
            rd.fail("expected 'qubits <n>'");
        const auto nq = static_cast<std::uint32_t>(std::stoul(rd.line.substr(7)));

        auto read_header = [&](const char* label) -> std::size_t {
            if (!rd.next())
                rd.fail(std::string("expected '") + label + " <count>'");
            std::istringstream ls(rd.line);
            std::string got;
            std::size_t n;
            if (!(ls >> got >> n) || got != label)
                rd.fail(std::string("expected '") + label + " <count>'");
            return n;
        };
        const std::size_t ns = read_header("source");
        Circuit source = read_fragment(rd, ns, nq, *gs);
        const std::size_t nt = read_header("target");
        Circuit target = read_fragment(rd, nt, nq, *gs);
        if (!rd.next() || rd.line != "end")
            rd.fail("expected 'end'");

        Transformation t = RuleSet::finish(std::move(source), std::move(target));
        if (t.target.symbol_space() > t.source.symbol_space())
            rd.fail("target uses a symbol the source does not bind");
        rs.rules.push_back(std::move(t));
        rs.max_source_depth = std::max(rs.max_source_depth, rs.rules.back().depth_of_source);
    }

    if (!trust) {
        const VerifyReport rep = verify_ruleset(rs);
        if (!rep.ok()) {
            const auto& f = rep.failures.front();
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3e", f.residual);
            throw std::runtime_error("rule " + std::to_string(f.index) +
                                     " failed verification (unitary residual " + buf + ")");
        }
    }
    return rs;
}

RuleSet load_ruleset(const std::string& path, bool trust) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open rule file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_ruleset(buf.str(), trust);
}

} // namespace quopt
