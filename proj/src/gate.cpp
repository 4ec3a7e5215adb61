#include "quopt/gate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quopt {

namespace {

using cplx = std::complex<double>;
constexpr double kInvSqrt2 = 0.70710678118654752440;

void u_h(const double*, cplx* out) {
    out[0] = kInvSqrt2;
    out[1] = kInvSqrt2;
    out[2] = kInvSqrt2;
    out[3] = -kInvSqrt2;
}

void u_x(const double*, cplx* out) {
    out[0] = 0;
    out[1] = 1;
    out[2] = 1;
    out[3] = 0;
}

void u_sx(const double*, cplx* out) {
    // sqrt(X)
    out[0] = cplx(0.5, 0.5);
    out[1] = cplx(0.5, -0.5);
    out[2] = cplx(0.5, -0.5);
    out[3] = cplx(0.5, 0.5);
}

void u_rz(const double* p, cplx* out) {
    const double half = p[0] / 2.0;
    out[0] = cplx(std::cos(half), -std::sin(half));
    out[1] = 0;
    out[2] = 0;
    out[3] = cplx(std::cos(half), std::sin(half));
}

void u_cx(const double*, cplx* out) {
    // basis |control target>, port 0 = control
    for (int i = 0; i < 16; ++i)
        out[i] = 0;
    out[0 * 4 + 0] = 1;
    out[1 * 4 + 1] = 1;
    out[2 * 4 + 3] = 1;
    out[3 * 4 + 2] = 1;
}

} // namespace

GateSet::GateSet(std::string name, std::vector<GateType> types)
    : name_(std::move(name)), types_(std::move(types)) {}

const GateType* GateSet::find(std::string_view gate_name) const {
    for (const GateType& t : types_)
        if (t.name == gate_name)
            return &t;
    return nullptr;
}

std::size_t GateSet::index_of(const GateType* t) const {
    for (std::size_t i = 0; i < types_.size(); ++i)
        if (&types_[i] == t)
            return i;
    throw std::invalid_argument("gate type not in this gate set");
}

const GateSet& GateSet::nam() {
    static const GateSet set("nam", {
                                        {"cx", 2, 0, u_cx},
                                        {"x", 1, 0, u_x},
                                        {"h", 1, 0, u_h},
                                        {"rz", 1, 1, u_rz},
                                    });
    return set;
}

const GateSet& GateSet::ibm() {
    static const GateSet set("ibm", {
                                        {"cx", 2, 0, u_cx},
                                        {"rz", 1, 1, u_rz},
                                        {"x", 1, 0, u_x},
                                        {"sx", 1, 0, u_sx},
                                    });
    return set;
}

const GateSet* GateSet::by_name(std::string_view n) {
    if (n == "nam")
        return &nam();
    if (n == "ibm")
        return &ibm();
    return nullptr;
}

ErrorModel ErrorModel::ibm_washington() {
    ErrorModel em;
    em.rate["cx"] = 1.214e-2;
    em.rate["rz"] = 0.0;
    em.rate["x"] = 2.77e-4;
    em.rate["sx"] = 2.77e-4;
    return em;
}

ErrorModel ErrorModel::parse(std::string_view text) {
    ErrorModel em;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string name, eq;
        double rate;
        if (!(ls >> name))
            continue; // blank
        if (!(ls >> eq) || eq != "=" || !(ls >> rate))
            throw std::invalid_argument("error model line " + std::to_string(lineno) +
                                        ": expected 'gate_name = rate'");
        if (rate < 0.0 || rate > 1.0)
            throw std::invalid_argument("error model line " + std::to_string(lineno) +
                                        ": rate outside [0, 1]");
        em.rate[name] = rate;
    }
    return em;
}

ErrorModel ErrorModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open error model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

} // namespace quopt
