#include "quopt/rules.hpp"

#include "quopt/rulegen.hpp"
#include "quopt/unitary.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace quopt;

namespace {

std::string data_dir() {
    if (const char* env = std::getenv("QUOPT_DATA_DIR"))
        return env;
    return ".";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("save/load round trip preserves indices and graphs") {
    RulegenReport rep;
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2, {}, &rep);
    REQUIRE(rs.size() > 1);

    const auto path = std::filesystem::temp_directory_path() / "quopt_roundtrip.rules";
    save_ruleset(rs, path.string());
    RuleSet back = load_ruleset(path.string());

    REQUIRE(back.size() == rs.size());
    CHECK(back.digest() == rs.digest());
    CHECK(back.max_source_depth == rs.max_source_depth);
    for (std::size_t i = 1; i < rs.size(); ++i) {
        CHECK(back.rules[i].source.canonical_hash() == rs.rules[i].source.canonical_hash());
        CHECK(back.rules[i].target.canonical_hash() == rs.rules[i].target.canonical_hash());
        CHECK(back.rules[i].anchor == rs.rules[i].anchor);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corrupted target fails verification naming the rule") {
    const char* text = R"(quopt-rules v1
gateset nam
rule 1
qubits 1
source 2
h q0
h q0
target 1
x q0
end
)";
    try {
        parse_ruleset(text);
        FAIL("expected verification failure");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("rule 1") != std::string::npos);
        CHECK(msg.find("residual") != std::string::npos);
    }
    // --trust skips the oracle
    RuleSet rs = parse_ruleset(text, /*trust=*/true);
    CHECK(rs.size() == 2);
}

TEST_CASE("malformed files are rejected with line numbers") {
    CHECK_THROWS(parse_ruleset("not a rule file\n"));
    CHECK_THROWS(parse_ruleset("quopt-rules v1\ngateset nope\n"));
    CHECK_THROWS(parse_ruleset("quopt-rules v1\ngateset nam\nrule 7\n")); // bad index
    CHECK_THROWS(parse_ruleset(
        "quopt-rules v1\ngateset nam\nrule 1\nqubits 1\nsource 1\nbad q0\ntarget 0\nend\n"));
}

TEST_CASE("the three ibm single-qubit rules verify") {
    RuleSet rs = load_ruleset(data_dir() + "/rules/ibm_extra.rules");
    CHECK(rs.size() == 4); // NOP + 3
    const VerifyReport rep = verify_ruleset(rs);
    CHECK(rep.rules == 3);
    CHECK(rep.verified == 3);
    CHECK(rep.ok());
    // and they are genuinely phase-equivalent, not exactly equal:
    const Transformation& r1 = rs.rules[1];
    CHECK(equivalent_up_to_phase(r1.source, r1.target));
}

TEST_CASE("target symbols must be bound by the source") {
    const char* text = R"(quopt-rules v1
gateset nam
rule 1
qubits 1
source 1
h q0
target 1
rz s0 q0
end
)";
    CHECK_THROWS(parse_ruleset(text, /*trust=*/true));
}
