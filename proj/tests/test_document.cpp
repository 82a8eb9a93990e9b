#include "doctest.h"
#include "perv/document.hpp"
#include "test_util.hpp"

using namespace perv;

TEST_CASE("round trip on the worked examples") {
    for (const std::string preset : {"p1", "spec_zp", "node", "sqrt5"}) {
        CAPTURE(preset);
        Document doc = make_example_document(preset);
        std::string text = serialize_document(doc);
        ParseResult pr = parse_document(text);
        for (const auto& e : pr.errors) {
            CAPTURE(e.line);
            CAPTURE(e.message);
            CHECK(e.code == "");
        }
        REQUIRE(pr.ok());
        CHECK(serialize_document(*pr.doc) == text);  // byte-stable
        for (const auto& [name, o] : pr.doc->objects) CHECK(validate_object(o, true).valid);
    }
}

TEST_CASE("reports are stable under reordering of unrelated entries") {
    Document doc = make_example_document("p1");
    std::string text = serialize_document(doc);
    // swap the two object blocks in the source text
    size_t m = text.find("object M\n");
    size_t n = text.find("object N\n");
    REQUIRE(m < n);
    size_t mor = text.find("morphism ");
    std::string header = text.substr(0, m);
    std::string blockM = text.substr(m, n - m);
    std::string blockN = text.substr(n, mor - n);
    std::string tail = text.substr(mor);
    std::string swapped = header + blockN + blockM + tail;
    ParseResult pr = parse_document(swapped);
    REQUIRE(pr.ok());
    CHECK(serialize_document(*pr.doc) == text);
}

TEST_CASE("empty object section is a valid document") {
    ParseResult pr = parse_document("schema 1\nmode rational\ncurve preset node\n");
    CHECK(pr.ok());
    CHECK(pr.doc->objects.empty());
}

TEST_CASE("non-reduced fractions are rejected with a position") {
    std::string text =
        "schema 1\n"
        "mode rational\n"
        "curve preset p1 1\n"
        "object M\n"
        "branch eta\n"
        "module 1\n"
        "gen : 2/4\n"
        "point x1\n"
        "level0 0\nlevel1 0\ndiff :\nf0 :\nf1 :\n"
        "point inf\n"
        "level0 0\nlevel1 0\ndiff :\nf0 :\nf1 :\n"
        "end\n";
    ParseResult pr = parse_document(text);
    REQUIRE(!pr.ok());
    bool found = false;
    for (const auto& e : pr.errors)
        if (e.code == "E_FRACTION" && e.line == 7) found = true;
    CHECK(found);
}

TEST_CASE("bad references get stable codes") {
    std::string text =
        "schema 1\n"
        "mode rational\n"
        "curve preset p1 1\n"
        "object M\n"
        "branch nowhere\n"
        "module 1\n"
        "gen : 1\n"
        "end\n";
    ParseResult pr = parse_document(text);
    REQUIRE(!pr.ok());
    CHECK(pr.errors[0].code == "E_NAME");
}

TEST_CASE("chain mode documents") {
    std::string text =
        "schema 1\n"
        "mode chain 3 2\n"
        "curve preset node\n"
        "object M\n"
        "branch eta1\nmodule 1\ngen : 2\n"
        "branch eta2\nmodule 1\ngen : 1\n"
        "point x\n"
        "level0 0\nlevel1 1\ntags 0 0\ndiff :\nf0 :\nf1 : 0 0\n"
        "end\n";
    ParseResult pr = parse_document(text);
    for (const auto& e : pr.errors) {
        CAPTURE(e.message);
        CHECK(e.code == "");
    }
    REQUIRE(pr.ok());
    const HeartObject& o = pr.doc->objects.at("M");
    CHECK(o.mode.is_chain());
    CHECK(o.points.at("x").complex.c1.rank == 1);
    std::string text2 = serialize_document(*pr.doc);
    ParseResult pr2 = parse_document(text2);
    REQUIRE(pr2.ok());
    CHECK(serialize_document(*pr2.doc) == text2);
}

TEST_CASE("morphism blocks parse and validate") {
    Document doc = make_example_document("p1");
    std::string text = serialize_document(doc);
    ParseResult pr = parse_document(text);
    REQUIRE(pr.ok());
    REQUIRE(pr.doc->morphisms.count("can"));
    const DocMorphism& dm = pr.doc->morphisms.at("can");
    CHECK(dm.source == "M");
    CHECK(dm.target == "N");
    CHECK_NOTHROW(validate_morphism(dm.morphism));
}
