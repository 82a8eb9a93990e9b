#pragma once

#include "perv/heart.hpp"

namespace perv {

// Named morphism entry of a document.
struct DocMorphism {
    std::string source, target;
    HeartMorphism morphism;
};

// A batch document: coefficient mode, one curve, named objects and
// morphisms.  Parsing validates everything before any operation runs.
struct Document {
    std::string schema = "1";
    CoeffMode mode = CoeffMode::rationals();
    CurvePtr curve;
    std::vector<std::string> curve_decl;  // tokens after "curve"
    std::map<std::string, HeartObject> objects;
    std::map<std::string, DocMorphism> morphisms;
};

struct ParseError {
    int line = 0;
    std::string code;
    std::string message;
};

struct ParseResult {
    std::optional<Document> doc;
    std::vector<ParseError> errors;
    bool ok() const { return errors.empty() && doc.has_value(); }
};

ParseResult parse_document(const std::string& text);
std::string serialize_document(const Document& doc);

// Deterministic structure reports.
std::string describe_module(const CanonicalModule& m, const CoeffMode& mode);
std::string describe_object(const std::string& name, const HeartObject& o);
std::string describe_report(const ObjectReport& r);

// The worked examples as ready-made documents (the golden files).
Document make_example_document(const std::string& preset);

}  // namespace perv
