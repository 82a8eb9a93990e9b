#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "perv/document.hpp"

using namespace perv;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("E_IO", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Document load(const std::string& path, std::ostream& os, int& rc) {
    ParseResult pr = parse_document(read_file(path));
    if (!pr.ok()) {
        for (const auto& e : pr.errors)
            os << "parse error (line " << e.line << ", " << e.code << "): " << e.message << "\n";
        rc = 1;
        fail("E_PARSE", "document rejected");
    }
    return std::move(*pr.doc);
}

const HeartObject& object_of(const Document& doc, const std::string& name) {
    auto it = doc.objects.find(name);
    if (it == doc.objects.end()) fail("E_NAME", "unknown object '" + name + "'");
    return it->second;
}

const DocMorphism& morphism_of(const Document& doc, const std::string& name) {
    auto it = doc.morphisms.find(name);
    if (it == doc.morphisms.end()) fail("E_NAME", "unknown morphism '" + name + "'");
    return it->second;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch engine for glued perverse data on one-dimensional bases"};
    app.require_subcommand(1);

    std::string doc_path, out_path;
    unsigned long seed = 0;
    bool strict = false;
    app.add_option("--out", out_path, "write the report to a file");
    app.add_option("--seed", seed, "seed for randomized helpers (default 0)");
    app.add_flag("--strict", strict, "require Artin certificates everywhere");

    auto* c_validate = app.add_subcommand("validate", "validate every object of a document");
    c_validate->add_option("document", doc_path)->required();

    auto* c_functor = app.add_subcommand("functor", "apply a gluing functor to a named object");
    std::string functor_name, functor_obj, functor_point;
    c_functor->add_option("name", functor_name, "jshriek|jstar|omega0jstar|intermediate|jupperstar|iupperstar|iuppershriek")->required();
    c_functor->add_option("object", functor_obj)->required();
    c_functor->add_option("document", doc_path)->required();
    c_functor->add_option("--point", functor_point, "point for i^* / i^!");

    auto* c_hom = app.add_subcommand("hom", "hom module between two objects");
    std::string hom_a, hom_b;
    c_hom->add_option("a", hom_a)->required();
    c_hom->add_option("b", hom_b)->required();
    c_hom->add_option("document", doc_path)->required();

    auto* c_kernel = app.add_subcommand("kernel", "kernel of a named morphism");
    std::string mor_name;
    c_kernel->add_option("morphism", mor_name)->required();
    c_kernel->add_option("document", doc_path)->required();

    auto* c_cokernel = app.add_subcommand("cokernel", "cokernel of a named morphism");
    c_cokernel->add_option("morphism", mor_name)->required();
    c_cokernel->add_option("document", doc_path)->required();

    auto* c_factors = app.add_subcommand("factors", "composition factors of an object");
    std::string obj_name;
    c_factors->add_option("object", obj_name)->required();
    c_factors->add_option("document", doc_path)->required();

    auto* c_weights = app.add_subcommand("weights", "weight reports for an object");
    c_weights->add_option("object", obj_name)->required();
    c_weights->add_option("document", doc_path)->required();

    auto* c_sequence = app.add_subcommand("sequence", "localization sequence of an object");
    c_sequence->add_option("object", obj_name)->required();
    c_sequence->add_option("document", doc_path)->required();

    auto* c_examples = app.add_subcommand("examples", "emit a worked-example document");
    std::string preset_name;
    c_examples->add_option("preset", preset_name, "p1|spec_zp|node|sqrt5")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::ostringstream os;
    int rc = 0;
    try {
        if (c_examples->parsed()) {
            Document doc = make_example_document(preset_name);
            os << serialize_document(doc);
        } else if (c_validate->parsed()) {
            Document doc = load(doc_path, os, rc);
            for (const auto& [name, o] : doc.objects) {
                ObjectReport r = validate_object(o, strict);
                os << "object " << name << ": " << describe_report(r);
                if (!r.valid) rc = 1;
            }
            for (const auto& [name, dm] : doc.morphisms) {
                try {
                    validate_morphism(dm.morphism);
                    os << "morphism " << name << ": valid\n";
                } catch (const Error& e) {
                    os << "morphism " << name << ": invalid (" << e.what() << ")\n";
                    rc = 1;
                }
            }
        } else if (c_functor->parsed()) {
            Document doc = load(doc_path, os, rc);
            const HeartObject& o = object_of(doc, functor_obj);
            BranchSections secs;
            for (const auto& [n, r] : o.branches) secs.emplace(n, r);
            if (functor_name == "jshriek") {
                os << describe_object(functor_obj + ".jshriek", j_shriek(doc.curve, secs, doc.mode));
            } else if (functor_name == "jstar") {
                os << describe_object(functor_obj + ".jstar", j_star(doc.curve, secs, doc.mode));
            } else if (functor_name == "omega0jstar") {
                os << describe_object(functor_obj + ".omega0jstar", omega0_jstar(doc.curve, secs, doc.mode));
            } else if (functor_name == "intermediate") {
                os << describe_object(functor_obj + ".intermediate",
                                      intermediate_extension(doc.curve, secs, doc.mode));
            } else if (functor_name == "jupperstar") {
                for (const auto& [n, r] : j_upper_star(o))
                    os << "branch " << n << ": module "
                       << describe_module(r.carrier().to_module(doc.mode), doc.mode) << "\n";
            } else if (functor_name == "iupperstar") {
                if (functor_point.empty()) fail("E_NAME", "--point required");
                TwoTermComplex c = i_upper_star(o, functor_point);
                os << "i^* at " << functor_point << ": "
                   << describe_module(c.c0.to_module(doc.mode), doc.mode) << " -> "
                   << describe_module(c.c1.to_module(doc.mode), doc.mode) << "\n";
            } else if (functor_name == "iuppershriek") {
                if (functor_point.empty()) fail("E_NAME", "--point required");
                RepComplex c = i_upper_shriek(o, functor_point);
                os << "i^! at " << functor_point << ": degrees [" << c.lo() << ", " << c.hi() << "]";
                for (int n = c.lo(); n <= c.hi(); ++n)
                    os << " H^" << n << "=" << describe_module(c.cohomology(n).carrier().to_module(doc.mode), doc.mode);
                os << "\n";
            } else {
                fail("E_NAME", "unknown functor '" + functor_name + "'");
            }
        } else if (c_hom->parsed()) {
            Document doc = load(doc_path, os, rc);
            HeartHom hom = hom_module(object_of(doc, hom_a), object_of(doc, hom_b));
            os << "hom(" << hom_a << ", " << hom_b << ") = " << describe_module(hom.module, doc.mode)
               << " with " << hom.basis.size() << " basis morphisms\n";
        } else if (c_kernel->parsed() || c_cokernel->parsed()) {
            Document doc = load(doc_path, os, rc);
            const DocMorphism& dm = morphism_of(doc, mor_name);
            if (c_kernel->parsed()) {
                KernelResult k = kernel_heart(dm.morphism);
                os << describe_object("ker(" + mor_name + ")", k.object);
                os << "zero: " << (k.object.is_zero() ? "yes" : "no") << "\n";
            } else {
                CokernelResult k = cokernel_heart(dm.morphism);
                os << describe_object("coker(" + mor_name + ")", k.object);
                os << "zero: " << (k.object.is_zero() ? "yes" : "no") << "\n";
            }
        } else if (c_factors->parsed()) {
            Document doc = load(doc_path, os, rc);
            auto factors = composition_factors(object_of(doc, obj_name));
            os << "length " << factors.size() << "\n";
            for (size_t i = 0; i < factors.size(); ++i)
                os << describe_object("factor " + std::to_string(i + 1), factors[i]);
        } else if (c_weights->parsed()) {
            Document doc = load(doc_path, os, rc);
            const HeartObject& o = object_of(doc, obj_name);
            for (const auto& [n, r] : o.branches) {
                os << "branch " << n << ": ";
                if (!r.frobenius_weight_base() ||
                    r.group()->kind == GroupPresentation::Kind::FreeProfinite) {
                    os << "no designated Frobenius\n";
                    continue;
                }
                WeightReport wr = weight_grading(r);
                os << to_string(wr.verdict);
                for (const auto& f : wr.factors) {
                    os << " [" << poly_to_string(f.poly) << "]^" << f.multiplicity << " w=";
                    if (f.weight)
                        os << *f.weight;
                    else
                        os << "?";
                }
                os << "\n";
            }
            for (const auto& [n, pp] : o.points) {
                os << "point " << n << ": H0 verdict "
                   << to_string(artin_verdict(h0(pp.complex).rep)) << ", H1 verdict "
                   << to_string(artin_verdict(h1(pp.complex).rep)) << " (tag +" << pp.complex.weight_tag1
                   << ")\n";
            }
        } else if (c_sequence->parsed()) {
            Document doc = load(doc_path, os, rc);
            LocalizationSequence seq = localization_sequence(object_of(doc, obj_name));
            os << describe_object("i_* H^-1 i^*", seq.sub_skyscraper);
            os << describe_object("j_! j^*", seq.jshriek_part);
            os << describe_object("i_* H^0 i^*", seq.quot_skyscraper);
            os << "exact: " << (seq.exact ? "yes" : "no") << "\n";
            for (const auto& s : seq.notes) os << "  " << s << "\n";
            if (!seq.exact) rc = 1;
        }
    } catch (const Error& e) {
        if (std::string(e.code()) != "E_PARSE") {
            os << "error: " << e.what() << "\n";
            rc = (e.code() == "E_NAME" || e.code() == "E_IO") ? 2 : 1;
        }
    }

    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << os.str();
    }
    return rc;
}
