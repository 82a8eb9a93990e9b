#include "perv/document.hpp"

#include <sstream>

namespace perv {

namespace {

struct Tok {
    int line;
    std::vector<std::string> words;
};

std::vector<Tok> tokenize(const std::string& text) {
    std::vector<Tok> out;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        Tok t;
        t.line = ln;
        std::string w;
        while (ls >> w) t.words.push_back(w);
        if (!t.words.empty()) out.push_back(std::move(t));
    }
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

    ParseResult run();

private:
    std::vector<Tok> toks_;
    size_t pos_ = 0;
    ParseResult res_;
    Document doc_;

    bool done() const { return pos_ >= toks_.size(); }
    const Tok& cur() const { return toks_[pos_]; }
    void advance() { ++pos_; }
    void err(int line, const std::string& code, const std::string& msg) {
        res_.errors.push_back({line, code, msg});
    }

    long to_int(const std::string& w, int line) {
        try {
            size_t p = 0;
            long v = std::stol(w, &p);
            if (p != w.size()) throw std::invalid_argument("trail");
            return v;
        } catch (...) {
            err(line, "E_NUMBER", "expected an integer, got '" + w + "'");
            return 0;
        }
    }

    Word parse_word(const std::vector<std::string>& ws, size_t from, size_t to, int line) {
        Word w;
        for (size_t i = from; i < to; ++i) w.push_back(int(to_int(ws[i], line)));
        return w;
    }

    // entries after a ':' token
    std::vector<mpq_class> parse_entries(const std::vector<std::string>& ws, size_t from, int line) {
        std::vector<mpq_class> out;
        for (size_t i = from; i < ws.size(); ++i) {
            try {
                mpq_class v = scalar_from_string(ws[i]);
                if (doc_.mode.is_chain()) v = doc_.mode.reduce(v);
                out.push_back(v);
            } catch (const Error& e) {
                err(line, e.code(), e.what());
                out.push_back(0);
            }
        }
        return out;
    }

    Mat entries_to_mat(const std::vector<mpq_class>& e, int rows, int cols, int line) {
        if (int(e.size()) != rows * cols) {
            err(line, "E_SHAPE",
                "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(e.size()));
            return Mat(rows, cols);
        }
        Mat m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m.at(i, j) = e[size_t(i * cols + j)];
        return m;
    }

    void parse_header();
    void parse_curve();
    void parse_object();
    void parse_morphism();

    // boundary-map entries are shaped against targets that need every branch,
    // so they resolve in a second pass
    struct PendingF {
        std::vector<mpq_class> f0, f1;
        int line;
    };
    std::map<std::string, PendingF> pending_f_;
};

size_t find_colon(const std::vector<std::string>& ws) {
    for (size_t i = 0; i < ws.size(); ++i)
        if (ws[i] == ":") return i;
    return ws.size();
}

void Parser::parse_header() {
    if (done() || cur().words[0] != "schema") {
        err(done() ? 0 : cur().line, "E_SCHEMA", "document must start with 'schema 1'");
        return;
    }
    if (cur().words.size() != 2 || cur().words[1] != "1") {
        err(cur().line, "E_SCHEMA", "unsupported schema version");
        return;
    }
    advance();
    if (done() || cur().words[0] != "mode") {
        err(done() ? 0 : cur().line, "E_MODE", "expected 'mode rational' or 'mode chain <ell> <N>'");
        return;
    }
    const Tok& t = cur();
    if (t.words.size() == 2 && t.words[1] == "rational") {
        doc_.mode = CoeffMode::rationals();
    } else if (t.words.size() == 4 && t.words[1] == "chain") {
        try {
            doc_.mode = CoeffMode::chain(mpz_class(t.words[2]), unsigned(to_int(t.words[3], t.line)));
        } catch (const Error& e) {
            err(t.line, e.code(), e.what());
        } catch (...) {
            err(t.line, "E_MODE", "malformed chain mode");
        }
    } else {
        err(t.line, "E_MODE", "malformed mode line");
    }
    advance();
}

void Parser::parse_curve() {
    if (done() || cur().words[0] != "curve") {
        err(done() ? 0 : cur().line, "E_CURVE", "expected a curve declaration");
        return;
    }
    const Tok& t = cur();
    std::vector<std::string> decl(t.words.begin() + 1, t.words.end());
    int cline = t.line;
    advance();
    try {
        if (decl.empty()) fail("E_CURVE", "empty curve declaration");
        if (decl[0] == "preset") {
            if (decl.size() < 2) fail("E_CURVE", "preset name missing");
            if (decl[1] == "p1") {
                if (decl.size() != 3) fail("E_CURVE", "usage: curve preset p1 <punctures>");
                doc_.curve = std::make_shared<CurvePresentation>(p1_preset(int(to_int(decl[2], cline))));
            } else if (decl[1] == "spec_zp") {
                if (decl.size() != 3) fail("E_CURVE", "usage: curve preset spec_zp <p>");
                doc_.curve = std::make_shared<CurvePresentation>(spec_zp_preset(mpz_class(decl[2])));
            } else if (decl[1] == "node") {
                doc_.curve = std::make_shared<CurvePresentation>(node_preset());
            } else if (decl[1] == "sqrt5") {
                doc_.curve = std::make_shared<CurvePresentation>(sqrt5_preset());
            } else {
                fail("E_CURVE", "unknown preset '" + decl[1] + "'");
            }
            doc_.curve_decl = decl;
        } else if (decl[0] == "custom") {
            CurvePresentation c;
            c.name = "custom";
            while (!done() && cur().words[0] != "end") {
                const Tok& u = cur();
                const auto& w = u.words;
                if (w[0] == "branch") {
                    if (w.size() < 3) fail("E_CURVE", "malformed branch line");
                    BranchData b;
                    b.name = w[1];
                    if (w[2] == "free") {
                        if (w.size() < 4) fail("E_CURVE", "free branch needs a generator count");
                        bool prod = w.size() > 4 && w[4] == "product";
                        b.group = GroupPresentation::free_profinite(int(to_int(w[3], u.line)), prod);
                    } else if (w[2] == "zhat") {
                        b.group = GroupPresentation::zhat();
                    } else if (w[2] == "tame") {
                        if (w.size() < 4) fail("E_CURVE", "tame branch needs q");
                        b.group = GroupPresentation::local_tame(mpz_class(w[3]));
                    } else if (w[2] == "perm") {
                        if (w.size() < 5) fail("E_CURVE", "perm branch needs degree and generators");
                        int deg = int(to_int(w[3], u.line));
                        size_t c0 = find_colon(w);
                        std::vector<std::vector<int>> perms;
                        std::vector<int> flat;
                        for (size_t i = c0 + 1; i < w.size(); ++i) {
                            if (w[i] == ";") continue;
                            flat.push_back(int(to_int(w[i], u.line)));
                        }
                        if (deg <= 0 || flat.size() % size_t(deg) != 0)
                            fail("E_CURVE", "permutation entries do not fill whole generators");
                        for (size_t i = 0; i < flat.size(); i += size_t(deg))
                            perms.emplace_back(flat.begin() + long(i), flat.begin() + long(i) + deg);
                        b.group = GroupPresentation::finite_explicit(perms);
                    } else {
                        fail("E_CURVE", "unknown branch kind '" + w[2] + "'");
                    }
                    c.branches.push_back(std::move(b));
                } else if (w[0] == "point") {
                    if (w.size() < 3) fail("E_CURVE", "malformed point line");
                    PointData p;
                    p.name = w[1];
                    if (w[2] == "closed") {
                        p.residue = ResidueDescriptor::closed_field();
                    } else if (w[2] == "finite" && w.size() == 4) {
                        p.residue = ResidueDescriptor::finite_field(mpz_class(w[3]));
                    } else {
                        fail("E_CURVE", "unknown residue kind");
                    }
                    c.points.push_back(std::move(p));
                } else if (w[0] == "slot") {
                    // slot <name> <branch> <point> index <d> t : <word> [F : <word>]
                    if (w.size() < 8) fail("E_CURVE", "malformed slot line");
                    SlotData s;
                    s.name = w[1];
                    s.branch = w[2];
                    s.point = w[3];
                    if (w[4] != "index") fail("E_CURVE", "slot line expects 'index <d>'");
                    s.residue_index = int(to_int(w[5], u.line));
                    size_t i = 6;
                    if (w[i] != "t") fail("E_CURVE", "slot line expects 't : <word>'");
                    i += 2;  // skip 't :'
                    size_t stop = w.size();
                    for (size_t j = i; j < w.size(); ++j)
                        if (w[j] == "F") {
                            stop = j;
                            break;
                        }
                    s.phi_t = parse_word(w, i, stop, u.line);
                    if (stop < w.size()) s.phi_frob = parse_word(w, stop + 2, w.size(), u.line);
                    c.slots.push_back(std::move(s));
                } else {
                    fail("E_CURVE", "unknown curve item '" + w[0] + "'");
                }
                advance();
            }
            if (done()) fail("E_CURVE", "curve block missing 'end'");
            advance();  // end
            doc_.curve = std::make_shared<CurvePresentation>(std::move(c));
            doc_.curve_decl = {"custom"};
        } else {
            fail("E_CURVE", "expected 'preset' or 'custom'");
        }
        CurveReport cr = validate_curve(*doc_.curve, doc_.mode);
        if (!cr.valid)
            for (const auto& s : cr.failures) err(cline, "E_CURVE", s);
    } catch (const Error& e) {
        err(cline, e.code(), e.what());
    }
}

void Parser::parse_object() {
    const Tok& head = cur();
    if (head.words.size() != 2) {
        err(head.line, "E_OBJECT", "usage: object <name>");
        advance();
        return;
    }
    std::string name = head.words[1];
    int oline = head.line;
    advance();
    HeartObject o;
    o.curve = doc_.curve;
    o.mode = doc_.mode;
    auto parse_carrier = [&](const std::vector<std::string>& w, size_t from, int line) {
        Carrier c;
        c.rank = 0;
        int fr = int(to_int(w[from], line));
        std::vector<unsigned> tors;
        for (size_t i = from + 1; i < w.size(); ++i) {
            if (w[i] == "torsion") continue;
            tors.push_back(unsigned(to_int(w[i], line)));
        }
        CanonicalModule m = make_module(fr, tors, doc_.mode);
        return Carrier::from_module(m, doc_.mode);
    };
    try {
        while (!done() && cur().words[0] != "end") {
            const Tok& t = cur();
            const auto& w = t.words;
            if (w[0] == "branch") {
                std::string bn = w[1];
                const BranchData* bd = doc_.curve->find_branch(bn);
                if (!bd) fail("E_NAME", "unknown branch '" + bn + "'");
                advance();
                Carrier carrier;
                std::optional<mpz_class> wb;
                std::vector<Mat> gens;
                while (!done() && cur().words[0] != "branch" && cur().words[0] != "point" &&
                       cur().words[0] != "end") {
                    const Tok& u = cur();
                    if (u.words[0] == "module") {
                        carrier = parse_carrier(u.words, 1, u.line);
                    } else if (u.words[0] == "weightbase") {
                        wb = mpz_class(u.words[1]);
                    } else if (u.words[0] == "gen") {
                        auto e = parse_entries(u.words, find_colon(u.words) + 1, u.line);
                        gens.push_back(entries_to_mat(e, carrier.rank, carrier.rank, u.line));
                    } else {
                        fail("E_OBJECT", "unknown branch item '" + u.words[0] + "'");
                    }
                    advance();
                }
                if (int(gens.size()) != bd->group->num_generators())
                    fail("E_OBJECT", "branch '" + bn + "' needs " +
                                         std::to_string(bd->group->num_generators()) + " generators");
                o.branches.emplace(bn, Representation(bd->group, carrier, gens, doc_.mode, wb));
            } else if (w[0] == "point") {
                std::string pn = w[1];
                const PointData* pd = doc_.curve->find_point(pn);
                if (!pd) fail("E_NAME", "unknown point '" + pn + "'");
                advance();
                HeartPointPart pp;
                pp.complex.mode = doc_.mode;
                pp.complex.residual = pd->residue.algebraically_closed ? GroupPresentation::trivial()
                                                                       : GroupPresentation::zhat();
                if (!pd->residue.algebraically_closed) pp.complex.weight_base = pd->residue.q;
                std::vector<mpq_class> d_e, f0_e, f1_e;
                std::vector<std::vector<mpq_class>> a0_e, a1_e;
                int dline = 0, fline = 0;
                while (!done() && cur().words[0] != "branch" && cur().words[0] != "point" &&
                       cur().words[0] != "end") {
                    const Tok& u = cur();
                    if (u.words[0] == "level0") {
                        pp.complex.c0 = parse_carrier(u.words, 1, u.line);
                    } else if (u.words[0] == "level1") {
                        pp.complex.c1 = parse_carrier(u.words, 1, u.line);
                    } else if (u.words[0] == "tags") {
                        pp.complex.weight_tag0 = int(to_int(u.words[1], u.line));
                        pp.complex.weight_tag1 = int(to_int(u.words[2], u.line));
                    } else if (u.words[0] == "diff") {
                        d_e = parse_entries(u.words, find_colon(u.words) + 1, u.line);
                        dline = u.line;
                    } else if (u.words[0] == "act0") {
                        a0_e.push_back(parse_entries(u.words, find_colon(u.words) + 1, u.line));
                    } else if (u.words[0] == "act1") {
                        a1_e.push_back(parse_entries(u.words, find_colon(u.words) + 1, u.line));
                    } else if (u.words[0] == "f0") {
                        f0_e = parse_entries(u.words, find_colon(u.words) + 1, u.line);
                        fline = u.line;
                    } else if (u.words[0] == "f1") {
                        f1_e = parse_entries(u.words, find_colon(u.words) + 1, u.line);
                        fline = u.line;
                    } else {
                        fail("E_OBJECT", "unknown point item '" + u.words[0] + "'");
                    }
                    advance();
                }
                pp.complex.d = entries_to_mat(d_e, pp.complex.c1.rank, pp.complex.c0.rank, dline);
                int ng = pp.complex.residual->num_generators();
                if (int(a0_e.size()) != ng || int(a1_e.size()) != ng)
                    fail("E_OBJECT", "point '" + pn + "' needs " + std::to_string(ng) +
                                         " residual actions per level");
                for (int g = 0; g < ng; ++g) {
                    pp.complex.act0.push_back(
                        entries_to_mat(a0_e[size_t(g)], pp.complex.c0.rank, pp.complex.c0.rank, oline));
                    pp.complex.act1.push_back(
                        entries_to_mat(a1_e[size_t(g)], pp.complex.c1.rank, pp.complex.c1.rank, oline));
                }
                // boundary target shape is known after all branches parse;
                // defer f matrices by storing raw entries
                pp.f0 = Mat(0, 0);
                pp.f1 = Mat(0, 0);
                o.points.emplace(pn, pp);
                // stash entries for the second pass
                pending_f_[name + "/" + pn] = {f0_e, f1_e, fline};
            } else {
                fail("E_OBJECT", "unknown object item '" + w[0] + "'");
            }
        }
        if (done()) fail("E_OBJECT", "object block missing 'end'");
        advance();  // end
        if (doc_.objects.count(name)) fail("E_NAME", "duplicate object name '" + name + "'");
        doc_.objects.emplace(name, std::move(o));
    } catch (const Error& e) {
        err(oline, e.code(), e.what());
        // skip to end of block
        while (!done() && cur().words[0] != "end") advance();
        if (!done()) advance();
    }
}

void Parser::parse_morphism() {
    const Tok& head = cur();
    if (head.words.size() != 4) {
        err(head.line, "E_MORPHISM", "usage: morphism <name> <src> <tgt>");
        advance();
        return;
    }
    std::string name = head.words[1], sn = head.words[2], tn = head.words[3];
    int mline = head.line;
    advance();
    try {
        auto si = doc_.objects.find(sn);
        auto ti = doc_.objects.find(tn);
        if (si == doc_.objects.end()) fail("E_NAME", "unknown source object '" + sn + "'");
        if (ti == doc_.objects.end()) fail("E_NAME", "unknown target object '" + tn + "'");
        HeartMorphism m = zero_morphism(si->second, ti->second);
        while (!done() && cur().words[0] != "end") {
            const Tok& t = cur();
            const auto& w = t.words;
            if (w[0] == "branch") {
                std::string bn = w[1];
                auto e = parse_entries(w, find_colon(w) + 1, t.line);
                m.branch_maps[bn] = entries_to_mat(e, ti->second.branches.at(bn).rank(),
                                                   si->second.branches.at(bn).rank(), t.line);
                advance();
            } else if (w[0] == "point") {
                std::string pn = w[1];
                advance();
                HeartPointMap& pm = m.point_maps.at(pn);
                const auto& sp = si->second.points.at(pn).complex;
                const auto& tp = ti->second.points.at(pn).complex;
                TwoTermComplex tb = ti->second.target_at(pn);
                while (!done() && cur().words[0] != "branch" && cur().words[0] != "point" &&
                       cur().words[0] != "end") {
                    const Tok& u = cur();
                    auto e = parse_entries(u.words, find_colon(u.words) + 1, u.line);
                    if (u.words[0] == "m0")
                        pm.m0 = entries_to_mat(e, tp.c0.rank, sp.c0.rank, u.line);
                    else if (u.words[0] == "m1")
                        pm.m1 = entries_to_mat(e, tp.c1.rank, sp.c1.rank, u.line);
                    else if (u.words[0] == "h")
                        pm.h = entries_to_mat(e, tb.c0.rank, sp.c1.rank, u.line);
                    else
                        fail("E_MORPHISM", "unknown point map item '" + u.words[0] + "'");
                    advance();
                }
            } else {
                fail("E_MORPHISM", "unknown morphism item '" + w[0] + "'");
            }
        }
        if (done()) fail("E_MORPHISM", "morphism block missing 'end'");
        advance();
        validate_morphism(m);
        if (doc_.morphisms.count(name)) fail("E_NAME", "duplicate morphism name '" + name + "'");
        doc_.morphisms.emplace(name, DocMorphism{sn, tn, std::move(m)});
    } catch (const Error& e) {
        err(mline, e.code(), e.what());
        while (!done() && cur().words[0] != "end") advance();
        if (!done()) advance();
    }
}

ParseResult Parser::run() {
    parse_header();
    if (!res_.errors.empty()) return std::move(res_);
    parse_curve();
    if (!res_.errors.empty()) return std::move(res_);
    while (!done()) {
        if (cur().words[0] == "object") {
            parse_object();
        } else if (cur().words[0] == "morphism") {
            parse_morphism();
        } else {
            err(cur().line, "E_SYNTAX", "unexpected top-level item '" + cur().words[0] + "'");
            advance();
        }
    }
    // second pass: resolve boundary maps now that all branch data is parsed
    for (auto& [key, trip] : pending_f_) {
        size_t slash = key.find('/');
        std::string on = key.substr(0, slash), pn = key.substr(slash + 1);
        auto it = doc_.objects.find(on);
        if (it == doc_.objects.end()) continue;
        HeartObject& o = it->second;
        HeartPointPart& pp = o.points.at(pn);
        TwoTermComplex target = o.target_at(pn);
        Mat f0(target.c0.rank, pp.complex.c0.rank);
        Mat f1(target.c1.rank, pp.complex.c1.rank);
        if (int(trip.f0.size()) == f0.rows() * f0.cols() && int(trip.f1.size()) == f1.rows() * f1.cols()) {
            for (int i = 0; i < f0.rows(); ++i)
                for (int j = 0; j < f0.cols(); ++j) f0.at(i, j) = trip.f0[size_t(i * f0.cols() + j)];
            for (int i = 0; i < f1.rows(); ++i)
                for (int j = 0; j < f1.cols(); ++j) f1.at(i, j) = trip.f1[size_t(i * f1.cols() + j)];
            pp.f0 = f0;
            pp.f1 = f1;
        } else {
            err(trip.line, "E_SHAPE", "boundary map of '" + key + "' has the wrong entry count");
        }
    }
    if (!res_.errors.empty()) return std::move(res_);
    // full validation
    for (auto& [name, o] : doc_.objects) {
        ObjectReport r = validate_object(o, false);
        if (!r.valid)
            for (const auto& s : r.failures) err(0, "E_OBJECT", "object '" + name + "': " + s);
    }
    if (res_.errors.empty()) res_.doc = std::move(doc_);
    return std::move(res_);
}

}  // namespace

ParseResult parse_document(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string mat_entries(const Mat& m) {
    std::ostringstream os;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) os << " " << scalar_to_string(m.at(i, j));
    return os.str();
}

std::string carrier_decl(const Carrier& c, const CoeffMode& mode) {
    std::ostringstream os;
    CanonicalModule m = c.to_module(mode);
    os << m.free_rank;
    if (!m.torsion_exponents.empty()) {
        os << " torsion";
        for (unsigned e : m.torsion_exponents) os << " " << e;
    }
    return os.str();
}

}  // namespace

std::string serialize_document(const Document& doc) {
    std::ostringstream os;
    os << "schema 1\n";
    os << "mode " << doc.mode.to_string() << "\n";
    os << "curve";
    for (const auto& w : doc.curve_decl) os << " " << w;
    os << "\n";
    if (!doc.curve_decl.empty() && doc.curve_decl[0] == "custom") {
        const CurvePresentation& c = *doc.curve;
        for (const auto& b : c.branches) {
            os << "branch " << b.name << " ";
            switch (b.group->kind) {
                case GroupPresentation::Kind::FreeProfinite:
                    os << "free " << b.group->num_generators();
                    if (b.group->product_relation) os << " product";
                    break;
                case GroupPresentation::Kind::ZhatFrobenius: os << "zhat"; break;
                case GroupPresentation::Kind::LocalTame: os << "tame " << b.group->q.get_str(); break;
                case GroupPresentation::Kind::FiniteExplicit: {
                    os << "perm " << b.group->perms[0].size() << " :";
                    for (const auto& p : b.group->perms) {
                        for (int v : p) os << " " << v;
                        if (&p != &b.group->perms.back()) os << " ;";
                    }
                    break;
                }
                case GroupPresentation::Kind::Trivial: os << "trivial"; break;
            }
            os << "\n";
        }
        for (const auto& p : c.points) {
            os << "point " << p.name << " ";
            if (p.residue.algebraically_closed)
                os << "closed";
            else
                os << "finite " << p.residue.q.get_str();
            os << "\n";
        }
        for (const auto& s : c.slots) {
            os << "slot " << s.name << " " << s.branch << " " << s.point << " index " << s.residue_index
               << " t :";
            for (int v : s.phi_t) os << " " << v;
            if (!s.phi_frob.empty()) {
                os << " F :";
                for (int v : s.phi_frob) os << " " << v;
            }
            os << "\n";
        }
        os << "end\n";
    }
    for (const auto& [name, o] : doc.objects) {
        os << "object " << name << "\n";
        for (const auto& b : o.curve->branches) {
            const Representation& rep = o.branches.at(b.name);
            os << "branch " << b.name << "\n";
            os << "module " << carrier_decl(rep.carrier(), o.mode) << "\n";
            if (rep.frobenius_weight_base()) os << "weightbase " << rep.frobenius_weight_base()->get_str() << "\n";
            for (const Mat& g : rep.actions()) os << "gen :" << mat_entries(g) << "\n";
        }
        for (const auto& p : o.curve->points) {
            const HeartPointPart& pp = o.points.at(p.name);
            os << "point " << p.name << "\n";
            os << "level0 " << carrier_decl(pp.complex.c0, o.mode) << "\n";
            os << "level1 " << carrier_decl(pp.complex.c1, o.mode) << "\n";
            os << "tags " << pp.complex.weight_tag0 << " " << pp.complex.weight_tag1 << "\n";
            os << "diff :" << mat_entries(pp.complex.d) << "\n";
            for (const Mat& a : pp.complex.act0) os << "act0 :" << mat_entries(a) << "\n";
            for (const Mat& a : pp.complex.act1) os << "act1 :" << mat_entries(a) << "\n";
            os << "f0 :" << mat_entries(pp.f0) << "\n";
            os << "f1 :" << mat_entries(pp.f1) << "\n";
        }
        os << "end\n";
    }
    for (const auto& [name, dm] : doc.morphisms) {
        os << "morphism " << name << " " << dm.source << " " << dm.target << "\n";
        const HeartMorphism& m = dm.morphism;
        for (const auto& b : doc.curve->branches)
            os << "branch " << b.name << " :" << mat_entries(m.branch_maps.at(b.name)) << "\n";
        for (const auto& p : doc.curve->points) {
            const HeartPointMap& pm = m.point_maps.at(p.name);
            os << "point " << p.name << "\n";
            os << "m0 :" << mat_entries(pm.m0) << "\n";
            os << "m1 :" << mat_entries(pm.m1) << "\n";
            os << "h :" << mat_entries(pm.h) << "\n";
        }
        os << "end\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Reports

std::string describe_module(const CanonicalModule& m, const CoeffMode& mode) {
    std::string s = m.structure_string(mode);
    if (m.precision_saturated) s += " (precision saturated)";
    return s;
}

std::string describe_object(const std::string& name, const HeartObject& o) {
    std::ostringstream os;
    os << "object " << name << "\n";
    for (const auto& b : o.curve->branches) {
        const Representation& rep = o.branches.at(b.name);
        os << "  branch " << b.name << ": " << b.group->describe() << ", module "
           << describe_module(rep.carrier().to_module(o.mode), o.mode) << "\n";
    }
    for (const auto& p : o.curve->points) {
        const HeartPointPart& pp = o.points.at(p.name);
        TaggedRep t0 = h0(pp.complex);
        TaggedRep t1 = h1(pp.complex);
        os << "  point " << p.name << ": levels ("
           << describe_module(pp.complex.c0.to_module(o.mode), o.mode) << " -> "
           << describe_module(pp.complex.c1.to_module(o.mode), o.mode) << "), H0 "
           << describe_module(t0.rep.carrier().to_module(o.mode), o.mode) << ", H1 "
           << describe_module(t1.rep.carrier().to_module(o.mode), o.mode) << "\n";
    }
    return os.str();
}

std::string describe_report(const ObjectReport& r) {
    std::ostringstream os;
    os << (r.valid ? "valid" : "invalid") << "\n";
    for (const auto& s : r.failures) os << "  failure: " << s << "\n";
    for (const auto& [k, v] : r.verdicts) os << "  " << k << ": " << to_string(v) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Worked examples

namespace {

Mat m2(long a, long b, long c, long d) {
    Mat m(2, 2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    return m;
}

Mat m1(long a) {
    Mat m(1, 1);
    m.at(0, 0) = a;
    return m;
}

}  // namespace

Document make_example_document(const std::string& preset) {
    Document doc;
    doc.mode = CoeffMode::rationals();
    const CoeffMode& q = doc.mode;
    if (preset == "p1") {
        doc.curve = std::make_shared<CurvePresentation>(p1_preset(2));
        doc.curve_decl = {"preset", "p1", "2"};
        // dihedral monodromy: rotation and swap
        BranchSections secs;
        GroupPtr g = doc.curve->find_branch("eta")->group;
        secs.emplace("eta", Representation(g, Carrier::free_of(2, q), {m2(0, -1, 1, 0), m2(0, 1, 1, 0)}, q));
        doc.objects.emplace("M", intermediate_extension(doc.curve, secs, q));
        doc.objects.emplace("N", j_star(doc.curve, secs, q));
        // canonical inclusion j_!* -> j_*
        const HeartObject& m = doc.objects.at("M");
        const HeartObject& n = doc.objects.at("N");
        HeartMorphism can = zero_morphism(m, n);
        for (auto& [bn, bm] : can.branch_maps) bm = Mat::identity(m.branches.at(bn).rank());
        for (auto& [pn, pm] : can.point_maps) pm.m0 = m.points.at(pn).f0;
        validate_morphism(can);
        doc.morphisms.emplace("can", DocMorphism{"M", "N", can});
        return doc;
    }
    if (preset == "spec_zp") {
        doc.curve = std::make_shared<CurvePresentation>(spec_zp_preset(3));
        doc.curve_decl = {"preset", "spec_zp", "3"};
        GroupPtr g = doc.curve->find_branch("eta")->group;
        // order-4 inertia with F t F^{-1} = t^3 = t^{-1}: dihedral image
        Representation mrep(g, Carrier::free_of(2, q), {m2(0, -1, 1, 0), m2(1, 0, 0, -1)}, q);
        BranchSections secs;
        secs.emplace("eta", mrep);
        HeartObject o = j_shriek(doc.curve, secs, q);
        // add a skyscraper summand: N = [0 -> Q] with trivial Frobenius
        Representation v = Representation::trivial_rep(GroupPresentation::zhat(), 1, q);
        v.set_frobenius_weight_base(3);
        o = o.direct_sum(i_star(doc.curve, "x", v, q));
        doc.objects.emplace("M", o);
        return doc;
    }
    if (preset == "node") {
        doc.curve = std::make_shared<CurvePresentation>(node_preset());
        doc.curve_decl = {"preset", "node"};
        BranchSections secs;
        secs.emplace("eta1", Representation(doc.curve->find_branch("eta1")->group,
                                            Carrier::free_of(1, q), {m1(-1)}, q));
        secs.emplace("eta2", Representation(doc.curve->find_branch("eta2")->group,
                                            Carrier::free_of(2, q), {m2(0, 1, 1, 0)}, q));
        doc.objects.emplace("M", intermediate_extension(doc.curve, secs, q));
        doc.objects.emplace("N", j_star(doc.curve, secs, q));
        return doc;
    }
    if (preset == "sqrt5") {
        doc.curve = std::make_shared<CurvePresentation>(sqrt5_preset());
        doc.curve_decl = {"preset", "sqrt5"};
        GroupPtr g = doc.curve->find_branch("eta")->group;
        // trivial inertia, order-4 Frobenius of the tame quotient
        Representation mrep(g, Carrier::free_of(2, q), {m2(1, 0, 0, 1), m2(0, -1, 1, 0)}, q);
        mrep.set_frobenius_weight_base(4);
        BranchSections secs;
        secs.emplace("eta", mrep);
        doc.objects.emplace("M", j_star(doc.curve, secs, q));
        doc.objects.emplace("E", intermediate_extension(doc.curve, secs, q));
        return doc;
    }
    fail("E_NAME", "unknown example preset '" + preset + "'");
}

}  // namespace perv
