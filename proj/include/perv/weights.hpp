#pragma once

#include "perv/local.hpp"

namespace perv {

enum class WeightVerdict { StronglyWeightZero, HasPositiveWeight, Unknown };
std::string to_string(WeightVerdict v);

struct WeightFactor {
    ZPoly poly;
    int multiplicity = 1;
    std::optional<int> weight;  // absent = Unknown
};

struct WeightReport {
    std::vector<WeightFactor> factors;
    std::optional<int> max_weight, min_weight;
    WeightVerdict verdict = WeightVerdict::Unknown;
    bool fully_determined() const;
};

// Frobenius-weight grading from the characteristic polynomial of the
// designated Frobenius generator.  Rational mode only; degree <= 12.
WeightReport weight_grading(const Representation& r);

// The designated Frobenius action of a representation (single generator of a
// procyclic group, or the F generator of a tame local group).
const Mat& frobenius_action(const Representation& r);

// Maximal subrepresentation of weight <= a: the sum of the generalized
// eigenspaces of the Frobenius charpoly factors of weight <= a.
Representation w_le(const Representation& r, int a);
// Embedding columns of that subrepresentation inside r.
Mat w_le_basis(const Representation& r, int a);

// Weight-<= 0 truncation of a tagged two-term complex: keep the weight
// <= -tag part of each level, then cut the degree-0 level down to the
// preimage of the kept degree-1 level so the result is a subcomplex.
TwoTermComplex omega0_point(const TwoTermComplex& c);

struct TruncatedTwoTerm {
    TwoTermComplex complex;
    Mat incl0, incl1;  // embedding into the original levels
};
TruncatedTwoTerm omega0_point_embedded(const TwoTermComplex& c);

struct NotArtinCertificate {
    int generator = 0;
    ZPoly failing_charpoly;
};

// A generator whose characteristic polynomial is not a product of
// cyclotomics certifies that the representation is not of Artin origin.
std::optional<NotArtinCertificate> not_artin_certificate(const Representation& r);

// Three-valued verdict: certified finite image, certified not Artin, or
// undetermined.
ArtinVerdict artin_verdict(const Representation& r, long order_bound = 4096);

}  // namespace perv
