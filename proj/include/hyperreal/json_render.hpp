#pragma once

// JSON views of values and verdicts, following schema/hyperreal.schema.json.

#include <json.hpp>

#include <hyperreal/hyperreal.hpp>

namespace hyperreal
{

using Json = nlohmann::ordered_json;

inline Json element_json(const Element &e)
{
    if (element_exact(e)) {
        return Json{{"exact", true}, {"value", std::get<Rational>(e).get_str()}};
    }
    return Json{{"exact", false}, {"value", std::get<double>(e)}};
}

inline Json bounds_json(const Bounds &b)
{
    return Json{{"lo", b.lo.to_string()}, {"hi", b.hi.to_string()}, {"lo_open", b.lo_open}, {"hi_open", b.hi_open}};
}

inline Json symbolic_json(const Symbolic &s)
{
    Json terms = Json::array();
    Json atoms = Json::array();
    for (const auto &t : s.terms()) {
        Json term{{"c", t.scale.c.to_string()},
                  {"p", t.scale.p.to_string()},
                  {"q", t.scale.q.to_string()},
                  {"coeff", t.coeff.to_string()}};
        if (t.atom) {
            term["atom"] = t.atom->key;
            Json a{{"kind", atom_kind_name(t.atom->kind)}, {"text", Symbolic::of_atom(t.atom).to_string()}};
            try {
                a["enclosure"] = bounds_json(atom_bounds(*t.atom));
            } catch (const Error &) {
                a["enclosure"] = nullptr;
            }
            atoms.push_back(a);
        } else {
            term["atom"] = nullptr;
        }
        terms.push_back(term);
    }
    return Json{{"text", s.to_string()}, {"terms", terms}, {"atoms", atoms}};
}

inline Json verdict_json(const OrderVerdict &v)
{
    Json cert{{"kind", certificate_kind_name(v.cert.kind)}, {"modulus", v.cert.modulus}, {"detail", v.cert.detail}};
    cert["witness"] = v.cert.witness ? Json(v.cert.witness->get_str()) : Json(nullptr);
    Json j{{"verdict", v.word()}, {"certificate", cert}};
    if (!v.known) {
        j["horizon"] = v.horizon;
    }
    return j;
}

inline Json truth_json(const TruthValue &t)
{
    Json cert{{"kind", certificate_kind_name(t.cert.kind)}, {"modulus", t.cert.modulus}, {"detail", t.cert.detail}};
    cert["witness"] = t.cert.witness ? Json(t.cert.witness->get_str()) : Json(nullptr);
    return Json{{"truth", t.to_string()}, {"certificate", cert}};
}

inline Json value_json(const Hyperreal &h, std::uint64_t prefix = 8)
{
    Json j;
    if (h.is_sequence_only()) {
        j["kind"] = "sequence";
    } else if (h.is_periodic()) {
        j["kind"] = "periodic";
    } else {
        j["kind"] = "symbolic";
    }
    j["text"] = h.to_string();
    if (!h.is_sequence_only() && !h.is_periodic()) {
        const Json s = symbolic_json(h.symbolic());
        j["terms"] = s["terms"];
        j["atoms"] = s["atoms"];
    } else {
        j["terms"] = Json::array();
        j["atoms"] = Json::array();
    }
    if (h.is_periodic()) {
        Json branches = Json::array();
        for (unsigned long r = 0; r < h.form().modulus; ++r) {
            branches.push_back(Json{{"residue", r}, {"value", h.form().residue(r).to_string()}});
        }
        j["modulus"] = h.form().modulus;
        j["branches"] = branches;
    }
    Json det{{"proof_tag", proof_tag_name(h.proof_tag())}, {"valid_from", h.valid_from().get_str()}};
    try {
        det["classification"] = classification_name(hr_classify(h));
    } catch (const Error &) {
        det["classification"] = "unknown";
    }
    j["determinacy"] = det;
    Json elems = Json::array();
    for (std::uint64_t n = 1; n <= prefix; ++n) {
        elems.push_back(element_json(h.element(n)));
    }
    j["prefix"] = elems;
    return j;
}

} // namespace hyperreal
