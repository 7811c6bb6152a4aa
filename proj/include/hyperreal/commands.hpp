#pragma once

// Command runner behind the CLI: eval, compare, shadow, classify, sequence, audit.
// Exit status: 0 determinate, 2 unknown, 1 error.

#include <iomanip>
#include <sstream>

#include <hyperreal/eval.hpp>
#include <hyperreal/json_render.hpp>

namespace hyperreal::cli
{

using dsl::Definitions;
using dsl::NodePtr;

struct Options
{
    bool json = false;
    std::optional<std::uint64_t> prefix;
    std::uint64_t horizon = default_horizon;
    bool shadow = false;
    int precision = 12;
    bool unicode = false;
};

struct Outcome
{
    std::string text; // without a trailing newline
    int status = 0;
};

namespace detail
{

inline std::string element_text(const Element &e, int precision)
{
    if (element_exact(e)) {
        return std::get<Rational>(e).get_str();
    }
    std::ostringstream os;
    os << std::setprecision(precision) << std::get<double>(e);
    return os.str();
}

inline std::string determinacy_text(const Hyperreal &h)
{
    if (h.is_sequence_only()) {
        return "sequence-only";
    }
    std::string s = proof_tag_name(h.proof_tag());
    if (h.proof_tag() == ProofTag::eventually_equal) {
        s += " from n=" + h.valid_from().get_str();
    }
    if (h.is_periodic()) {
        s += ", case split mod " + std::to_string(h.form().modulus);
    }
    return s;
}

inline std::string certificate_text(const Certificate &c)
{
    std::string s = certificate_kind_name(c.kind);
    if (c.witness) {
        s += "; from n=" + c.witness->get_str();
    }
    if (c.modulus > 1) {
        s += "; modulus " + std::to_string(c.modulus);
    }
    if (!c.detail.empty()) {
        s += "; " + c.detail;
    }
    return s;
}

inline int truth_status(const TruthValue &t)
{
    return t.truth == Truth::unknown ? 2 : 0;
}

inline std::vector<NodePtr> parse_all(const std::vector<std::string> &args)
{
    std::vector<NodePtr> out;
    for (const auto &a : args) {
        auto xs = dsl::parse_many(a);
        out.insert(out.end(), xs.begin(), xs.end());
    }
    return out;
}

inline void arity(const std::vector<NodePtr> &xs, std::size_t n, const std::string &usage)
{
    if (xs.size() != n) {
        fail(ErrorCode::parse_error, "expected " + std::to_string(n) + " expression" + (n == 1 ? "" : "s") +
                                         ", got " + std::to_string(xs.size()) + "; usage: " + usage);
    }
}

class Runner
{
public:
    Runner(const Options &o, Definitions defs) : opt_(o), ev_(std::move(defs)) { ev_.horizon = o.horizon; }

    Outcome run(const std::string &verb, const std::vector<std::string> &args)
    {
        json_ = Json{{"command", verb}};
        std::vector<NodePtr> xs;
        if (verb == "audit") {
            if (args.empty()) {
                fail(ErrorCode::parse_error,
                     "audit needs a kind: ftc, pareto, overtaking, anonymity, partition, subset, identities, discrepancy");
            }
            json_["audit"] = args[0];
            xs = parse_all(std::vector<std::string>(args.begin() + 1, args.end()));
        } else {
            xs = parse_all(args);
        }
        Json inputs = Json::array();
        for (const auto &x : xs) {
            inputs.push_back(dsl::render(*x));
        }
        json_["input"] = inputs;

        Outcome o;
        if (verb == "eval") o = eval(xs);
        else if (verb == "compare") o = compare_cmd(xs);
        else if (verb == "shadow") o = shadow_cmd(xs);
        else if (verb == "classify") o = classify_cmd(xs);
        else if (verb == "sequence") o = sequence_cmd(xs);
        else if (verb == "audit") o = audit(args[0], xs);
        else fail(ErrorCode::parse_error, "unknown command '" + verb + "'");
        if (opt_.json) {
            json_["status"] = o.status;
            o.text = json_.dump(2);
        }
        return o;
    }

private:
    Options opt_;
    dsl::Evaluator ev_;
    Json json_;

    std::string text(const Hyperreal &h) const { return h.to_string(opt_.unicode); }

    std::string text(const Symbolic &s) const { return s.to_string(opt_.unicode ? "ω" : "w"); }

    Json value(const Hyperreal &h) const { return value_json(h, opt_.prefix.value_or(8)); }

    std::string prefix_line(const Hyperreal &h, std::uint64_t k) const
    {
        std::string s = "prefix:";
        for (std::uint64_t n = 1; n <= k; ++n) {
            s += (n == 1 ? " " : ", ") + element_text(h.element(n), opt_.precision);
        }
        return s;
    }

    // value text, then determinacy, then the prefix when asked for or when it is all there is
    std::string block(const Hyperreal &h) const
    {
        std::string s = text(h) + "\ndeterminacy: " + determinacy_text(h);
        if (opt_.shadow) {
            std::string sh;
            try {
                sh = text(hr_shadow(h));
            } catch (const Error &e) {
                sh = "unavailable (" + std::string(e.what()) + ")";
            }
            s += "\nshadow: " + sh;
        }
        if (opt_.prefix || h.is_sequence_only()) {
            s += "\n" + prefix_line(h, opt_.prefix.value_or(8));
        }
        return s;
    }

    Hyperreal number(const NodePtr &n) { return ev_.number(*n); }

    Outcome eval(const std::vector<NodePtr> &xs)
    {
        if (xs.empty()) {
            fail(ErrorCode::parse_error, "eval needs an expression");
        }
        Outcome o;
        Json results = Json::array();
        for (const auto &x : xs) {
            const Hyperreal h = number(x);
            o.text += (o.text.empty() ? "" : "\n") + block(h);
            Json j = value(h);
            if (opt_.shadow) {
                try {
                    j["shadow"] = text(hr_shadow(h));
                } catch (const Error &) {
                    j["shadow"] = nullptr;
                }
            }
            results.push_back(j);
        }
        json_["results"] = results;
        return o;
    }

    Outcome compare_cmd(const std::vector<NodePtr> &xs)
    {
        arity(xs, 2, "compare A B");
        const Hyperreal a = number(xs[0]);
        const Hyperreal b = number(xs[1]);
        const OrderVerdict v = hyperreal::compare(a, b, opt_.horizon);
        json_["left"] = value(a);
        json_["right"] = value(b);
        json_["result"] = verdict_json(v);
        Outcome o;
        o.text = v.word() + "\ncertificate: " + certificate_text(v.cert);
        if (!v.known) {
            o.text += "\nhorizon: " + std::to_string(v.horizon);
        }
        o.status = v.known ? 0 : 2;
        return o;
    }

    Outcome shadow_cmd(const std::vector<NodePtr> &xs)
    {
        arity(xs, 1, "shadow A");
        const Hyperreal h = number(xs[0]);
        const Hyperreal s = hr_shadow(h);
        json_["result"] = value(s);
        return {block(s), 0};
    }

    Outcome classify_cmd(const std::vector<NodePtr> &xs)
    {
        arity(xs, 1, "classify A");
        const Hyperreal h = number(xs[0]);
        const Classification c = hr_classify(h);
        json_["value"] = value(h);
        json_["result"] = classification_name(c);
        return {classification_name(c), c == Classification::unknown ? 2 : 0};
    }

    Outcome sequence_cmd(const std::vector<NodePtr> &xs)
    {
        arity(xs, 1, "sequence A");
        const Hyperreal h = number(xs[0]);
        const std::uint64_t k = opt_.prefix.value_or(10);
        std::string s = text(h);
        Json elems = Json::array();
        for (std::uint64_t n = 1; n <= k; ++n) {
            const Element e = h.element(n);
            s += "\n" + std::to_string(n) + ": " + element_text(e, opt_.precision);
            elems.push_back(element_json(e));
        }
        s += "\ndeterminacy: " + determinacy_text(h);
        Json j = value(h);
        j["prefix"] = elems;
        json_["result"] = j;
        return {s, 0};
    }

    Outcome truth_outcome(const std::string &label, const TruthValue &t, std::string extra = "")
    {
        json_["result"] = truth_json(t);
        std::string s = label + ": " + t.to_string() + "\ncertificate: " + certificate_text(t.cert);
        if (!extra.empty()) {
            s += "\n" + extra;
        }
        return {s, truth_status(t)};
    }

    Outcome audit(const std::string &kind, const std::vector<NodePtr> &xs)
    {
        if (kind == "ftc") {
            arity(xs, 1, "audit ftc 'int(x=a..b, f)'");
            auto p = ev_.integral_parts(*xs[0]);
            const std::uint64_t upto = opt_.prefix.value_or(50);
            const FtcAudit a = ftc_audit(p.f, p.a, p.b, p.singular, upto);
            std::ostringstream os;
            os << std::setprecision(3) << a.worst_relative;
            json_["result"] = Json{{"passed", a.passed},
                                   {"checked", a.checked},
                                   {"worst_relative", a.worst_relative},
                                   {"worst_index", a.worst_index}};
            return {std::string("ftc: ") + (a.passed ? "pass" : "FAIL") + "\nchecked: n=1.." + std::to_string(a.checked) +
                        "\nworst relative error: " + os.str() + " at n=" + std::to_string(a.worst_index),
                    a.passed ? 0 : 1};
        }
        if (kind == "pareto") {
            arity(xs, 2, "audit pareto X Y");
            const auto a = audit_strong_pareto(ev_.stream_value(*xs[0]), ev_.stream_value(*xs[1]), opt_.horizon);
            json_["result"] = Json{{"premise", truth_json(a.premise)},
                                   {"values", verdict_json(a.values)},
                                   {"better", truth_json(a.better)},
                                   {"gain", value(a.gain)}};
            return {"premise: " + a.premise.to_string() + "\nvalues: " + a.values.word() + "\nbetter: " +
                        a.better.to_string() + "\ngain: " + text(a.gain),
                    a.values.known ? 0 : 2};
        }
        if (kind == "overtaking") {
            arity(xs, 2, "audit overtaking X Y");
            const auto x = ev_.stream_value(*xs[0]);
            const auto y = ev_.stream_value(*xs[1]);
            const auto v = overtaking_compare(x, y, opt_.horizon);
            Json j = verdict_json(v.verdict);
            j["T"] = v.T ? Json(v.T->get_str()) : Json(nullptr);
            json_["result"] = j;
            std::string s = v.verdict.word() + "\ncertificate: " + certificate_text(v.verdict.cert);
            if (v.T) {
                s += "\novertakes after t=" + v.T->get_str();
            }
            return {s, v.verdict.known ? 0 : 2};
        }
        if (kind == "anonymity") {
            arity(xs, 2, "audit anonymity X {i:j, ...}");
            const auto a = audit_finite_anonymity(ev_.stream_value(*xs[0]), ev_.index_map(*xs[1]));
            json_["result"] = Json{{"equal", truth_json(a.equal)},
                                   {"zero_from", a.zero_from.get_str()},
                                   {"difference", value(a.difference)}};
            return {"equal: " + a.equal.to_string() + "\nterm difference zero from n=" + a.zero_from.get_str() +
                        "\nvalue difference: " + text(a.difference),
                    truth_status(a.equal)};
        }
        if (kind == "partition") {
            if (xs.size() < 2) {
                fail(ErrorCode::parse_error, "usage: audit partition WHOLE PART...");
            }
            std::vector<SetPtr> parts;
            for (std::size_t i = 1; i < xs.size(); ++i) {
                parts.push_back(ev_.set_value(*xs[i]));
            }
            return truth_outcome("additivity", verify_partition_additivity(parts, ev_.set_value(*xs[0])));
        }
        if (kind == "subset") {
            arity(xs, 2, "audit subset X Y");
            const auto v = compare_by_inclusion(ev_.set_value(*xs[0]), ev_.set_value(*xs[1]));
            json_["result"] = verdict_json(v);
            return {v.word() + "\ncertificate: " + certificate_text(v.cert), v.known ? 0 : 2};
        }
        if (kind == "identities") {
            arity(xs, 1, "audit identities PROC");
            const auto checks = verify_identities(ev_.typed<HazardProcess>(*xs[0], "process"));
            std::string s;
            Json arr = Json::array();
            int status = 0;
            for (const auto &c : checks) {
                s += (s.empty() ? "" : "\n") + c.name + ": smooth " + c.smooth.to_string() + ", floor " +
                     c.floor_exact.to_string();
                if (c.smooth_factor) {
                    s += ", factor " + c.smooth_factor->to_string();
                }
                s += "\n  " + c.detail;
                status = std::max(status, std::max(truth_status(c.smooth), truth_status(c.floor_exact)));
                arr.push_back(Json{{"name", c.name},
                                   {"smooth", truth_json(c.smooth)},
                                   {"floor", truth_json(c.floor_exact)},
                                   {"factor", c.smooth_factor ? Json(c.smooth_factor->to_string()) : Json(nullptr)},
                                   {"floor_exponent", bounds_json(c.floor_factor_exponent)},
                                   {"detail", c.detail}});
            }
            json_["result"] = arr;
            return {s, status};
        }
        if (kind == "discrepancy") {
            arity(xs, 1, "audit discrepancy PROC");
            const auto p = ev_.typed<HazardProcess>(*xs[0], "process");
            return truth_outcome("discrepancy", verify_discrepancy(p, opt_.prefix.value_or(1024)));
        }
        fail(ErrorCode::parse_error, "unknown audit '" + kind + "'");
    }
};

} // namespace detail

inline Outcome run(const std::string &verb, const std::vector<std::string> &args, const Options &opt = {},
                   const Definitions &defs = {})
{
    try {
        return detail::Runner(opt, defs).run(verb, args);
    } catch (const Error &e) {
        const std::string code(error_code_name(e.code()));
        if (opt.json) {
            Json j{{"command", verb}, {"error", {{"code", code}, {"message", e.what()}}}, {"status", 1}};
            return {j.dump(2), 1};
        }
        return {"error[" + code + "]: " + e.what(), 1};
    }
}

} // namespace hyperreal::cli
