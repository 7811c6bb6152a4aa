#include <gtest/gtest.h>

#include <hyperreal/commands.hpp>

using namespace hyperreal;
using namespace hyperreal::dsl;

namespace
{

std::string round(const std::string &s)
{
    return render(*parse(s));
}

std::string parse_error_of(const std::string &s)
{
    try {
        parse(s);
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::parse_error);
        return e.what();
    }
    return "no error";
}

cli::Outcome exec(const std::string &verb, std::vector<std::string> args, cli::Options opt = {},
                 const Definitions &defs = {})
{
    return cli::run(verb, args, opt, defs);
}

} // namespace

// parsing and rendering

TEST(Parse, MinimalParentheses)
{
    EXPECT_EQ(round("a+b*c"), "a + b*c");
    EXPECT_EQ(round("(a+b)*c"), "(a + b)*c");
    EXPECT_EQ(round("a-(b-c)"), "a - (b - c)");
    EXPECT_EQ(round("a-b-c"), "a - b - c");
    EXPECT_EQ(round("(2^3)^2"), "(2^3)^2");
    EXPECT_EQ(round("2^3^2"), "2^3^2");
    EXPECT_EQ(round("(-x)^2"), "(-x)^2");
    EXPECT_EQ(round("a/(b*c)"), "a/(b*c)");
}

TEST(Parse, PowerIsRightAssociative)
{
    EXPECT_TRUE(same_ast(*parse("2^3^2"), *parse("2^(3^2)")));
    EXPECT_FALSE(same_ast(*parse("2^3^2"), *parse("(2^3)^2")));
    EXPECT_TRUE(same_ast(*parse("-x^2"), *parse("-(x^2)")));
}

TEST(Parse, RoundTripIsStable)
{
    for (const char *s : {"sum(i=1..inf, i^2*2^-i)", "int(x=0..inf, 1/(1+x^2))", "{1:2, 3:4}", "[1:4]",
                          "evens | odds & ~squares", "A \\ B", "world(cube, rho=3, deltas=[1:4])",
                          "stream(geom, 1, 1/2)", "1.50*x"}) {
        const std::string once = round(s);
        EXPECT_EQ(round(once), once) << s;
        EXPECT_TRUE(same_ast(*parse(s), *parse(once))) << s;
    }
}

TEST(Parse, JuxtaposedArguments)
{
    EXPECT_EQ(round("f(x, y z)"), "f(x, y, z)");
    EXPECT_EQ(round("stream(geom 1 2)"), "stream(geom, 1, 2)");
}

TEST(Parse, UnicodeNames)
{
    EXPECT_EQ(round("ω + ∞"), "w + inf");
}

TEST(Parse, ErrorSpans)
{
    EXPECT_EQ(parse_error_of("1 +"), "at 4-4: unexpected end of input");
    EXPECT_EQ(parse_error_of("sum(i=1..inf,, i)"), "at 14-14: expected an argument after ','");
    EXPECT_NE(parse_error_of("(1 + 2"), "no error");
    EXPECT_NE(parse_error_of("1 ) 2"), "no error");
}

TEST(Parse, ManyExpressions)
{
    const auto xs = parse_many("w^2/2 w");
    ASSERT_EQ(xs.size(), 2u);
    EXPECT_EQ(render(*xs[0]), "w^2/2");
    EXPECT_EQ(render(*xs[1]), "w");
}

// definitions

TEST(Definitions, ParsesNamesAndComments)
{
    const auto defs = parse_definitions("# worlds\nrho = 3\nw1 = world(cube, rho=rho)\n\n");
    ASSERT_EQ(defs.size(), 2u);
    const auto out = exec("eval", {"total(w1)"}, {}, defs);
    EXPECT_EQ(out.status, 0);
    EXPECT_EQ(out.text, "24*w^3\ndeterminacy: exact-for-all-n");
}

TEST(Definitions, Errors)
{
    auto msg = [](const std::string &text) {
        try {
            parse_definitions(text);
        } catch (const Error &e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_EQ(msg("a = 1\nw = 2"), "line 2: 'w' is reserved");
    EXPECT_EQ(msg("a = 1\na = 2"), "line 2: 'a' defined twice");
    EXPECT_EQ(msg("just words"), "line 1: expected 'name = expression'");
    EXPECT_EQ(msg("a b = 1"), "line 1: left side must be a single name");
}

// commands

TEST(Cli, EvalPrintsDeterminacy)
{
    const auto out = exec("eval", {"sum(i=1..inf, i)"});
    EXPECT_EQ(out.status, 0);
    EXPECT_EQ(out.text, "w*(w+1)/2\ndeterminacy: exact-for-all-n");
}

TEST(Cli, EvalOptions)
{
    cli::Options opt;
    opt.shadow = true;
    EXPECT_EQ(exec("eval", {"3 + 1/w"}, opt).text, "3 + 1/w\ndeterminacy: exact-for-all-n\nshadow: 3");
    cli::Options pre;
    pre.prefix = 5;
    EXPECT_EQ(exec("eval", {"floor(w/2)"}, pre).text, "floor(w/2)\ndeterminacy: exact-for-all-n\nprefix: 0, 1, 1, 2, 2");
    cli::Options uni;
    uni.unicode = true;
    EXPECT_EQ(exec("eval", {"w^2/2 + log(w)"}, uni).text, "ω^2/2 + log(ω)\ndeterminacy: exact-for-all-n");
}

TEST(Cli, SequenceOnlyShowsPrefix)
{
    const auto out = exec("eval", {"sum(i=1..inf, 1/i)"});
    EXPECT_EQ(out.text, "sum(i=1..w, 1/i)\ndeterminacy: sequence-only\nprefix: 1, 3/2, 11/6, 25/12, 137/60, 49/20, 363/140, 761/280");
}

TEST(Cli, CompareVerdicts)
{
    EXPECT_EQ(exec("compare", {"w^2/2", "w"}).text, "greater\ncertificate: leading-term; from n=3; leading term w^2/2");
    const auto alt = exec("compare", {"sum(i=1..inf, (-1)^(i-1)*i)", "0"});
    EXPECT_EQ(alt.status, 0);
    EXPECT_EQ(alt.text, "indeterminate\ncertificate: case-split; from n=1; modulus 2; residues mod 2");
    EXPECT_EQ(exec("compare", {"w^2/2 w"}).text.substr(0, 7), "greater");
}

TEST(Cli, ShadowAndClassify)
{
    EXPECT_EQ(exec("shadow", {"variance(dist(cauchy)) - 2*w/pi"}).text, "-1\ndeterminacy: exact-for-all-n");
    EXPECT_EQ(exec("classify", {"log(w)"}).text, "lesser-infinite");
    EXPECT_EQ(exec("classify", {"cos(w)/w"}).text, "infinitesimal");
}

TEST(Cli, Audits)
{
    const auto ftc = exec("audit", {"ftc", "int(x=0..inf, x*exp(-x))"});
    EXPECT_EQ(ftc.status, 0);
    EXPECT_EQ(ftc.text.substr(0, 9), "ftc: pass");
    const auto an = exec("audit", {"anonymity", "stream(arith 1 1)", "{1:5, 5:1, 2:3, 3:2}"});
    EXPECT_EQ(an.text, "equal: determinately-true\nterm difference zero from n=6\nvalue difference: 0");
    const auto ot = exec("audit", {"overtaking", "stream(const 1)", "stream(arith (-3) 1)"});
    EXPECT_EQ(ot.text, "less\ncertificate: leading-term; from n=10; leading term -w^2/2\novertakes after t=9");
    EXPECT_EQ(exec("audit", {"partition", "positives", "evens", "odds"}).text,
              "additivity: determinately-true\ncertificate: exact-identity; identical closed forms");
}

TEST(Cli, ErrorsCarryCodes)
{
    auto e1 = exec("eval", {"foo(1)"});
    EXPECT_EQ(e1.status, 1);
    EXPECT_EQ(e1.text, "error[parse-error]: at 1-6: unknown function 'foo'");
    EXPECT_EQ(exec("eval", {"int(x=0..1, 1/x)"}).text,
              "error[undeclared-singularity]: x^(-1) is singular at 0; declare singular=0");
    EXPECT_EQ(exec("eval", {"int(x=0..1, 1/x, singular=0)"}).text, "log(w)\ndeterminacy: exact-for-all-n");
    EXPECT_EQ(exec("compare", {"w"}).text, "error[parse-error]: expected 2 expressions, got 1; usage: compare A B");
    EXPECT_EQ(exec("eval", {"stream(bogus 1)"}).status, 1);
    EXPECT_EQ(exec("nonsense", {"1"}).status, 1);
}

TEST(Cli, JsonOutput)
{
    cli::Options opt;
    opt.json = true;
    const auto out = exec("compare", {"w", "3"}, opt);
    const auto j = Json::parse(out.text);
    EXPECT_EQ(j["command"], "compare");
    EXPECT_EQ(j["result"]["verdict"], "greater");
    EXPECT_EQ(j["result"]["certificate"]["kind"], "leading-term");
    EXPECT_EQ(j["left"]["determinacy"]["classification"], "infinite");
    EXPECT_EQ(j["status"], 0);
    const auto bad = Json::parse(exec("eval", {"1 +"}, opt).text);
    EXPECT_EQ(bad["error"]["code"], "parse-error");
    EXPECT_EQ(bad["status"], 1);
}

TEST(Cli, DomainValues)
{
    auto text = [](const std::string &e) {
        const auto out = exec("eval", {e});
        return out.text.substr(0, out.text.find('\n'));
    };
    EXPECT_EQ(text("num(squares)"), "floor(sqrt(w))");
    EXPECT_EQ(text("num(~squares & positives)"), "ceil(w - sqrt(w))");
    EXPECT_EQ(text("ev(dist(stpetersburg))"), "floor(log2(w))");
    EXPECT_EQ(text("value(stream(geom 1 2))"), "2^w - 1");
    EXPECT_EQ(text("average(stream(delay stream(const 1)))"), "1 - 1/w");
    EXPECT_EQ(text("average(world(cube, rho=3, deltas=[1:4]))"), "3 + 4/w^3");
    EXPECT_EQ(text("survival(proc(flips base=2))"), "2^-w/2");
    EXPECT_EQ(text("survival(proc(harmonic rate=3 start=4/3))"), "1/(3*w - 3)");
    EXPECT_EQ(text("int(x=0..inf, 1+sin(x))"), "w + 1 - cos(w)");
}
