#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <hyperreal/commands.hpp>

int main(int argc, char **argv)
{
    using namespace hyperreal;
    CLI::App app{"hyperreal: sums, integrals and values at w"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::Options opt;
    std::uint64_t prefix = 0;
    std::string defs_file;
    app.add_flag("--json", opt.json, "emit JSON");
    app.add_option("--prefix", prefix, "number of sequence elements to print")->check(CLI::Range(1, 1000000));
    app.add_option("--horizon", opt.horizon, "scan length for uncertified comparisons")->check(CLI::PositiveNumber);
    app.add_flag("--shadow", opt.shadow, "also print the standard part");
    app.add_option("--precision", opt.precision, "significant digits for inexact elements")->check(CLI::Range(1, 40));
    app.add_flag("--unicode", opt.unicode, "render w as the omega letter");
    app.add_option("--defs", defs_file, "file of 'name = expression' lines")->check(CLI::ExistingFile);

    std::vector<std::string> args;
    std::string verb;
    for (const char *name : {"eval", "compare", "shadow", "classify", "sequence", "audit"}) {
        auto *sub = app.add_subcommand(name);
        sub->add_option("expr", args, "expressions")->required();
        sub->callback([&verb, name] { verb = name; });
    }
    app.get_subcommand("audit")->description("ftc | pareto | overtaking | anonymity | partition | subset | identities | discrepancy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (prefix > 0) {
        opt.prefix = prefix;
    }

    dsl::Definitions defs;
    if (!defs_file.empty()) {
        std::ifstream in(defs_file);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            defs = dsl::parse_definitions(text);
        } catch (const Error &e) {
            std::cerr << "error[" << error_code_name(e.code()) << "]: " << defs_file << ": " << e.what() << "\n";
            return 1;
        }
    }

    const auto out = cli::run(verb, args, opt, defs);
    (out.status == 1 && !opt.json ? std::cerr : std::cout) << out.text << "\n";
    return out.status;
}
