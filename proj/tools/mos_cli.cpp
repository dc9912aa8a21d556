#include <CLI11.hpp>
#include <iostream>

// Command-line front end.  Subcommands are registered as the corresponding
// engine pieces come online; see README for usage.
int main(int argc, char** argv) {
    CLI::App app{"multi-object search planning engine"};
    app.require_subcommand(1);

    bool placeholder = false;
    auto* version = app.add_subcommand("version", "print version");
    version->add_flag("--quiet", placeholder, "no-op");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (version->parsed()) {
        std::cout << "mos 0.1.0\n";
        return 0;
    }
    return 0;
}
