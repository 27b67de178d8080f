// SPDX-License-Identifier: MIT
//
// caten command-line frontend (subcommands are registered as the library
// modules land).

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"caten: tensor networks <-> quantum causal models"};
    app.require_subcommand(0);
    CLI11_PARSE(app, argc, argv);
    return 0;
}
