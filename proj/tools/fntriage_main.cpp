#include "fntriage/cli.hpp"

int main(int argc, char** argv) { return fntriage::cli::run(argc, argv); }
