#include "cli.hpp"

int main(int argc, char** argv) { return e2h::cli::main(argc, argv); }
